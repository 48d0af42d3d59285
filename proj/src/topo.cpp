#include "strainflow/topo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace strainflow {

std::vector<double> fill_invalid(const std::vector<double>& field,
                                 const std::vector<std::uint8_t>& valid) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field.size(); ++i)
    if (valid[i] && field[i] < lo) lo = field[i];
  if (!std::isfinite(lo)) throw error("topo: all samples invalid");

  std::vector<double> out = field;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!valid[i]) out[i] = lo;
  return out;
}

namespace {

constexpr int kDx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kDy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

}  // namespace

std::vector<double> h_maxima(const std::vector<double>& field,
                             const grid_spec& grid, double h) {
  if (h < 0.0) throw error("topo: h must be >= 0");
  const int w = grid.width;
  const int ht = grid.height;

  // marker = field - h, reconstructed by dilation under mask = field
  std::vector<double> m(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) m[i] = field[i] - h;
  if (h == 0.0) return m;

  // raster sweep: propagate from the already-visited half neighborhood
  for (int y = 0; y < ht; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      double v = m[i];
      if (x > 0) v = std::max(v, m[i - 1]);
      if (y > 0) {
        if (x > 0) v = std::max(v, m[i - w - 1]);
        v = std::max(v, m[i - w]);
        if (x + 1 < w) v = std::max(v, m[i - w + 1]);
      }
      m[i] = std::min(field[i], v);
    }
  }

  // anti-raster sweep, queueing samples that can still push a neighbor up
  std::deque<int> fifo;
  for (int y = ht - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      const int i = y * w + x;
      double v = m[i];
      if (x + 1 < w) v = std::max(v, m[i + 1]);
      if (y + 1 < ht) {
        if (x > 0) v = std::max(v, m[i + w - 1]);
        v = std::max(v, m[i + w]);
        if (x + 1 < w) v = std::max(v, m[i + w + 1]);
      }
      m[i] = std::min(field[i], v);

      bool enqueue = false;
      if (x + 1 < w && m[i + 1] < m[i] && m[i + 1] < field[i + 1])
        enqueue = true;
      if (!enqueue && y + 1 < ht) {
        if (x > 0 && m[i + w - 1] < m[i] && m[i + w - 1] < field[i + w - 1])
          enqueue = true;
        if (!enqueue && m[i + w] < m[i] && m[i + w] < field[i + w])
          enqueue = true;
        if (!enqueue && x + 1 < w && m[i + w + 1] < m[i] &&
            m[i + w + 1] < field[i + w + 1])
          enqueue = true;
      }
      if (enqueue) fifo.push_back(i);
    }
  }

  while (!fifo.empty()) {
    const int i = fifo.front();
    fifo.pop_front();
    const int x = i % w;
    const int y = i / w;
    for (int k = 0; k < 8; ++k) {
      const int nx = x + kDx8[k];
      const int ny = y + kDy8[k];
      if (nx < 0 || nx >= w || ny < 0 || ny >= ht) continue;
      const int j = ny * w + nx;
      if (m[j] < m[i] && m[j] != field[j]) {
        m[j] = std::min(m[i], field[j]);
        fifo.push_back(j);
      }
    }
  }
  return m;
}

double dataset_p95(const std::vector<std::vector<double>>& fields,
                   const std::vector<std::vector<std::uint8_t>>& masks) {
  std::vector<double> values;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto& mask = masks[f];
    for (std::size_t i = 0; i < fields[f].size(); ++i)
      if (mask[i]) values.push_back(fields[f][i]);
  }
  if (values.empty()) throw error("topo: no valid samples for percentile");

  // nearest-rank: 1-based index ceil(0.95 * n)
  const std::size_t n = values.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

void thresholds(int threshold_index, int persistence_index, double p95,
                double& tau, double& h) {
  if (threshold_index < 1 || threshold_index > 4)
    throw error("topo: threshold index i_t must be in 1..4, got " +
                std::to_string(threshold_index));
  if (persistence_index < 0 || persistence_index > 3)
    throw error("topo: persistence index i_h must be in 0..3, got " +
                std::to_string(persistence_index));
  tau = threshold_index * p95 / 4.0;
  h = persistence_index * 0.125 / 3.0;
}

std::vector<region> superlevel_components(const std::vector<double>& field,
                                          const grid_spec& grid, double tau,
                                          int frame_index, int first_id) {
  const int w = grid.width;
  const int ht = grid.height;
  std::vector<std::uint8_t> seen(field.size(), 0);
  std::vector<region> regions;
  std::vector<int> stack;

  for (int y0 = 0; y0 < ht; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const int start = y0 * w + x0;
      if (seen[start] || field[start] < tau) continue;

      region r;
      r.id = first_id + static_cast<int>(regions.size());
      r.frame_index = frame_index;
      r.max_evm = field[start];
      r.xmin = r.xmax = x0;
      r.ymin = r.ymax = y0;

      seen[start] = 1;
      stack.push_back(start);
      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % w;
        const int y = i / w;
        r.samples.push_back({x, y});
        r.max_evm = std::max(r.max_evm, field[i]);
        r.xmin = std::min(r.xmin, x);
        r.xmax = std::max(r.xmax, x);
        r.ymin = std::min(r.ymin, y);
        r.ymax = std::max(r.ymax, y);
        for (int k = 0; k < 8; ++k) {
          const int nx = x + kDx8[k];
          const int ny = y + kDy8[k];
          if (nx < 0 || nx >= w || ny < 0 || ny >= ht) continue;
          const int j = ny * w + nx;
          if (!seen[j] && field[j] >= tau) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
      std::sort(r.samples.begin(), r.samples.end());
      r.area = static_cast<int>(r.samples.size());
      regions.push_back(std::move(r));
    }
  }
  return regions;
}

std::string regions_jsonl(const std::vector<region>& regions) {
  std::string out;
  for (const region& r : regions) {
    out += "{\"id\":" + std::to_string(r.id) +
           ",\"frame\":" + std::to_string(r.frame_index) +
           ",\"area\":" + std::to_string(r.area) +
           ",\"max_evm\":" + format_double(r.max_evm) + ",\"bbox\":[" +
           std::to_string(r.xmin) + "," + std::to_string(r.ymin) + "," +
           std::to_string(r.xmax) + "," + std::to_string(r.ymax) + "]}\n";
  }
  return out;
}

}  // namespace strainflow
