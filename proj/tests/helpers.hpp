#ifndef STRAINFLOW_TESTS_HELPERS_HPP
#define STRAINFLOW_TESTS_HELPERS_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "strainflow/core.hpp"
#include "strainflow/topo.hpp"

namespace testutil {

// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  const auto dir =
      std::filesystem::temp_directory_path() / ("strainflow_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<double> random_field(int n, std::mt19937_64& rng,
                                        double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> field(n);
  for (double& v : field) v = dist(rng);
  return field;
}

inline std::vector<std::uint8_t> random_mask(int n, double p_set,
                                             std::mt19937_64& rng) {
  std::bernoulli_distribution dist(p_set);
  std::vector<std::uint8_t> mask(n);
  for (auto& v : mask) v = dist(rng) ? 1 : 0;
  return mask;
}

// Reference reconstruction-by-dilation: iterate marker = min(mask,
// dilate8(marker)) to the fixpoint. Quadratic but obviously correct.
inline std::vector<double> reconstruct_fixpoint(
    const std::vector<double>& marker, const std::vector<double>& mask,
    const strainflow::grid_spec& grid) {
  std::vector<double> cur = marker;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<double> next = cur;
    for (int y = 0; y < grid.height; ++y) {
      for (int x = 0; x < grid.width; ++x) {
        double m = cur[grid.index(x, y)];
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (grid.contains(nx, ny)) m = std::max(m, cur[grid.index(nx, ny)]);
          }
        }
        m = std::min(m, mask[grid.index(x, y)]);
        if (m != next[grid.index(x, y)]) {
          next[grid.index(x, y)] = m;
          changed = true;
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

// Union-find component labeling, an algorithm family apart from the
// production flood fill. Returns per-sample component representative or -1.
inline std::vector<int> union_find_components(
    const std::vector<std::uint8_t>& mask, const strainflow::grid_spec& grid) {
  const int n = grid.sample_count();
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::vector<int> rank(n, 0);
  auto find = [&](int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
  };
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (!mask[grid.index(x, y)]) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if ((dx || dy) && grid.contains(nx, ny) && mask[grid.index(nx, ny)])
            unite(grid.index(x, y), grid.index(nx, ny));
        }
      }
    }
  }
  std::vector<int> label(n, -1);
  for (int i = 0; i < n; ++i)
    if (mask[i]) label[i] = find(i);
  return label;
}

}  // namespace testutil

#endif
