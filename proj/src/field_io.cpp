#include "strainflow/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "strainflow/strain.hpp"
#include "strainflow/topo.hpp"

namespace strainflow {

namespace {

std::string read_text_file(const std::filesystem::path& path,
                           const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw error(std::string("field_io: ") + what +
                " not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw error("field_io: cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw error("field_io: write failed for " + path.string());
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%03d.csv", index);
  return buf;
}

displacement_frame parse_frame_csv(const std::string& text,
                                   const grid_spec& grid, int frame_index,
                                   const std::string& name) {
  displacement_frame frame;
  frame.grid = grid;
  frame.frame_index = frame_index;
  frame.u.assign(grid.sample_count(), vec2{});
  frame.valid.assign(grid.sample_count(), 0);

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                name + "): empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,u,v,valid")
    throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                name + "): bad header '" + line + "'");

  int row = 0;
  const int expected = grid.sample_count();
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= expected)
      throw error("field_io: grid mismatch in frame " +
                  std::to_string(frame_index) + " (" + name + "): more than " +
                  std::to_string(expected) + " samples");

    std::string fields[5];
    std::size_t pos = 0;
    for (int f = 0; f < 5; ++f) {
      const std::size_t next = line.find(',', pos);
      if (f < 4 && next == std::string::npos)
        throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                    name + "): malformed row '" + line + "'");
      fields[f] = line.substr(pos, next == std::string::npos
                                       ? std::string::npos
                                       : next - pos);
      pos = next == std::string::npos ? line.size() : next + 1;
    }

    bool ok = true;
    const int ex = row % grid.width;
    const int ey = row / grid.width;
    const double fx = parse_double(fields[0], ok);
    if (!ok || fx != ex)
      throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                  name + "): row " + std::to_string(row) +
                  " out of raster order (x=" + fields[0] + ", expected " +
                  std::to_string(ex) + ")");
    const double fy = parse_double(fields[1], ok);
    if (!ok || fy != ey)
      throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                  name + "): row " + std::to_string(row) +
                  " out of raster order (y=" + fields[1] + ", expected " +
                  std::to_string(ey) + ")");

    vec2 u;
    u.x = parse_double(fields[2], ok);
    if (!ok)
      throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                  name + "): bad u value '" + fields[2] + "' at sample (" +
                  std::to_string(ex) + "," + std::to_string(ey) + ")");
    u.y = parse_double(fields[3], ok);
    if (!ok)
      throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                  name + "): bad v value '" + fields[3] + "' at sample (" +
                  std::to_string(ex) + "," + std::to_string(ey) + ")");

    std::uint8_t valid = 0;
    if (fields[4] == "1")
      valid = 1;
    else if (fields[4] != "0")
      throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                  name + "): valid flag must be 0 or 1, got '" + fields[4] +
                  "'");

    if (valid && (!std::isfinite(u.x) || !std::isfinite(u.y)))
      throw error("field_io: frame " + std::to_string(frame_index) + " (" +
                  name + "): non-finite displacement at sample (" +
                  std::to_string(ex) + "," + std::to_string(ey) + ")");

    const int idx = grid.index(ex, ey);
    frame.u[idx] = u;
    frame.valid[idx] = valid;
    ++row;
  }
  if (row != expected)
    throw error("field_io: grid mismatch in frame " +
                std::to_string(frame_index) + " (" + name + "): " +
                std::to_string(row) + " samples, expected " +
                std::to_string(expected) + " for " +
                std::to_string(grid.width) + "x" +
                std::to_string(grid.height));
  return frame;
}

}  // namespace

sequence load_sequence(const std::filesystem::path& manifest_path) {
  const std::string text = read_text_file(manifest_path, "manifest");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw error("field_io: malformed manifest " + manifest_path.string() +
                ": " + e.what());
  }

  sequence seq;
  std::vector<std::string> frame_files;
  try {
    seq.grid.width = j.at("width").get<int>();
    seq.grid.height = j.at("height").get<int>();
    seq.grid.spacing = j.at("spacing").get<double>();
    frame_files = j.at("frames").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw error("field_io: malformed manifest " + manifest_path.string() +
                ": " + e.what());
  }
  seq.grid.validate();

  const std::filesystem::path base = manifest_path.parent_path();
  for (std::size_t i = 0; i < frame_files.size(); ++i) {
    const std::filesystem::path fp = base / frame_files[i];
    const std::string csv = read_text_file(fp, "frame file");
    seq.frames.push_back(parse_frame_csv(csv, seq.grid,
                                         static_cast<int>(i),
                                         frame_files[i]));
  }
  return seq;
}

std::filesystem::path save_sequence(const sequence& seq,
                                    const std::filesystem::path& dir,
                                    const scenario_truth* truth) {
  std::filesystem::create_directories(dir);

  nlohmann::ordered_json manifest;
  manifest["width"] = seq.grid.width;
  manifest["height"] = seq.grid.height;
  manifest["spacing"] = seq.grid.spacing;
  manifest["frames"] = nlohmann::ordered_json::array();

  for (const displacement_frame& frame : seq.frames) {
    const std::string name = frame_filename(frame.frame_index);
    std::string csv = "x,y,u,v,valid\n";
    for (int y = 0; y < seq.grid.height; ++y) {
      for (int x = 0; x < seq.grid.width; ++x) {
        const int i = seq.grid.index(x, y);
        csv += std::to_string(x);
        csv += ',';
        csv += std::to_string(y);
        csv += ',';
        csv += format_double(frame.u[i].x);
        csv += ',';
        csv += format_double(frame.u[i].y);
        csv += ',';
        csv += frame.valid[i] ? '1' : '0';
        csv += '\n';
      }
    }
    write_text_file(dir / name, csv);
    manifest["frames"].push_back(name);
  }

  const std::filesystem::path manifest_path = dir / "manifest.json";
  write_text_file(manifest_path, manifest.dump(2) + "\n");

  if (truth) {
    nlohmann::ordered_json jt;
    jt["scenario"] = truth->scenario;
    if (truth->merge_frame) jt["merge_frame"] = *truth->merge_frame;
    if (truth->threshold_index) jt["threshold_index"] = *truth->threshold_index;
    if (truth->persistence_index)
      jt["persistence_index"] = *truth->persistence_index;
    write_text_file(dir / "truth.json", jt.dump(2) + "\n");
  }
  return manifest_path;
}

scenario_truth load_truth(const std::filesystem::path& truth_path) {
  const std::string text = read_text_file(truth_path, "truth file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw error("field_io: malformed truth file " + truth_path.string() +
                ": " + e.what());
  }
  scenario_truth t;
  t.scenario = j.value("scenario", "");
  if (j.contains("merge_frame")) t.merge_frame = j["merge_frame"].get<int>();
  if (j.contains("threshold_index"))
    t.threshold_index = j["threshold_index"].get<int>();
  if (j.contains("persistence_index"))
    t.persistence_index = j["persistence_index"].get<int>();
  return t;
}

namespace {

double ramp(int t, int n_frames) {
  return n_frames > 1 ? static_cast<double>(t) / (n_frames - 1) : 1.0;
}

displacement_frame blank_frame(const grid_spec& grid, int t) {
  displacement_frame f;
  f.grid = grid;
  f.frame_index = t;
  f.u.assign(grid.sample_count(), vec2{});
  f.valid.assign(grid.sample_count(), 1);
  return f;
}

// Localized radial stretch: u = a * exp(-r^2 / (2 sigma^2)) * (dx, dy).
struct pocket {
  double cx = 0.0, cy = 0.0;

  vec2 displacement(double x, double y, double a, double sigma) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double e = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    return {a * e * dx, a * e * dy};
  }

  mat2 gradient(double x, double y, double a, double sigma) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double s2 = sigma * sigma;
    const double e = std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
    mat2 m;
    m.a = a * e * (1.0 - dx * dx / s2);
    m.b = a * e * (-dx * dy / s2);
    m.c = m.b;
    m.d = a * e * (1.0 - dy * dy / s2);
    return m;
  }
};

struct blob_layout {
  pocket left, right;
  double sigma0 = 0.0, sigma1 = 0.0;
  double amp0 = 0.0, amp1 = 0.0;

  blob_layout(const grid_spec& grid, double amplitude) {
    const double w = (grid.width - 1) * grid.spacing;
    const double h = (grid.height - 1) * grid.spacing;
    left.cx = std::round(0.32 * (grid.width - 1)) * grid.spacing;
    right.cx = std::round(0.68 * (grid.width - 1)) * grid.spacing;
    left.cy = right.cy = std::round(0.5 * (grid.height - 1)) * grid.spacing;
    const double extent = std::min(w, h);
    sigma0 = 0.08 * extent;
    sigma1 = 0.20 * extent;
    amp0 = 0.6 * amplitude;
    amp1 = amplitude;
  }

  void at(int t, int n_frames, double& a, double& sigma) const {
    const double r = ramp(t, n_frames);
    a = amp0 + (amp1 - amp0) * r;
    sigma = sigma0 + (sigma1 - sigma0) * r;
  }
};

// First frame whose filtered analytic evm superlevel set joins both blob
// centers in one 8-connected component, at the canonical i_t=2, i_h=1.
int two_blobs_merge_frame(const grid_spec& grid, int n_frames,
                          const blob_layout& layout) {
  constexpr int kThresholdIndex = 2;
  constexpr int kPersistenceIndex = 1;

  std::vector<std::vector<double>> filtered(n_frames);
  std::vector<std::vector<std::uint8_t>> masks(n_frames);
  for (int t = 0; t < n_frames; ++t) {
    double a = 0.0, sigma = 0.0;
    layout.at(t, n_frames, a, sigma);
    std::vector<double> evm(grid.sample_count());
    for (int y = 0; y < grid.height; ++y) {
      for (int x = 0; x < grid.width; ++x) {
        const double px = x * grid.spacing;
        const double py = y * grid.spacing;
        const mat2 g1 = layout.left.gradient(px, py, a, sigma);
        const mat2 g2 = layout.right.gradient(px, py, a, sigma);
        const mat2 g{g1.a + g2.a, g1.b + g2.b, g1.c + g2.c, g1.d + g2.d};
        strain_tensor2 e;
        principal_strain p;
        strain_from_gradient(g, e, p, evm[grid.index(x, y)]);
      }
    }
    double dummy_tau = 0.0, h = 0.0;
    thresholds(kThresholdIndex, kPersistenceIndex, 1.0, dummy_tau, h);
    filtered[t] = h_maxima(evm, grid, h);
    masks[t].assign(grid.sample_count(), 1);
  }

  const double p95 = dataset_p95(filtered, masks);
  double tau = 0.0, h = 0.0;
  thresholds(kThresholdIndex, kPersistenceIndex, p95, tau, h);

  const int lx = static_cast<int>(std::round(layout.left.cx / grid.spacing));
  const int rx = static_cast<int>(std::round(layout.right.cx / grid.spacing));
  const int cy = static_cast<int>(std::round(layout.left.cy / grid.spacing));

  for (int t = 0; t < n_frames; ++t) {
    const auto regions = superlevel_components(filtered[t], grid, tau, t);
    for (const region& r : regions) {
      const bool has_left = std::binary_search(r.samples.begin(),
                                               r.samples.end(),
                                               coord{lx, cy});
      const bool has_right = std::binary_search(r.samples.begin(),
                                                r.samples.end(),
                                                coord{rx, cy});
      if (has_left && has_right) return t;
    }
  }
  throw error(
      "field_io: two-blobs-merge parameters never merge; increase frames or "
      "amplitude");
}

}  // namespace

sequence generate_scenario(const std::string& name, const grid_spec& grid,
                           int n_frames, const scenario_params& params,
                           scenario_truth& truth) {
  grid.validate();
  if (n_frames < 1) throw error("field_io: n_frames must be >= 1");
  if (!(params.amplitude > 0.0))
    throw error("field_io: scenario amplitude must be > 0");

  sequence seq;
  seq.grid = grid;
  truth = scenario_truth{};
  truth.scenario = name;

  if (name == "uniaxial") {
    for (int t = 0; t < n_frames; ++t) {
      displacement_frame f = blank_frame(grid, t);
      const double alpha = params.amplitude * ramp(t, n_frames);
      for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x)
          f.u[grid.index(x, y)] = {alpha * x * grid.spacing, 0.0};
      seq.frames.push_back(std::move(f));
    }
  } else if (name == "rigid-rotation") {
    // amplitude is the final rotation angle in radians
    for (int t = 0; t < n_frames; ++t) {
      displacement_frame f = blank_frame(grid, t);
      const double theta = params.amplitude * ramp(t, n_frames);
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
          const double px = x * grid.spacing;
          const double py = y * grid.spacing;
          f.u[grid.index(x, y)] = {c * px - s * py - px, s * px + c * py - py};
        }
      }
      seq.frames.push_back(std::move(f));
    }
  } else if (name == "simple-shear") {
    for (int t = 0; t < n_frames; ++t) {
      displacement_frame f = blank_frame(grid, t);
      const double gamma = params.amplitude * ramp(t, n_frames);
      for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x)
          f.u[grid.index(x, y)] = {gamma * y * grid.spacing, 0.0};
      seq.frames.push_back(std::move(f));
    }
  } else if (name == "two-blobs-merge") {
    const blob_layout layout(grid, params.amplitude);
    for (int t = 0; t < n_frames; ++t) {
      displacement_frame f = blank_frame(grid, t);
      double a = 0.0, sigma = 0.0;
      layout.at(t, n_frames, a, sigma);
      for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
          const double px = x * grid.spacing;
          const double py = y * grid.spacing;
          const vec2 u1 = layout.left.displacement(px, py, a, sigma);
          const vec2 u2 = layout.right.displacement(px, py, a, sigma);
          f.u[grid.index(x, y)] = u1 + u2;
        }
      }
      seq.frames.push_back(std::move(f));
    }
    truth.merge_frame = two_blobs_merge_frame(grid, n_frames, layout);
    truth.threshold_index = 2;
    truth.persistence_index = 1;
  } else if (name == "notch") {
    // Uniaxial pull plus a stress concentration at an edge notch tip.
    pocket tip;
    tip.cx = std::round(0.82 * (grid.width - 1)) * grid.spacing;
    tip.cy = std::round(0.5 * (grid.height - 1)) * grid.spacing;
    const double sigma =
        0.10 * std::min((grid.width - 1) * grid.spacing,
                        (grid.height - 1) * grid.spacing);
    for (int t = 0; t < n_frames; ++t) {
      displacement_frame f = blank_frame(grid, t);
      const double r = ramp(t, n_frames);
      const double alpha = 0.3 * params.amplitude * r;
      const double a = params.amplitude * r;
      for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
          const double px = x * grid.spacing;
          const double py = y * grid.spacing;
          const vec2 up = tip.displacement(px, py, a, sigma);
          f.u[grid.index(x, y)] = {alpha * px + up.x, up.y};
        }
      }
      seq.frames.push_back(std::move(f));
    }
  } else {
    throw error("field_io: unknown scenario '" + name +
                "' (expected uniaxial, rigid-rotation, simple-shear, "
                "two-blobs-merge or notch)");
  }
  return seq;
}

}  // namespace strainflow
