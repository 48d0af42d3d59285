#include "strainflow/lic.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace strainflow {

namespace {

constexpr double kTinyNorm = 1e-12;

struct corner_cell {
  int x0, x1, y0, y1;
  double fx, fy;
};

// Interpolation cell of a position inside the sample domain
// [0, w-1] x [0, h-1]; callers check the domain bound first.
corner_cell cell_of(const vec2& pos, const grid_spec& grid) {
  corner_cell c;
  if (grid.width == 1) {
    c.x0 = c.x1 = 0;
    c.fx = 0.0;
  } else {
    c.x0 = std::min(static_cast<int>(std::floor(pos.x)), grid.width - 2);
    c.x0 = std::max(c.x0, 0);
    c.x1 = c.x0 + 1;
    c.fx = pos.x - c.x0;
  }
  if (grid.height == 1) {
    c.y0 = c.y1 = 0;
    c.fy = 0.0;
  } else {
    c.y0 = std::min(static_cast<int>(std::floor(pos.y)), grid.height - 2);
    c.y0 = std::max(c.y0, 0);
    c.y1 = c.y0 + 1;
    c.fy = pos.y - c.y0;
  }
  return c;
}

bool in_domain(const vec2& pos, const grid_spec& grid) {
  return pos.x >= 0.0 && pos.x <= grid.width - 1.0 && pos.y >= 0.0 &&
         pos.y <= grid.height - 1.0;
}

double bilinear(const std::vector<double>& values, const corner_cell& c,
                const grid_spec& grid) {
  const double v00 = values[grid.index(c.x0, c.y0)];
  const double v10 = values[grid.index(c.x1, c.y0)];
  const double v01 = values[grid.index(c.x0, c.y1)];
  const double v11 = values[grid.index(c.x1, c.y1)];
  const double top = v00 + c.fx * (v10 - v00);
  const double bot = v01 + c.fx * (v11 - v01);
  return top + c.fy * (bot - top);
}

// x > 0 half-plane, ties up; the same axis regardless of stored sign
vec2 canonical(const vec2& a) {
  if (a.x < 0.0 || (a.x == 0.0 && a.y < 0.0)) return a * -1.0;
  return a;
}

// Bilinear blend of the sign-ambiguous axis field: every corner axis is
// flipped into the half-plane of `ref` before mixing. A zero `ref` adopts
// the first corner's canonical direction. Exactly perpendicular corners
// also fall back to their canonical orientation, so the blend never
// depends on the stored signs and a global sign flip of the field
// reproduces every trace position bit for bit.
bool sample_dir(const vec2& pos, const line_field& field, const vec2& ref,
                vec2& out) {
  if (!in_domain(pos, field.grid)) return false;
  const corner_cell c = cell_of(pos, field.grid);
  const int idx[4] = {field.grid.index(c.x0, c.y0), field.grid.index(c.x1, c.y0),
                      field.grid.index(c.x0, c.y1),
                      field.grid.index(c.x1, c.y1)};
  for (int i : idx)
    if (!field.usable[i]) return false;

  vec2 r = ref;
  if (r.x == 0.0 && r.y == 0.0) r = canonical(field.dir[idx[0]]);

  const double w[4] = {(1.0 - c.fx) * (1.0 - c.fy), c.fx * (1.0 - c.fy),
                       (1.0 - c.fx) * c.fy, c.fx * c.fy};
  vec2 d{0.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    vec2 a = field.dir[idx[i]];
    const double along = a.dot(r);
    if (along < 0.0)
      a = a * -1.0;
    else if (along == 0.0)
      a = canonical(a);
    d = d + a * w[i];
  }
  const double n = d.norm();
  if (n < kTinyNorm) return false;
  out = d * (1.0 / n);
  return true;
}

int isqrt_exact(int n) {
  const int r = static_cast<int>(std::lround(std::sqrt(double(n))));
  return r * r == n ? r : -1;
}

std::string pnm_header(const char* magic, int w, int h) {
  return std::string(magic) + "\n" + std::to_string(w) + " " +
         std::to_string(h) + "\n255\n";
}

}  // namespace

void lic_config::validate() const {
  if (!(kernel_half_length > 0.0))
    throw error("lic: kernel half length must be > 0");
  if (!(step > 0.0) || step > 1.0)
    throw error("lic: step must be in (0, 1] pixels");
  if (isqrt_exact(supersample) < 0 || supersample < 1 || supersample > 64)
    throw error("lic: supersample must be a square count in [1, 64]");
  if (output_scale < 1) throw error("lic: output scale must be >= 1");
}

line_field make_line_field(const strain_frame& strain) {
  line_field field;
  field.grid = strain.grid;
  const int n = strain.grid.sample_count();
  field.dir.assign(n, vec2{});
  field.usable.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (!strain.valid[i] || strain.principal[i].degenerate) continue;
    field.dir[i] = strain.principal[i].dir;
    field.usable[i] = 1;
  }
  return field;
}

bool rk4_step(vec2& pos, vec2& dir_prev, const line_field& field,
              double step) {
  vec2 k1, k2, k3, k4;
  if (!sample_dir(pos, field, dir_prev, k1)) return false;
  if (!sample_dir(pos + k1 * (0.5 * step), field, dir_prev, k2)) return false;
  if (!sample_dir(pos + k2 * (0.5 * step), field, dir_prev, k3)) return false;
  if (!sample_dir(pos + k3 * step, field, dir_prev, k4)) return false;
  const vec2 blend = k1 + k2 * 2.0 + k3 * 2.0 + k4;
  const double n = blend.norm();
  if (n < kTinyNorm) return false;
  pos = pos + blend * (step / 6.0);
  dir_prev = blend * (1.0 / n);
  return true;
}

std::vector<double> lic_noise(const grid_spec& grid, std::uint64_t seed) {
  std::vector<double> noise(grid.sample_count());
  std::uint64_t state = seed;
  for (double& v : noise) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    v = static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  return noise;
}

gray_image lic_convolve(const line_field& field,
                        const std::vector<double>& noise,
                        const lic_config& config) {
  config.validate();
  const grid_spec& grid = field.grid;
  if (static_cast<int>(noise.size()) != grid.sample_count())
    throw error("lic: noise size does not match the grid");

  const int scale = config.output_scale;
  const int out_w = grid.width * scale;
  const int out_h = grid.height * scale;
  const double step = config.step / scale;  // sample units
  const int n_steps = std::max(
      1, static_cast<int>(std::lround(config.kernel_half_length / config.step)));
  const int k = isqrt_exact(config.supersample);

  std::vector<double> values(static_cast<std::size_t>(out_w) * out_h, 0.0);

  auto trace_sum = [&](vec2 pos, vec2 dir, double& sum, int& count) {
    for (int i = 0; i < n_steps; ++i) {
      if (!rk4_step(pos, dir, field, step)) return;
      if (!in_domain(pos, grid)) return;
      sum += bilinear(noise, cell_of(pos, grid), grid);
      ++count;
    }
  };

  auto render_rows = [&](int y_begin, int y_end) {
    for (int py = y_begin; py < y_end; ++py) {
      for (int px = 0; px < out_w; ++px) {
        double acc = 0.0;
        for (int sy = 0; sy < k; ++sy) {
          for (int sx = 0; sx < k; ++sx) {
            vec2 start{(px + (sx + 0.5) / k) / scale - 0.5,
                       (py + (sy + 0.5) / k) / scale - 0.5};
            start.x = std::clamp(start.x, 0.0, grid.width - 1.0);
            start.y = std::clamp(start.y, 0.0, grid.height - 1.0);
            const double center = bilinear(noise, cell_of(start, grid), grid);

            vec2 dir0;
            if (!sample_dir(start, field, vec2{}, dir0)) {
              acc += center;  // degenerate spot: plain noise, no filtering
              continue;
            }
            // forward and backward sums stay separate so a global sign flip
            // of the axis field reproduces the image byte for byte
            double f_sum = 0.0, b_sum = 0.0;
            int count = 1;
            trace_sum(start, dir0, f_sum, count);
            trace_sum(start, dir0 * -1.0, b_sum, count);
            acc += (center + (f_sum + b_sum)) / count;
          }
        }
        values[static_cast<std::size_t>(py) * out_w + px] =
            acc / config.supersample;
      }
    }
  };

  // pixels are independent; rows render in parallel into disjoint slots
  const int n_threads = std::min<int>(
      out_h, std::max(1u, std::thread::hardware_concurrency()));
  if (n_threads <= 1) {
    render_rows(0, out_h);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      const int y0 = out_h * t / n_threads;
      const int y1 = out_h * (t + 1) / n_threads;
      pool.emplace_back(render_rows, y0, y1);
    }
    for (std::thread& t : pool) t.join();
  }

  double lo = values.empty() ? 0.0 : values[0];
  double hi = lo;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  gray_image img;
  img.width = out_w;
  img.height = out_h;
  img.pixels.resize(values.size());
  // ranges at rounding-noise magnitude stay unstretched so a constant
  // texture maps to its own gray level instead of amplified noise
  const bool flat = !(hi - lo > 1e-12);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = flat ? values[i] : (values[i] - lo) / (hi - lo);
    const double b = std::floor(u * 255.0 + 0.5);
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(b, 0.0, 255.0));
  }
  return img;
}

gray_image lic_image(const line_field& field, const lic_config& config) {
  return lic_convolve(field, lic_noise(field.grid, config.noise_seed), config);
}

rgb_image overlay_evm(const gray_image& lic, const std::vector<double>& evm,
                      const grid_spec& grid, double global_max,
                      const std::vector<color_anchor>& colormap) {
  if (static_cast<int>(evm.size()) != grid.sample_count())
    throw error("lic: evm size does not match the grid");
  if (lic.width % grid.width != 0 || lic.height % grid.height != 0 ||
      lic.width / grid.width != lic.height / grid.height)
    throw error("lic: image size is not an integer multiple of the grid");
  const int scale = lic.width / grid.width;

  rgb_image img;
  img.width = lic.width;
  img.height = lic.height;
  img.pixels.resize(static_cast<std::size_t>(lic.width) * lic.height * 3);
  for (int py = 0; py < lic.height; ++py) {
    for (int px = 0; px < lic.width; ++px) {
      vec2 pos{(px + 0.5) / scale - 0.5, (py + 0.5) / scale - 0.5};
      pos.x = std::clamp(pos.x, 0.0, grid.width - 1.0);
      pos.y = std::clamp(pos.y, 0.0, grid.height - 1.0);
      const double e = bilinear(evm, cell_of(pos, grid), grid);
      const double lum =
          lic.pixels[static_cast<std::size_t>(py) * lic.width + px] / 255.0;
      rgb c{255, 255, 255};
      if (global_max > 0.0) c = color_of(e, global_max, colormap);
      const std::size_t o =
          (static_cast<std::size_t>(py) * lic.width + px) * 3;
      img.pixels[o] = static_cast<std::uint8_t>(std::floor(c.r * lum + 0.5));
      img.pixels[o + 1] =
          static_cast<std::uint8_t>(std::floor(c.g * lum + 0.5));
      img.pixels[o + 2] =
          static_cast<std::uint8_t>(std::floor(c.b * lum + 0.5));
    }
  }
  return img;
}

std::string encode_pgm(const gray_image& img) {
  std::string out = pnm_header("P5", img.width, img.height);
  out.append(reinterpret_cast<const char*>(img.pixels.data()),
             img.pixels.size());
  return out;
}

std::string encode_ppm(const rgb_image& img) {
  std::string out = pnm_header("P6", img.width, img.height);
  out.append(reinterpret_cast<const char*>(img.pixels.data()),
             img.pixels.size());
  return out;
}

}  // namespace strainflow
