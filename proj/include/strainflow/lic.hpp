#ifndef STRAINFLOW_LIC_HPP
#define STRAINFLOW_LIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "strainflow/sankey.hpp"
#include "strainflow/strain.hpp"

namespace strainflow {

// Sign-ambiguous unit axis per sample (d and -d are the same axis).
// `usable` is false at degenerate (eps1 ~ eps2) and invalid samples.
struct line_field {
  grid_spec grid;
  std::vector<vec2> dir;
  std::vector<std::uint8_t> usable;
};

struct lic_config {
  double kernel_half_length = 10.0;  // L, px
  double step = 0.5;                 // px, in (0, 1]
  int supersample = 4;               // sub-pixel offsets: 1, 4, 9 or 16
  std::uint64_t noise_seed = 1;
  int output_scale = 4;              // px per sample

  void validate() const;
};

struct gray_image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

struct rgb_image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel
};

line_field make_line_field(const strain_frame& strain);

// One classical RK4 step through the sign-aligned direction field.
// Returns false when the step leaves the grid or enters a degenerate
// region; pos/dir are untouched in that case.
bool rk4_step(vec2& pos, vec2& dir_prev, const line_field& field, double step);

// Seeded white noise, one value per grid sample (64-bit LCG, MMIX constants).
std::vector<double> lic_noise(const grid_spec& grid, std::uint64_t seed);

// Box-kernel convolution of `noise` along streamlines of `field`.
// Exposed separately so tests can inject a custom noise texture.
gray_image lic_convolve(const line_field& field,
                        const std::vector<double>& noise,
                        const lic_config& config);

gray_image lic_image(const line_field& field, const lic_config& config);

// Colormap color of evm scaled by LIC luminance per pixel.
rgb_image overlay_evm(const gray_image& lic, const std::vector<double>& evm,
                      const grid_spec& grid, double global_max,
                      const std::vector<color_anchor>& colormap);

std::string encode_pgm(const gray_image& img);
std::string encode_ppm(const rgb_image& img);

}  // namespace strainflow

#endif
