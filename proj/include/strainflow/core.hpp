#ifndef STRAINFLOW_CORE_HPP
#define STRAINFLOW_CORE_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace strainflow {

struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Regular sample lattice shared by every per-frame field.
struct grid_spec {
  int width = 0;
  int height = 0;
  double spacing = 1.0;

  int sample_count() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }
  bool contains(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  void validate() const {
    if (width < 2 || height < 2)
      throw error("grid: width and height must be >= 2, got " +
                  std::to_string(width) + "x" + std::to_string(height));
    if (!(spacing > 0.0))
      throw error("grid: spacing must be > 0");
  }

  bool operator==(const grid_spec& o) const = default;
};

struct vec2 {
  double x = 0.0;
  double y = 0.0;

  vec2 operator+(const vec2& o) const { return {x + o.x, y + o.y}; }
  vec2 operator-(const vec2& o) const { return {x - o.x, y - o.y}; }
  vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

// Row-major 2x2 tensor, [[a, b], [c, d]].
struct mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

struct coord {
  int x = 0;
  int y = 0;
  bool operator==(const coord&) const = default;
  bool operator<(const coord& o) const {
    return y != o.y ? y < o.y : x < o.x;  // raster order
  }
};

// Locale-independent numeric formatting. Data files use 17 significant
// digits so doubles round-trip exactly through decimal text.
inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v,
                         std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

// Fixed two-decimal formatting for SVG geometry. "-0.00" collapses to "0.00".
inline std::string format_fixed2(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v,
                         std::chars_format::fixed, 2);
  std::string s(buf, r.ptr);
  if (s == "-0.00") s = "0.00";
  return s;
}

inline double parse_double(const std::string& s, bool& ok) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto r = std::from_chars(first, last, v);
  ok = r.ec == std::errc() && r.ptr == last;
  return v;
}

}  // namespace strainflow

#endif
