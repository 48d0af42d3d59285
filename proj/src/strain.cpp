#include "strainflow/strain.hpp"

#include <cmath>

namespace strainflow {

namespace {

// One finite-difference derivative along a single axis. `get` fetches the
// component value at offset d from the sample, `ok` reports validity.
template <typename Get, typename Ok>
bool axis_derivative(int i, int n, double spacing, Get get, Ok ok,
                     double& out) {
  const bool has_prev = i > 0 && ok(-1);
  const bool has_next = i + 1 < n && ok(+1);
  if (has_prev && has_next) {
    out = (get(+1) - get(-1)) / (2.0 * spacing);
    return true;
  }
  if (has_next) {
    out = (get(+1) - get(0)) / spacing;
    return true;
  }
  if (has_prev) {
    out = (get(0) - get(-1)) / spacing;
    return true;
  }
  return false;
}

}  // namespace

gradient_field displacement_gradient(const displacement_frame& frame) {
  const grid_spec& g = frame.grid;
  g.validate();

  bool any_valid = false;
  for (std::uint8_t v : frame.valid)
    if (v) {
      any_valid = true;
      break;
    }
  if (!any_valid)
    throw error("strain: frame " + std::to_string(frame.frame_index) +
                " has no valid samples");

  gradient_field out;
  out.grid = g;
  out.grad.assign(g.sample_count(), mat2{});
  out.valid.assign(g.sample_count(), 0);

  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const int idx = g.index(x, y);
      if (!frame.valid[idx]) continue;

      auto ok_x = [&](int d) { return frame.valid[g.index(x + d, y)] != 0; };
      auto ok_y = [&](int d) { return frame.valid[g.index(x, y + d)] != 0; };

      mat2 m;
      bool good = true;
      auto ux_x = [&](int d) { return frame.u[g.index(x + d, y)].x; };
      auto uy_x = [&](int d) { return frame.u[g.index(x + d, y)].y; };
      auto ux_y = [&](int d) { return frame.u[g.index(x, y + d)].x; };
      auto uy_y = [&](int d) { return frame.u[g.index(x, y + d)].y; };

      good &= axis_derivative(x, g.width, g.spacing, ux_x, ok_x, m.a);
      good &= axis_derivative(y, g.height, g.spacing, ux_y, ok_y, m.b);
      good &= axis_derivative(x, g.width, g.spacing, uy_x, ok_x, m.c);
      good &= axis_derivative(y, g.height, g.spacing, uy_y, ok_y, m.d);

      if (good) {
        out.grad[idx] = m;
        out.valid[idx] = 1;
      }
    }
  }
  return out;
}

deformation_gradient2 deformation_gradient(const mat2& grad_u) {
  return {1.0 + grad_u.a, grad_u.b, grad_u.c, 1.0 + grad_u.d};
}

strain_tensor2 green_lagrange(const deformation_gradient2& f) {
  strain_tensor2 e;
  e.exx = 0.5 * (f.fxx * f.fxx + f.fyx * f.fyx - 1.0);
  e.eyy = 0.5 * (f.fxy * f.fxy + f.fyy * f.fyy - 1.0);
  e.exy = 0.5 * (f.fxx * f.fxy + f.fyx * f.fyy);
  return e;
}

principal_strain principal_strains(const strain_tensor2& e) {
  principal_strain p;
  const double mean = 0.5 * (e.exx + e.eyy);
  const double diff = 0.5 * (e.exx - e.eyy);
  const double disc = std::sqrt(diff * diff + e.exy * e.exy);
  p.eps1 = mean + disc;
  p.eps2 = mean - disc;
  p.degenerate = (p.eps1 - p.eps2) < kDegenerateEigTol;

  if (p.degenerate) {
    p.dir = {1.0, 0.0};
    return p;
  }

  // Two algebraically equivalent eigenvector candidates; the one with the
  // larger norm is the better conditioned.
  vec2 a{e.exy, p.eps1 - e.exx};
  vec2 b{p.eps1 - e.eyy, e.exy};
  vec2 v = (a.dot(a) >= b.dot(b)) ? a : b;
  const double n = v.norm();
  v = {v.x / n, v.y / n};
  if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = {-v.x, -v.y};
  p.dir = v;
  return p;
}

double von_mises(double eps1, double eps2) {
  const double eps3 = -(eps1 + eps2);
  const double d12 = eps1 - eps2;
  const double d23 = eps2 - eps3;
  const double d31 = eps3 - eps1;
  return std::sqrt(2.0) / 3.0 * std::sqrt(d12 * d12 + d23 * d23 + d31 * d31);
}

void strain_from_gradient(const mat2& grad_u, strain_tensor2& e,
                          principal_strain& p, double& evm) {
  e = green_lagrange(deformation_gradient(grad_u));
  p = principal_strains(e);
  evm = von_mises(p.eps1, p.eps2);
}

strain_frame compute_strain_frame(const displacement_frame& frame) {
  gradient_field grad = displacement_gradient(frame);

  strain_frame out;
  out.grid = frame.grid;
  out.frame_index = frame.frame_index;
  const int n = frame.grid.sample_count();
  out.tensor.assign(n, strain_tensor2{});
  out.principal.assign(n, principal_strain{});
  out.evm.assign(n, 0.0);
  out.valid = grad.valid;

  for (int i = 0; i < n; ++i) {
    if (!out.valid[i]) continue;
    strain_from_gradient(grad.grad[i], out.tensor[i], out.principal[i],
                         out.evm[i]);
  }
  return out;
}

std::string strain_frame_csv(const strain_frame& sf) {
  std::string out = "x,y,exx,eyy,exy,eps1,eps2,evm,valid\n";
  const grid_spec& g = sf.grid;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const int i = g.index(x, y);
      out += std::to_string(x);
      out += ',';
      out += std::to_string(y);
      out += ',';
      out += format_double(sf.tensor[i].exx);
      out += ',';
      out += format_double(sf.tensor[i].eyy);
      out += ',';
      out += format_double(sf.tensor[i].exy);
      out += ',';
      out += format_double(sf.principal[i].eps1);
      out += ',';
      out += format_double(sf.principal[i].eps2);
      out += ',';
      out += format_double(sf.evm[i]);
      out += ',';
      out += sf.valid[i] ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

}  // namespace strainflow
