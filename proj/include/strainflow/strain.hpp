#ifndef STRAINFLOW_STRAIN_HPP
#define STRAINFLOW_STRAIN_HPP

#include <cstdint>
#include <vector>

#include "strainflow/core.hpp"
#include "strainflow/field_io.hpp"

namespace strainflow {

// Symmetric 2x2 strain tensor; only the three distinct components stored.
struct strain_tensor2 {
  double exx = 0.0;
  double eyy = 0.0;
  double exy = 0.0;
};

struct deformation_gradient2 {
  double fxx = 1.0, fxy = 0.0;
  double fyx = 0.0, fyy = 1.0;
};

// |eps1 - eps2| below this flags the major direction as degenerate.
inline constexpr double kDegenerateEigTol = 1e-12;

struct principal_strain {
  double eps1 = 0.0;  // >= eps2
  double eps2 = 0.0;
  vec2 dir;           // unit major eigenvector, sign-canonical; meaningless
  bool degenerate = false;  // when degenerate
};

struct strain_frame {
  grid_spec grid;
  int frame_index = 0;
  std::vector<strain_tensor2> tensor;
  std::vector<principal_strain> principal;
  std::vector<double> evm;
  std::vector<std::uint8_t> valid;
};

struct gradient_field {
  grid_spec grid;
  std::vector<mat2> grad;  // [[du_x/dx, du_x/dy], [du_y/dx, du_y/dy]]
  std::vector<std::uint8_t> valid;
};

// Central differences in the interior, one-sided at borders. A sample whose
// stencil touches an invalid neighbor falls back to the first usable stencil
// in the order central, forward, backward; with none it turns invalid.
gradient_field displacement_gradient(const displacement_frame& frame);

deformation_gradient2 deformation_gradient(const mat2& grad_u);

strain_tensor2 green_lagrange(const deformation_gradient2& f);

principal_strain principal_strains(const strain_tensor2& e);

// Plane-incompressible von Mises: eps3 = -(eps1 + eps2), then
// sqrt(2)/3 * sqrt(sum of squared pairwise principal differences).
double von_mises(double eps1, double eps2);

strain_frame compute_strain_frame(const displacement_frame& frame);

// Same tensor chain but fed with an exact displacement gradient instead of
// finite differences; used by analytic generators and oracles.
void strain_from_gradient(const mat2& grad_u, strain_tensor2& e,
                          principal_strain& p, double& evm);

// Optional per-frame dump: x,y,exx,eyy,exy,eps1,eps2,evm,valid.
std::string strain_frame_csv(const strain_frame& sf);

}  // namespace strainflow

#endif
