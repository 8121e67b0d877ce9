#pragma once

#include <cmath>
#include <complex>

#include "qtomo/errors.hpp"
#include "qtomo/oscore.hpp"

namespace qtomo {

// Numerical parameters shared by the estimator families. Zero grid sizes
// mean "derive from dim".
struct EstimatorConfig {
  int dim = 8;  // Fock truncation n_max + 1, or 2s + 1 for spins

  // Homodyne kernel: Gauss-Legendre k-integral over [0, k_max] with
  // Gaussian regularizer exp(-reg_eps k^2); pattern functions tabulated on a
  // q-grid of spacing table_step for Monte Carlo averaging.
  double k_max = 40.0;
  double reg_eps = 1e-6;
  int k_panels = 160;
  int k_order = 8;
  double table_step = 0.005;

  // Extra Fock levels for squeezed kernels and displaced-state sampling.
  int pad = 20;

  int phi_grid = 0;     // homodyne exact average / nonunitary phase grid
  int kerr_phi_grid = 0;  // >= 2 dim + 1
  int kerr_psi_grid = 0;  // >= 2 dim^2 + 1
  int parity_radial = 64;
  int parity_angular = 0;  // >= 2 dim
  int sphere_order = 0;    // Gauss-Legendre order in cos(theta), >= 2s + 1

  int glauber_grid = 41;
  double glauber_extent = 4.0;

  void validate() const {
    require(dim >= 1, "dim must be positive");
    require(k_max > 0.0, "k_max must be positive");
    require(reg_eps > 0.0, "reg_eps must be positive");
    require(k_panels >= 1 && k_order >= 2, "k quadrature too coarse");
    require(table_step > 0.0 && table_step <= 0.05, "table_step must be in (0, 0.05]");
    require(pad >= 0, "pad must be non-negative");
    require(phi_grid == 0 || phi_grid >= 2 * dim, "phi grid must have at least 2 dim points");
    require(kerr_phi_grid == 0 || kerr_phi_grid >= 2 * dim + 1, "Kerr phi grid must have at least 2 dim + 1 points");
    require(kerr_psi_grid == 0 || kerr_psi_grid >= 2 * dim * dim + 1,
            "Kerr psi grid must have at least 2 dim^2 + 1 points");
    require(parity_radial >= 8, "parity radial order must be at least 8");
    require(parity_angular == 0 || parity_angular >= 2 * dim, "parity angular grid must have at least 2 dim points");
    require(glauber_grid >= 3 && glauber_extent > 0.0, "Glauber grid too small");
  }

  int phi_points() const { return phi_grid > 0 ? phi_grid : 4 * dim; }
  int kerr_phi_points() const { return kerr_phi_grid > 0 ? kerr_phi_grid : 2 * dim + 1; }
  int kerr_psi_points() const { return kerr_psi_grid > 0 ? kerr_psi_grid : 2 * dim * dim + 1; }
  int parity_angular_points() const { return parity_angular > 0 ? parity_angular : 4 * dim; }

  EstimatorConfig with_dim(int d) const {
    EstimatorConfig c = *this;
    c.dim = d;
    return c;
  }
};

struct SqueezeParams {
  cplx zeta{0.0, 0.0};

  double mu() const { return std::cosh(std::abs(zeta)); }
  cplx nu() const { return std::polar(std::sinh(std::abs(zeta)), 2.0 * std::arg(zeta)); }
};

}  // namespace qtomo
