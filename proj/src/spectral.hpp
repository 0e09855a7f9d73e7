#pragma once

// Spectrum of the linearized operators around W:
//   L  = -Lap - (N+2)/(N-2) W^{4/(N-2)}       (wave case: L Y = -omega^2 Y)
//   L2 = -Lap - W^{4/(N-2)}                    (NLS case: -L2 L Y1 = omega_t^2 Y1)

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ground_state.hpp"
#include "radial_core.hpp"

namespace critwave {

// Symmetric tridiagonal matrix with Sturm-sequence counting.
struct SymmetricTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples rows i and i+1

  std::size_t size() const noexcept { return diag.size(); }
  // Number of eigenvalues strictly below x.
  std::size_t count_below(double x) const;
  // k-th smallest eigenvalue (k = 0 is the lowest) by bisection.
  double eigenvalue(std::size_t k, double rel_tol = 1e-15) const;
  // Solves (T - shift) z = rhs by the Thomas algorithm.
  std::vector<double> solve_shifted(double shift, std::span<const double> rhs) const;
};

// Flux form of -Lap on the cells [r_{i-1/2}, r_{i+1/2}], edges at the mapped
// midpoints. Unknowns are the nodes below r_max; the last node is a
// boundary value.
class RadialFiniteVolume {
 public:
  explicit RadialFiniteVolume(const RadialGrid& grid);

  std::size_t unknowns() const noexcept { return volume_.size(); }
  std::span<const double> volumes() const noexcept { return volume_; }

  // (-Lap f) on the interior nodes, using f's own boundary value.
  std::vector<double> neg_laplacian(std::span<const double> f) const;
  // Same, with a zero boundary value and f given on the unknowns only.
  std::vector<double> neg_laplacian_dirichlet(std::span<const double> f) const;
  // Symmetrized (-Lap + potential) with Dirichlet data: V^{-1/2} (K + V P) V^{-1/2}.
  SymmetricTridiagonal symmetric_operator(std::span<const double> potential) const;

 private:
  std::vector<double> volume_;
  std::vector<double> flux_;  // flux_[i] couples nodes i and i+1
};

enum class EigenMethod { grid_eigensolve, ode_shooting };

std::string to_string(EigenMethod m);

struct EigenPair {
  double omega = 0;
  RadialField Y;
  EigenMethod method = EigenMethod::grid_eigensolve;
  double residual = 0;  // |L Y + omega^2 Y|_2 / (omega^2 |Y|_2)
  // Grid solver only.
  std::size_t negative_count = 0;
  double second_eigenvalue = 0;
  std::size_t iterations = 0;
};

// -(N+2)/(N-2) W^{4/(N-2)} on the grid.
RadialField linearized_potential(const RadialField& W, double coefficient);

// Relative residual |L Y + omega^2 Y| / (omega^2 |Y|) with the flux-form L.
double eigen_residual(const RadialField& W, const RadialField& Y, double omega);

// Same with the fourth-order finite-difference Laplacian, for eigenfunctions
// that do not come from the flux form (the shooting result).
double eigen_residual_smooth(const RadialField& W, const RadialField& Y, double omega);

EigenPair ground_eigen_grid(const GridPtr& grid, const RadialField& W);

struct ShootingOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  double width = 1e-10;  // bisection stop width on omega
};

// Sign of the regular solution at the matching radius, +1 or -1. Positive
// means omega lies above the eigenvalue.
int shooting_sign(int dim, double omega, double r_limit, const ShootingOptions& opts = {});

EigenPair ground_eigen_shoot(const GridPtr& grid, std::pair<double, double> bracket,
                             const ShootingOptions& opts = {});

// Q(h) = 1/2 int |grad h|^2 - (N+2)/(2(N-2)) int W^{4/(N-2)} h^2.
class QuadraticForm {
 public:
  explicit QuadraticForm(const RadialField& W);
  double operator()(const RadialField& h) const;
  const RadialField& weight() const noexcept { return weight_; }  // W^{4/(N-2)}
  double coefficient() const noexcept { return coefficient_; }

 private:
  RadialField weight_;
  double coefficient_;
};

double q_form(const RadialField& h, const RadialField& W);

// Oblique projection removing span{Y, W0} so that int Y out = 0 and
// int grad W0 . grad out = 0 on the grid.
class OrthogonalComplement {
 public:
  OrthogonalComplement(RadialField Y, RadialField W0);

  struct Coefficients {
    double beta;
    double gamma0;
  };
  Coefficients coefficients(const RadialField& h) const;
  RadialField project(const RadialField& h) const;

  const RadialField& Y() const noexcept { return Y_; }
  const RadialField& W0() const noexcept { return W0_; }

 private:
  RadialField Y_, W0_;
  double yy_, yw_, wy_grad_, ww_grad_, det_;
};

RadialField project_G_perp(const RadialField& h, const RadialField& Y, const RadialField& W0);

struct CoercivityResult {
  double c_Q_estimate = 0;
  std::size_t samples = 0;
  std::size_t excluded = 0;  // fields annihilated by the projection
  std::uint64_t seed = 0;
  double worst_center = 0;
  double worst_width = 0;
};

// Deterministic per-sample generator seed.
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index);

CoercivityResult coercivity_probe(const RadialField& W, const RadialField& Y, const RadialField& W0,
                                  std::size_t samples, std::uint64_t seed);

struct NlsEigenPair {
  double omega_tilde = 0;
  RadialField y1;
  RadialField y2;
  double m_norm = 0;          // Y_- = m (y1, -y2), chosen so that B(Y_+, Y_-) = -1
  // |M v - omega_t v| / (omega_t |v|) for v = (y1, y2) and M (y1, y2) = (-L2 y2, L y1),
  // cell-volume weighted.
  double residual = 0;
  double consistency = 0;     // |y2 - L y1 / omega_t| / |y2|
  double B_plus_minus = 0;
  double B_plus_plus = 0;
  double B_minus_minus = 0;
  std::size_t iterations = 0;
};

// B(g, h) for g = (g1, g2), h = (h1, h2).
double nls_bilinear(const RadialField& W, const RadialField& g1, const RadialField& g2,
                    const RadialField& h1, const RadialField& h2);

NlsEigenPair nls_eigen(const GridPtr& grid, const RadialField& W);

struct NlsKernelResiduals {
  double scaling = 0;  // |L W0|_2 with L the wave-type operator (first row of the matrix operator)
  double phase = 0;    // |L2 W|_2
};

NlsKernelResiduals nls_kernel_residuals(const RadialField& W, const RadialField& W0);

}  // namespace critwave
