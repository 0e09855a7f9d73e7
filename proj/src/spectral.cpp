#include "spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <cstdio>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

#include "errors.hpp"

namespace critwave {

namespace {

// Interior values (all but the boundary node) of a field.
std::vector<double> interior(const RadialField& f) {
  auto v = f.values();
  return {v.begin(), v.end() - 1};
}

// Field from interior values; the boundary value continues the geometric
// decay of the last two interior values.
RadialField extend_decaying(const GridPtr& grid, std::span<const double> inner) {
  std::vector<double> v(inner.begin(), inner.end());
  const std::size_t n = v.size();
  double edge = 0.0;
  if (n >= 2 && v[n - 2] != 0.0 && v[n - 1] * v[n - 2] > 0.0) edge = v[n - 1] * (v[n - 1] / v[n - 2]);
  v.push_back(edge);
  return RadialField(grid, std::move(v));
}

// Field from interior values with a zero boundary value.
RadialField extend_zero(const GridPtr& grid, std::span<const double> inner) {
  std::vector<double> v(inner.begin(), inner.end());
  v.push_back(0.0);
  return RadialField(grid, std::move(v));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1) from 53 random bits.
double unit_uniform(std::uint64_t& state) {
  state = splitmix64(state);
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

using SparseMat = Eigen::SparseMatrix<double>;

// M^{-1} K + diag(potential) on the unknowns, zero Dirichlet boundary.
SparseMat fv_operator(const RadialFiniteVolume& fv, std::span<const double> potential) {
  const std::size_t n = fv.unknowns();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(3 * n);
  std::vector<double> e(n, 0.0);
  // Recover the flux coefficients column by column through the operator.
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const std::size_t lo = j == 0 ? 0 : j - 1;
    const std::size_t hi = std::min(n - 1, j + 1);
    const auto col = fv.neg_laplacian_dirichlet(e);
    for (std::size_t i = lo; i <= hi; ++i) {
      double v = col[i];
      if (i == j) v += potential[i];
      if (v != 0.0) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    }
    e[j] = 0.0;
  }
  SparseMat m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}


}  // namespace

// ---------------------------------------------------------------------------

std::size_t SymmetricTridiagonal::count_below(double x) const {
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
    q = (diag[i] - x) - (i == 0 ? 0.0 : b2 / q);
    if (q == 0.0) q = -std::numeric_limits<double>::epsilon() * (std::abs(x) + 1.0);
    if (q < 0.0) ++count;
  }
  return count;
}

double SymmetricTridiagonal::eigenvalue(std::size_t k, double rel_tol) const {
  if (k >= size()) throw ConfigError("eigenvalue index out of range");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < size(); ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < size() ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(mid) > k) hi = mid;
    else lo = mid;
    if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> SymmetricTridiagonal::solve_shifted(double shift, std::span<const double> rhs) const {
  const std::size_t n = size();
  std::vector<double> c(n), d(n), x(n);
  double denom = diag[0] - shift;
  c[0] = n > 1 ? off[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = (diag[i] - shift) - off[i - 1] * c[i - 1];
    if (denom == 0.0) denom = std::numeric_limits<double>::min();
    c[i] = i + 1 < n ? off[i] / denom : 0.0;
    d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

// ---------------------------------------------------------------------------

RadialFiniteVolume::RadialFiniteVolume(const RadialGrid& grid) {
  const std::size_t m = grid.size();
  const std::size_t n = m - 1;
  const int dim = grid.dim();
  auto r = grid.nodes();
  const double scale = grid.r_max() / std::sinh(grid.stretch());
  std::vector<double> mid(n);
  for (std::size_t i = 0; i < n; ++i)
    mid[i] = scale * std::sinh(grid.stretch() * (i + 0.5) * grid.step());
  volume_.resize(n);
  flux_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? 0.0 : mid[i - 1];
    volume_[i] = (std::pow(mid[i], dim) - std::pow(left, dim)) / dim;
    flux_[i] = std::pow(mid[i], dim - 1) / (r[i + 1] - r[i]);
  }
}

std::vector<double> RadialFiniteVolume::neg_laplacian(std::span<const double> f) const {
  const std::size_t n = unknowns();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = flux_[i] * (f[i] - f[i + 1]);
    if (i > 0) acc += flux_[i - 1] * (f[i] - f[i - 1]);
    out[i] = acc / volume_[i];
  }
  return out;
}

std::vector<double> RadialFiniteVolume::neg_laplacian_dirichlet(std::span<const double> f) const {
  std::vector<double> ext(f.begin(), f.end());
  ext.push_back(0.0);
  return neg_laplacian(ext);
}

SymmetricTridiagonal RadialFiniteVolume::symmetric_operator(std::span<const double> potential) const {
  const std::size_t n = unknowns();
  SymmetricTridiagonal t;
  t.diag.resize(n);
  t.off.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    t.diag[i] = (flux_[i] + (i > 0 ? flux_[i - 1] : 0.0)) / volume_[i] + potential[i];
    if (i + 1 < n) t.off[i] = -flux_[i] / std::sqrt(volume_[i] * volume_[i + 1]);
  }
  return t;
}

// ---------------------------------------------------------------------------

std::string to_string(EigenMethod m) {
  return m == EigenMethod::grid_eigensolve ? "grid-eigensolve" : "ode-shooting";
}

RadialField linearized_potential(const RadialField& W, double coefficient) {
  const auto ex = CriticalExponents::for_dim(W.grid().dim());
  RadialField v(W.grid_ptr());
  for (std::size_t i = 0; i < W.size(); ++i) v[i] = -coefficient * std::pow(std::abs(W[i]), ex.nonlinearity);
  return v;
}

double eigen_residual(const RadialField& W, const RadialField& Y, double omega) {
  const auto ex = CriticalExponents::for_dim(W.grid().dim());
  const RadialFiniteVolume fv(W.grid());
  const RadialField pot = linearized_potential(W, ex.potential);
  auto lap = fv.neg_laplacian(Y.values());
  for (std::size_t i = 0; i < lap.size(); ++i) lap[i] += (pot[i] + omega * omega) * Y[i];
  const RadialField res = extend_zero(W.grid_ptr(), lap);
  return l2_norm(res) / (omega * omega * l2_norm(Y));
}

double eigen_residual_smooth(const RadialField& W, const RadialField& Y, double omega) {
  const auto ex = CriticalExponents::for_dim(W.grid().dim());
  const RadialField pot = linearized_potential(W, ex.potential);
  RadialField res = radial_laplacian(Y, StencilOrder::fourth);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = -res[i] + (pot[i] + omega * omega) * Y[i];
  res[res.size() - 1] = 0.0;
  return l2_norm(res) / (omega * omega * l2_norm(Y));
}

EigenPair ground_eigen_grid(const GridPtr& grid, const RadialField& W) {
  const auto ex = CriticalExponents::for_dim(grid->dim());
  const RadialFiniteVolume fv(*grid);
  const RadialField pot = linearized_potential(W, ex.potential);
  const auto inner_pot = interior(pot);
  const SymmetricTridiagonal op = fv.symmetric_operator(inner_pot);

  EigenPair out;
  out.method = EigenMethod::grid_eigensolve;
  out.negative_count = op.count_below(0.0);
  if (out.negative_count == 0)
    throw ConfigError("ground_eigen_grid: lowest eigenvalue is nonnegative; grid too small or too coarse");
  const double lambda0 = op.eigenvalue(0);
  out.second_eigenvalue = op.eigenvalue(1);
  out.omega = std::sqrt(-lambda0);
  if (out.omega * grid->r_max() < 30.0)
    throw ConfigError("ground_eigen_grid: r_max too small for the eigenfunction decay");

  // Inverse iteration just below the bisected eigenvalue.
  const double shift = lambda0 - 1e-9 * std::abs(lambda0);
  const std::size_t n = op.size();
  std::vector<double> z(n, 1.0);
  bool converged = false;
  for (std::size_t it = 1; it <= 100; ++it) {
    auto next = op.solve_shifted(shift, z);
    double norm = 0.0;
    for (double v : next) norm += v * v;
    norm = std::sqrt(norm);
    if (next[0] < 0) norm = -norm;
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= norm;
      diff = std::max(diff, std::abs(next[i] - z[i]));
    }
    z = std::move(next);
    out.iterations = it;
    if (diff < 1e-14) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("ground_eigen_grid: inverse iteration did not converge after " +
                         std::to_string(out.iterations) + " iterations");

  auto vol = fv.volumes();
  for (std::size_t i = 0; i < n; ++i) z[i] /= std::sqrt(vol[i]);
  RadialField Y = extend_decaying(grid, z);
  Y *= 1.0 / l2_norm(Y);
  out.Y = std::move(Y);
  out.residual = eigen_residual(W, out.Y, out.omega);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using ShootState = std::array<double, 2>;

struct RadialEigenOde {
  int dim;
  double coefficient;
  double exponent;
  double omega2;
  void operator()(const ShootState& x, ShootState& dxdr, double r) const {
    const double pot = coefficient * std::pow(ground_state_value(dim, r), exponent);
    dxdr[0] = x[1];
    dxdr[1] = -(dim - 1) / r * x[1] - (pot - omega2) * x[0];
  }
};

// Regular solution Y(0) = 1, Y'(0) = 0 started from its Taylor expansion.
ShootState regular_start(int dim, double coefficient, double omega, double r0) {
  const double a2 = (omega * omega - coefficient) / (2.0 * dim);
  return {1.0 + a2 * r0 * r0, 2.0 * a2 * r0};
}

constexpr double kShootStart = 1e-5;

}  // namespace

int shooting_sign(int dim, double omega, double r_limit, const ShootingOptions& opts) {
  namespace odeint = boost::numeric::odeint;
  const auto ex = CriticalExponents::for_dim(dim);
  const RadialEigenOde ode{dim, ex.potential, ex.nonlinearity, omega * omega};
  ShootState x = regular_start(dim, ex.potential, omega, kShootStart);
  const double r_match = std::min(r_limit, 40.0 / omega);
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<ShootState>>(opts.abs_tol, opts.rel_tol);
  odeint::integrate_adaptive(stepper, ode, x, kShootStart, r_match, 1e-4);
  if (!std::isfinite(x[0])) throw NumericalError("shooting: step-size failure, non-finite solution");
  return x[0] > 0 ? 1 : -1;
}

EigenPair ground_eigen_shoot(const GridPtr& grid, std::pair<double, double> bracket,
                             const ShootingOptions& opts) {
  namespace odeint = boost::numeric::odeint;
  const int dim = grid->dim();
  const auto ex = CriticalExponents::for_dim(dim);
  double lo = bracket.first;
  double hi = bracket.second;
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("shooting: bracket must satisfy 0 < lo < hi");
  const double r_limit = grid->r_max();
  if (shooting_sign(dim, lo, r_limit, opts) == shooting_sign(dim, hi, r_limit, opts))
    throw NumericalError("shooting: no sign change in bracket [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  while (hi - lo > opts.width) {
    const double mid = 0.5 * (lo + hi);
    if (shooting_sign(dim, mid, r_limit, opts) < 0) lo = mid;
    else hi = mid;
  }
  const double omega = 0.5 * (lo + hi);

  // Sample the regular solution on the grid nodes up to where the growing
  // mode starts to show, then continue with the free decay.
  const RadialEigenOde ode{dim, ex.potential, ex.nonlinearity, omega * omega};
  auto r = grid->nodes();
  const double r_match = std::min(r_limit, 40.0 / omega);
  std::vector<double> y(grid->size(), 0.0), dy(grid->size(), 0.0);
  y[0] = 1.0;
  std::size_t filled = 1;
  {
    ShootState x = regular_start(dim, ex.potential, omega, kShootStart);
    double r_prev = kShootStart;
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<ShootState>>(opts.abs_tol, opts.rel_tol);
    for (std::size_t i = 1; i < r.size() && r[i] <= r_match; ++i) {
      if (r[i] > r_prev) odeint::integrate_adaptive(stepper, ode, x, r_prev, r[i], 1e-4);
      r_prev = std::max(r_prev, r[i]);
      y[i] = x[0];
      dy[i] = x[1];
      filled = i + 1;
    }
  }
  std::size_t turn = filled;
  for (std::size_t i = 1; i < filled; ++i) {
    if (y[i] <= 0.0 || dy[i] >= 0.0) {
      turn = i;
      break;
    }
  }
  const double r_cut_target = r[turn - 1] - 8.0 / omega;
  std::size_t cut = 1;
  while (cut + 1 < turn && r[cut + 1] <= r_cut_target) ++cut;
  // Outside the cut, integrate inward from r_max starting on the decaying
  // asymptotics; inward the decaying branch dominates, so this is stable.
  {
    const std::size_t last = r.size() - 1;
    std::vector<double> back(r.size(), 0.0);
    ShootState x{1.0, -(omega + (dim - 1) / (2.0 * r[last])) * 1.0};
    back[last] = 1.0;
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<ShootState>>(opts.abs_tol, opts.rel_tol);
    for (std::size_t i = last; i-- > cut;) {
      odeint::integrate_adaptive(stepper, ode, x, r[i + 1], r[i], -1e-3);
      back[i] = x[0];
    }
    if (!std::isfinite(back[cut]) || back[cut] <= 0.0)
      throw NumericalError("shooting: inward tail integration failed");
    const double scale = y[cut] / back[cut];
    for (std::size_t i = cut + 1; i < y.size(); ++i) y[i] = scale * back[i];
  }

  EigenPair out;
  out.method = EigenMethod::ode_shooting;
  out.omega = omega;
  out.Y = RadialField(grid, std::move(y));
  out.Y *= 1.0 / l2_norm(out.Y);
  out.residual = eigen_residual_smooth(eval_W(grid), out.Y, omega);
  return out;
}

// ---------------------------------------------------------------------------

QuadraticForm::QuadraticForm(const RadialField& W) : weight_(W.grid_ptr()) {
  const auto ex = CriticalExponents::for_dim(W.grid().dim());
  coefficient_ = ex.potential;
  for (std::size_t i = 0; i < W.size(); ++i) weight_[i] = std::pow(std::abs(W[i]), ex.nonlinearity);
}

double QuadraticForm::operator()(const RadialField& h) const {
  return 0.5 * grad_norm_sq(h) - 0.5 * coefficient_ * weighted_dot(h, h, weight_);
}

double q_form(const RadialField& h, const RadialField& W) { return QuadraticForm(W)(h); }

OrthogonalComplement::OrthogonalComplement(RadialField Y, RadialField W0)
    : Y_(std::move(Y)), W0_(std::move(W0)) {
  require_same_grid(Y_, W0_);
  yy_ = l2_dot(Y_, Y_);
  yw_ = l2_dot(Y_, W0_);
  wy_grad_ = h1_dot(W0_, Y_);
  ww_grad_ = h1_dot(W0_, W0_);
  det_ = yy_ * ww_grad_ - yw_ * wy_grad_;
  if (!(std::abs(det_) > 1e-12 * yy_ * ww_grad_))
    throw NumericalError("projection: Y and W0 are degenerate on this grid");
}

OrthogonalComplement::Coefficients OrthogonalComplement::coefficients(const RadialField& h) const {
  const double b1 = l2_dot(Y_, h);
  const double b2 = h1_dot(W0_, h);
  return {(b1 * ww_grad_ - yw_ * b2) / det_, (yy_ * b2 - wy_grad_ * b1) / det_};
}

RadialField OrthogonalComplement::project(const RadialField& h) const {
  const auto c = coefficients(h);
  RadialField out = h;
  out.axpy(-c.beta, Y_);
  out.axpy(-c.gamma0, W0_);
  return out;
}

RadialField project_G_perp(const RadialField& h, const RadialField& Y, const RadialField& W0) {
  return OrthogonalComplement(Y, W0).project(h);
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL));
}

CoercivityResult coercivity_probe(const RadialField& W, const RadialField& Y, const RadialField& W0,
                                  std::size_t samples, std::uint64_t seed) {
  if (samples < 100) throw ConfigError("coercivity_probe: need at least 100 samples");
  const QuadraticForm q(W);
  const OrthogonalComplement proj(Y, W0);
  const double half = 0.5 * W.grid().r_max();
  const double w_min = 0.1;
  CoercivityResult out;
  out.seed = seed;
  out.samples = samples;
  out.c_Q_estimate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    std::uint64_t state = sample_seed(seed, i);
    const double center = half * unit_uniform(state);
    const double width = w_min * std::pow(half / w_min, unit_uniform(state));
    const RadialField h = RadialField::sample(W.grid_ptr(), [&](double r) {
      const double z = (r - center) / width;
      return std::exp(-z * z);
    });
    const RadialField g = proj.project(h);
    const double grad = grad_norm_sq(g);
    if (!(grad > 1e-20 * grad_norm_sq(h))) {
      ++out.excluded;
      continue;
    }
    const double ratio = q(g) / grad;
    if (ratio < out.c_Q_estimate) {
      out.c_Q_estimate = ratio;
      out.worst_center = center;
      out.worst_width = width;
    }
  }
  if (!(out.c_Q_estimate > 0.0))
    throw NumericalError("coercivity_probe: nonpositive minimum " + std::to_string(out.c_Q_estimate) +
                         "; spectral resolution failure (grid or projector defect)");
  return out;
}

// ---------------------------------------------------------------------------

double nls_bilinear(const RadialField& W, const RadialField& g1, const RadialField& g2,
                    const RadialField& h1, const RadialField& h2) {
  const QuadraticForm q(W);
  const RadialField& w = q.weight();
  return 0.5 * h1_dot(g1, h1) - 0.5 * q.coefficient() * weighted_dot(g1, h1, w) + 0.5 * h1_dot(g2, h2) -
         0.5 * weighted_dot(g2, h2, w);
}

NlsEigenPair nls_eigen(const GridPtr& grid, const RadialField& W) {
  const auto ex = CriticalExponents::for_dim(grid->dim());
  const RadialFiniteVolume fv(*grid);
  const std::size_t n = fv.unknowns();
  const int ni = static_cast<int>(n);
  const auto pot1 = interior(linearized_potential(W, ex.potential));
  const auto pot2 = interior(linearized_potential(W, 1.0));
  const SparseMat L1 = fv_operator(fv, pot1);
  const SparseMat L2 = fv_operator(fv, pot2);

  // First-order form M (y1, y2) = (-L2 y2, L1 y1): its real eigenvalues are
  // +-omega_t, the rest lie on the imaginary axis. Working with M instead of
  // the fourth-order product keeps the conditioning at the level of -Lap.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * (L1.nonZeros() + L2.nonZeros()) + 2 * n);
  for (int k = 0; k < L2.outerSize(); ++k)
    for (SparseMat::InnerIterator it(L2, k); it; ++it) trip.emplace_back(it.row(), ni + it.col(), -it.value());
  for (int k = 0; k < L1.outerSize(); ++k)
    for (SparseMat::InnerIterator it(L1, k); it; ++it) trip.emplace_back(ni + it.row(), it.col(), it.value());
  SparseMat M(2 * ni, 2 * ni);
  M.setFromTriplets(trip.begin(), trip.end());
  SparseMat I(2 * ni, 2 * ni);
  I.setIdentity();

  Eigen::VectorXd vol(2 * ni);
  for (std::size_t i = 0; i < n; ++i) vol[static_cast<int>(i)] = vol[ni + static_cast<int>(i)] = fv.volumes()[i];
  auto vol_norm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.cwiseAbs2().dot(vol)); };

  // Any real shift above omega_t / 2 is closer to omega_t than to the rest.
  double shift = 10.0;
  Eigen::SparseLU<SparseMat> lu;
  auto factor = [&](double s) {
    lu.compute(M - s * I);
    if (lu.info() != Eigen::Success) throw NumericalError("nls_eigen: factorization failed");
  };
  factor(shift);

  Eigen::VectorXd x(2 * ni);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid->nodes()[i];
    x[static_cast<int>(i)] = std::exp(-r);
    x[ni + static_cast<int>(i)] = std::exp(-r);
  }
  x /= vol_norm(x);
  double lambda_prev = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  int refinements = 0;
  bool converged = false;
  NlsEigenPair out;
  for (std::size_t it = 1; it <= 1000; ++it) {
    Eigen::VectorXd y = lu.solve(x);
    const double lambda = shift + x.dot(x.cwiseProduct(vol)) / y.dot(x.cwiseProduct(vol));
    y /= vol_norm(y);
    if (y[0] < 0) y = -y;
    x = y;
    out.iterations = it;
    const double change = std::abs(lambda - lambda_prev) / std::abs(lambda);
    lambda_prev = lambda;
    if (refinements > 0) {
      const Eigen::VectorXd Mx = M * x;
      const double rq = x.dot(Mx.cwiseProduct(vol));
      const double res = vol_norm(Mx - rq * x) / std::abs(rq);
      if (res < 1e-12) {
        converged = true;
        break;
      }
      if (res < 0.5 * best) {
        best = res;
        stalled = 0;
      } else if (++stalled >= 5) {
        converged = best < 1e-8;
        break;
      }
    }
    // Move the shift toward the estimate once it has roughly settled.
    if (refinements < 6 && lambda > 0.0 && change < std::pow(10.0, -2 - refinements)) {
      shift = lambda * (1.0 + 1e-9);
      factor(shift);
      ++refinements;
    }
  }
  const Eigen::VectorXd Mx = M * x;
  const double mu = x.dot(Mx.cwiseProduct(vol));
  if (!converged || !(mu > 0.0))
    throw NumericalError("nls_eigen: no real positive eigenvalue found (estimate " + std::to_string(mu) +
                         ", iterations " + std::to_string(out.iterations) + ")");
  out.omega_tilde = mu;

  out.residual = vol_norm(Mx - mu * x) / (mu * vol_norm(x));
  const Eigen::VectorXd v1 = x.head(ni);
  const Eigen::VectorXd v2 = x.tail(ni);
  RadialField y1 = extend_decaying(grid, std::span<const double>(v1.data(), n));
  RadialField y2 = extend_decaying(grid, std::span<const double>(v2.data(), n));
  const double scale = 1.0 / l2_norm(y1);
  y1 *= scale;
  y2 *= scale;
  auto l1y1 = fv.neg_laplacian(y1.values());
  std::vector<double> mismatch(n);
  for (std::size_t i = 0; i < n; ++i) mismatch[i] = y2[i] - (l1y1[i] + pot1[i] * y1[i]) / mu;
  out.consistency = l2_norm(extend_zero(grid, mismatch)) / l2_norm(y2);

  const double b_conj = nls_bilinear(W, y1, y2, y1, -1.0 * y2);
  if (b_conj == 0.0) throw NumericalError("nls_eigen: degenerate bilinear normalization");
  out.m_norm = -1.0 / b_conj;
  const RadialField m1 = out.m_norm * y1;
  const RadialField m2 = (-out.m_norm) * y2;
  out.B_plus_minus = nls_bilinear(W, y1, y2, m1, m2);
  out.B_plus_plus = nls_bilinear(W, y1, y2, y1, y2);
  out.B_minus_minus = nls_bilinear(W, m1, m2, m1, m2);
  out.y1 = std::move(y1);
  out.y2 = std::move(y2);
  return out;
}

NlsKernelResiduals nls_kernel_residuals(const RadialField& W, const RadialField& W0) {
  require_same_grid(W, W0);
  const auto ex = CriticalExponents::for_dim(W.grid().dim());
  const RadialFiniteVolume fv(W.grid());
  const RadialField pot1 = linearized_potential(W, ex.potential);
  const RadialField pot2 = linearized_potential(W, 1.0);
  auto a = fv.neg_laplacian(W0.values());
  auto b = fv.neg_laplacian(W.values());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] += pot1[i] * W0[i];
    b[i] += pot2[i] * W[i];
  }
  return {l2_norm(extend_zero(W.grid_ptr(), a)), l2_norm(extend_zero(W.grid_ptr(), b))};
}

}  // namespace critwave
