#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "errors.hpp"
#include "radial_core.hpp"

using namespace critwave;

namespace {

// int_0^inf r^k e^{-c r^2} dr
double gauss_moment(double k, double c) { return std::tgamma((k + 1) / 2) / (2 * std::pow(c, (k + 1) / 2)); }

double max_interior_error(const RadialField& got, const std::function<double(double)>& exact, double r_stop) {
  auto r = got.grid().nodes();
  double err = 0;
  for (std::size_t i = 0; i < got.size(); ++i)
    if (r[i] < r_stop) err = std::max(err, std::abs(got[i] - exact(r[i])));
  return err;
}

}  // namespace

TEST_CASE("sphere areas") {
  const double pi = std::numbers::pi;
  CHECK(sphere_area(3) == doctest::Approx(4 * pi).epsilon(1e-15));
  CHECK(sphere_area(4) == doctest::Approx(2 * pi * pi).epsilon(1e-15));
  CHECK(sphere_area(5) == doctest::Approx(8 * pi * pi / 3).epsilon(1e-15));
}

TEST_CASE("grid layout") {
  auto g = make_grid(3, 50.0, 1024, 5.0);
  auto r = g->nodes();
  REQUIRE(g->size() == 1024);
  CHECK(r.front() == 0.0);
  CHECK(r.back() == doctest::Approx(50.0).epsilon(1e-14));
  for (std::size_t i = 1; i < r.size(); ++i) REQUIRE(r[i] > r[i - 1]);
  CHECK(g->min_spacing() == doctest::Approx(r[1]));
  // clustering at the origin
  CHECK(r[1] - r[0] < (r[r.size() - 1] - r[r.size() - 2]) / 10);
}

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS_AS(make_grid(2, 10, 256, 4), ConfigError);
  CHECK_THROWS_AS(make_grid(6, 10, 256, 4), ConfigError);
  CHECK_THROWS_AS(make_grid(3, -1, 256, 4), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 10, 8, 4), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 10, 256, 0), ConfigError);
}

TEST_CASE("Gaussian integrals in N = 3, 4, 5") {
  for (int dim : {3, 4, 5}) {
    CAPTURE(dim);
    auto g = make_grid(dim, 15.0, 2048, 3.0);
    auto f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
    // int_{R^N} e^{-r^2} = pi^{N/2}
    CHECK(integrate(f, 1.0) == doctest::Approx(std::pow(std::numbers::pi, dim / 2.0)).epsilon(1e-11));
    // int e^{-3 r^2} = (pi/3)^{N/2}
    CHECK(integrate(f, 3.0) == doctest::Approx(std::pow(std::numbers::pi / 3, dim / 2.0)).epsilon(1e-9));
    // |grad e^{-r^2}|^2 = 4 r^2 e^{-2r^2}
    const double grad_exact = sphere_area(dim) * 4 * gauss_moment(dim + 1, 2.0);
    CHECK(grad_norm_sq(f) == doctest::Approx(grad_exact).epsilon(1e-8));
    CHECK(l2_norm(f) == doctest::Approx(std::sqrt(std::pow(std::numbers::pi / 2, dim / 2.0))).epsilon(1e-11));
  }
}

TEST_CASE("non-integer powers use |f|") {
  auto g = make_grid(3, 15.0, 2048, 3.0);
  auto f = RadialField::sample(g, [](double r) { return -std::exp(-r * r); });
  CHECK(integrate(f, 2.5) == doctest::Approx(std::pow(std::numbers::pi / 2.5, 1.5)).epsilon(1e-10));
  CHECK_THROWS_AS(integrate(f, 0.5), ConfigError);
}

TEST_CASE("Laplacian of r^2 converges to 2N, including the origin") {
  // r^2 is not polynomial in the mapped coordinate, so only the rate is exact.
  for (int dim : {3, 4, 5}) {
    CAPTURE(dim);
    for (auto order : {StencilOrder::second, StencilOrder::fourth}) {
      double err[2], origin[2];
      int k = 0;
      for (std::size_t m : {512, 1024}) {
        auto g = make_grid(dim, 10.0, m, 3.0);
        auto lap = radial_laplacian(RadialField::sample(g, [](double r) { return r * r; }), order);
        err[k] = max_interior_error(lap, [dim](double) { return 2.0 * dim; }, 9.0);
        origin[k] = std::abs(lap[0] - 2.0 * dim);
        ++k;
      }
      const double p = order == StencilOrder::second ? 1.9 : 3.0;
      CHECK(err[1] < 1e-3);
      CHECK(std::log2(err[0] / err[1]) > p);
      CHECK(std::log2(origin[0] / origin[1]) > p);
    }
  }
}

TEST_CASE("derivative and Laplacian convergence orders") {
  auto exact_d = [](double r) { return -2 * r * std::exp(-r * r); };
  // Lap e^{-r^2} = (4 r^2 - 2N) e^{-r^2}, N = 3
  auto exact_lap = [](double r) { return (4 * r * r - 6) * std::exp(-r * r); };
  double e_d[2], e_l2[2], e_l4[2];
  int k = 0;
  for (std::size_t m : {256, 512}) {
    auto g = make_grid(3, 8.0, m, 2.0);
    auto f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
    e_d[k] = max_interior_error(radial_derivative(f), exact_d, 7.0);
    e_l2[k] = max_interior_error(radial_laplacian(f, StencilOrder::second), exact_lap, 7.0);
    e_l4[k] = max_interior_error(radial_laplacian(f, StencilOrder::fourth), exact_lap, 7.0);
    ++k;
  }
  CHECK(std::log2(e_d[0] / e_d[1]) > 3.5);
  CHECK(std::log2(e_l2[0] / e_l2[1]) > 1.8);
  CHECK(std::log2(e_l4[0] / e_l4[1]) > 3.5);
}

TEST_CASE("field arithmetic") {
  auto g = make_grid(3, 10.0, 128, 2.0);
  auto a = RadialField::sample(g, [](double r) { return r; });
  auto b = RadialField::sample(g, [](double r) { return 1 + r; });
  auto c = a + b;
  auto d = 2.0 * a - b;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double r = g->nodes()[i];
    REQUIRE(c[i] == doctest::Approx(1 + 2 * r));
    REQUIRE(d[i] == doctest::Approx(r - 1));
  }
  c.axpy(-1.0, b);
  CHECK(c[5] == doctest::Approx(a[5]));
  CHECK(a.all_finite());
  a[3] = std::nan("");
  CHECK_FALSE(a.all_finite());

  auto other = make_grid(3, 10.0, 128, 2.0);
  auto e = RadialField::sample(other, [](double r) { return r; });
  CHECK_THROWS_AS(require_same_grid(b, e), ConfigError);
  CHECK_THROWS_AS(b + e, ConfigError);
  CHECK_THROWS_AS(RadialField(g, std::vector<double>(3, 0.0)), ConfigError);
}

TEST_CASE("integer power helper") {
  CHECK(int_pow(2.0, 10) == 1024.0);
  CHECK(int_pow(-1.5, 3) == doctest::Approx(-3.375));
  CHECK(int_pow(7.0, 0) == 1.0);
}
