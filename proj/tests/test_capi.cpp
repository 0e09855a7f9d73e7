#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "critwave/critwave.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  cw_string_free(s);
  return out;
}

const char* kSmall =
    "r_max = 60\n"
    "m = 2048\n"
    "amplitudes = 1e-2, 3e-3, 1e-3, 3e-4\n"
    "etas = 0.05, 0.1\n"
    "coercivity_samples = 100\n";

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(cw_version()) > 0);
  double w = 0;
  CHECK(cw_ground_state(3, 0.0, &w) == CW_OK);
  CHECK(w == 1.0);
  CHECK(std::string(cw_last_error()).empty());
  CHECK(cw_ground_state(2, 1.0, &w) == CW_ERR_CONFIG);
  CHECK(std::string(cw_last_error()).find("dimension") != std::string::npos);
  CHECK(cw_ground_state(3, 1.0, nullptr) == CW_ERR_CONFIG);
  cw_string_free(nullptr);
}

TEST_CASE("grid handle") {
  cw_grid* g = nullptr;
  REQUIRE(cw_grid_create(3, 15.0, 2048, 3.0, &g) == CW_OK);
  size_t n = 0;
  REQUIRE(cw_grid_size(g, &n) == CW_OK);
  CHECK(n == 2048);
  std::vector<double> r(n), f(n);
  CHECK(cw_grid_nodes(g, r.data(), n - 1) == CW_ERR_CONFIG);
  REQUIRE(cw_grid_nodes(g, r.data(), n) == CW_OK);
  CHECK(r.front() == 0.0);
  CHECK(r.back() == doctest::Approx(15.0));
  for (size_t i = 0; i < n; ++i) f[i] = std::exp(-r[i] * r[i]);
  double I = 0;
  REQUIRE(cw_grid_integrate(g, f.data(), n, &I) == CW_OK);
  CHECK(I == doctest::Approx(std::pow(M_PI, 1.5)).epsilon(1e-10));
  CHECK(cw_grid_integrate(g, f.data(), n - 1, &I) == CW_ERR_CONFIG);
  cw_grid_destroy(g);

  cw_grid* bad = reinterpret_cast<cw_grid*>(1);
  CHECK(cw_grid_create(3, -1.0, 2048, 3.0, &bad) == CW_ERR_CONFIG);
  CHECK(bad == nullptr);
  cw_grid_destroy(nullptr);
}

TEST_CASE("config handle") {
  cw_config* c = nullptr;
  CHECK(cw_config_parse("nope = 1\n", &c) == CW_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(cw_config_load("/nonexistent/x.conf", &c) == CW_ERR_IO);
  REQUIRE(cw_config_parse(kSmall, &c) == CW_OK);
  char* text = nullptr;
  REQUIRE(cw_config_text(c, &text) == CW_OK);
  auto t = take(text);
  CHECK(t.find("r_max = 60") != std::string::npos);
  CHECK(cw_config_set_out_dir(c, "") == CW_ERR_CONFIG);
  CHECK(cw_config_set_out_dir(c, "somewhere") == CW_OK);
  char* dir = nullptr;
  REQUIRE(cw_config_out_dir(c, &dir) == CW_OK);
  CHECK(take(dir) == "somewhere");
  cw_config_destroy(c);

  REQUIRE(cw_config_default(&c) == CW_OK);
  cw_config_destroy(c);
}

TEST_CASE("constants JSON") {
  char* out = nullptr;
  REQUIRE(cw_constants_json(3, 120.0, 1024, 6.0, &out) == CW_OK);
  auto s = take(out);
  CHECK(s.find("\"grad_W_sq\"") != std::string::npos);
  CHECK(s.find("\"snorm_pow_factorial_formula\"") != std::string::npos);
  CHECK(cw_constants_json(3, 120.0, 10, 6.0, &out) == CW_ERR_CONFIG);
}

TEST_CASE("fit from garbage is an I/O error") {
  char* out = nullptr;
  CHECK(cw_fit_summary("{ nope", &out) == CW_ERR_IO);
  CHECK(cw_fit_summary_file("/nonexistent/summary.json", &out) == CW_ERR_IO);
}

TEST_CASE("small sweep through the C interface") {
  cw_config* c = nullptr;
  REQUIRE(cw_config_parse(kSmall, &c) == CW_OK);
  cw_sweep* s = nullptr;
  REQUIRE(cw_sweep_run(c, &s) == CW_OK);
  size_t nrec = 0, nfit = 0;
  CHECK(cw_sweep_record_count(s, &nrec) == CW_OK);
  CHECK(cw_sweep_fit_count(s, &nfit) == CW_OK);
  CHECK(nrec == 4);
  REQUIRE(nfit == 2);
  cw_law_fit f{};
  REQUIRE(cw_sweep_fit(s, 1, &f) == CW_OK);
  CHECK(f.eta == 0.1);
  CHECK(f.points == 4);
  CHECK(std::abs(f.slope_T / f.predicted_T - 1) < 0.05);
  CHECK(f.r_squared_T > 0.99);
  CHECK(cw_sweep_fit(s, 2, &f) == CW_ERR_CONFIG);

  char* summary = nullptr;
  REQUIRE(cw_sweep_summary_json(s, &summary) == CW_OK);
  auto sum = take(summary);
  char* refit = nullptr;
  REQUIRE(cw_fit_summary(sum.c_str(), &refit) == CW_OK);
  auto rf = take(refit);
  // the re-fit reproduces the embedded fits block
  auto js = nlohmann::json::parse(sum);
  CHECK(nlohmann::json::parse(rf) == js.at("fits"));
  CHECK(js.at("records").size() == 4);

  char* md = nullptr;
  REQUIRE(cw_sweep_report_markdown(s, &md) == CW_OK);
  CHECK(take(md).find("slope_T") != std::string::npos);
  cw_sweep_destroy(s);
  cw_config_destroy(c);
}
