#include "critwave/critwave.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "experiment.hpp"
#include "ground_state.hpp"
#include "radial_core.hpp"
#include "report.hpp"

struct cw_grid {
  critwave::GridPtr grid;
};

struct cw_config {
  critwave::ExperimentConfig cfg;
};

struct cw_sweep {
  critwave::SweepResult result;
};

namespace {

thread_local std::string last_error;

cw_status fail(cw_status s, const char* msg) {
  last_error = msg;
  return s;
}

template <class F>
cw_status guarded(F&& f) noexcept {
  try {
    last_error.clear();
    f();
    return CW_OK;
  } catch (const critwave::ConfigError& e) {
    return fail(CW_ERR_CONFIG, e.what());
  } catch (const critwave::NumericalError& e) {
    return fail(CW_ERR_NUMERICAL, e.what());
  } catch (const critwave::IoError& e) {
    return fail(CW_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CW_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CW_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CW_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) throw critwave::ConfigError(std::string("null argument: ") + what);
}

}  // namespace

extern "C" {

const char* cw_version(void) { return critwave::kVersion; }

const char* cw_last_error(void) { return last_error.c_str(); }

void cw_string_free(char* s) { std::free(s); }

cw_status cw_grid_create(int dim, double r_max, size_t m, double stretch, cw_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto g = critwave::make_grid(dim, r_max, m, stretch);
    *out = new cw_grid{std::move(g)};
  });
}

void cw_grid_destroy(cw_grid* g) { delete g; }

cw_status cw_grid_size(const cw_grid* g, size_t* nodes) {
  return guarded([&] {
    need(g, "grid");
    need(nodes, "nodes");
    *nodes = g->grid->size();
  });
}

cw_status cw_grid_nodes(const cw_grid* g, double* r, size_t n) {
  return guarded([&] {
    need(g, "grid");
    need(r, "r");
    auto nodes = g->grid->nodes();
    if (n < nodes.size()) throw critwave::ConfigError("cw_grid_nodes: buffer too small");
    std::memcpy(r, nodes.data(), nodes.size() * sizeof(double));
  });
}

cw_status cw_grid_integrate(const cw_grid* g, const double* f, size_t n, double* out) {
  return guarded([&] {
    need(g, "grid");
    need(f, "f");
    need(out, "out");
    if (n != g->grid->size()) throw critwave::ConfigError("cw_grid_integrate: length does not match the grid");
    critwave::RadialField field(g->grid, std::vector<double>(f, f + n));
    critwave::RadialField one(g->grid, std::vector<double>(n, 1.0));
    *out = critwave::l2_dot(field, one);
  });
}

cw_status cw_ground_state(int dim, double r, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = critwave::ground_state_value(dim, r);
  });
}

cw_status cw_config_default(cw_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new cw_config{critwave::ExperimentConfig::defaults()};
  });
}

cw_status cw_config_parse(const char* text, cw_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    auto c = critwave::parse_config(text);
    *out = new cw_config{std::move(c)};
  });
}

cw_status cw_config_load(const char* path, cw_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto c = critwave::load_config(path);
    *out = new cw_config{std::move(c)};
  });
}

void cw_config_destroy(cw_config* c) { delete c; }

cw_status cw_config_text(const cw_config* c, char** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    *out = dup(critwave::to_config_text(c->cfg));
  });
}

cw_status cw_config_set_out_dir(cw_config* c, const char* dir) {
  return guarded([&] {
    need(c, "config");
    need(dir, "dir");
    if (!*dir) throw critwave::ConfigError("out_dir is empty");
    c->cfg.out_dir = dir;
  });
}

cw_status cw_config_set_threads(cw_config* c, size_t threads) {
  return guarded([&] {
    need(c, "config");
    c->cfg.threads = threads;
  });
}

cw_status cw_config_out_dir(const cw_config* c, char** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    *out = dup(c->cfg.out_dir);
  });
}

cw_status cw_constants_json(int dim, double r_max, size_t m, double stretch, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(critwave::constants_json(critwave::constants_report(dim, r_max, m, stretch)));
  });
}

cw_status cw_spectrum_json(const cw_config* c, char** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    auto stage = critwave::run_spectral(c->cfg);
    *out = dup(critwave::spectral_json(stage.report));
  });
}

cw_status cw_sweep_run(const cw_config* c, cw_sweep** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    *out = nullptr;
    auto r = critwave::run_sweep(c->cfg);
    *out = new cw_sweep{std::move(r)};
  });
}

void cw_sweep_destroy(cw_sweep* s) { delete s; }

cw_status cw_sweep_summary_json(const cw_sweep* s, char** out) {
  return guarded([&] {
    need(s, "sweep");
    need(out, "out");
    *out = dup(critwave::summary_json(s->result));
  });
}

cw_status cw_sweep_report_markdown(const cw_sweep* s, char** out) {
  return guarded([&] {
    need(s, "sweep");
    need(out, "out");
    *out = dup(critwave::report_markdown(s->result));
  });
}

cw_status cw_sweep_write(const cw_sweep* s, const char* dir) {
  return guarded([&] {
    need(s, "sweep");
    need(dir, "dir");
    critwave::write_outputs(s->result, dir);
  });
}

cw_status cw_sweep_record_count(const cw_sweep* s, size_t* n) {
  return guarded([&] {
    need(s, "sweep");
    need(n, "n");
    *n = s->result.records.size();
  });
}

cw_status cw_sweep_fit_count(const cw_sweep* s, size_t* n) {
  return guarded([&] {
    need(s, "sweep");
    need(n, "n");
    *n = s->result.fits.size();
  });
}

cw_status cw_sweep_fit(const cw_sweep* s, size_t k, cw_law_fit* out) {
  return guarded([&] {
    need(s, "sweep");
    need(out, "out");
    if (k >= s->result.fits.size()) throw critwave::ConfigError("cw_sweep_fit: index out of range");
    const auto& f = s->result.fits[k];
    *out = cw_law_fit{f.eta,         f.T.slope,   f.T.intercept, f.T.r_squared, f.S.slope,
                      f.S.intercept, f.S.r_squared, f.predicted_T, f.predicted_S, f.rel_dev_T,
                      f.rel_dev_S,   f.band_C,    f.band_ok ? 1 : 0, f.T.points};
  });
}

cw_status cw_fit_summary(const char* summary_json, char** out) {
  return guarded([&] {
    need(summary_json, "summary_json");
    need(out, "out");
    auto s = critwave::parse_summary(summary_json);
    auto fits = critwave::fit_log_law(s.records, s.etas, s.dim, s.omega, s.snorm_pow);
    *out = dup(critwave::fits_json(fits));
  });
}

cw_status cw_fit_summary_file(const char* path, char** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw critwave::IoError(std::string("cannot open '") + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw critwave::IoError(std::string("read from '") + path + "' failed");
    auto s = critwave::parse_summary(buf.str());
    auto fits = critwave::fit_log_law(s.records, s.etas, s.dim, s.omega, s.snorm_pow);
    *out = dup(critwave::fits_json(fits));
  });
}

}  // extern "C"
