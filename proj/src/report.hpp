#pragma once

// JSON, CSV and markdown output of the experiment layer.

#include <string>
#include <vector>

#include "experiment.hpp"

namespace critwave {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSummarySchema = "critwave-summary/1";

std::string constants_json(const ConstantsReport& c);
std::string spectral_json(const SpectralReport& s);

// Deterministic: no timestamps, fixed key order, shortest round-trip numbers.
std::string summary_json(const SweepResult& r);

// What the `fit` subcommand needs from a summary file.
struct StoredSweep {
  int dim = 3;
  double omega = 0;
  double snorm_pow = 0;
  std::vector<double> etas;
  std::vector<SweepRecord> records;
};

StoredSweep parse_summary(const std::string& json_text);
std::string fits_json(const std::vector<LawFit>& fits);

std::string trace_csv(const RunTrace& t);
std::string report_markdown(const SweepResult& r);

// Writes summary.json, metadata.json, report.md and traces/run_<k>.csv.
// Throws IoError on failure.
void write_outputs(const SweepResult& r, const std::string& dir);

}  // namespace critwave
