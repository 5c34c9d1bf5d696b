// run.hpp: run configuration, presets, sweep engine, and serialization.
// Everything the command-line tool does is callable from here so tests can
// drive the exact production paths.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heomgp/gp.hpp"
#include "heomgp/heom.hpp"
#include "heomgp/integrate.hpp"
#include "heomgp/model.hpp"
#include "heomgp/oracle.hpp"

namespace heomgp {

struct ConfigError : Error {
  using Error::Error;
};

namespace run {

inline constexpr const char* kToolVersion = "heomgp 1.0.0";
inline constexpr int kSchemaVersion = 1;

enum class Mode { Single, Sweep, ThetaScan, OracleCompare, ConvergenceScan };
enum class Format { Csv, Json };

struct SweepAxis {
  std::string param;  // one of: Omega, Delta, omegaD, gamma0, theta0
  double min = 0.0;
  double max = 0.0;
  int count = 1;
  double value(int i) const {
    return count < 2 ? min : min + (max - min) * i / (count - 1);
  }
};

struct RunConfig {
  Mode mode = Mode::Single;
  ModelParams model;
  std::optional<SweepAxis> axis1;
  std::optional<SweepAxis> axis2;
  std::vector<int> sweep_cycles = {2, 3, 4, 5, 8};
  std::vector<double> theta_list_deg = {23.5, 35, 40, 45, 50, 62, 73, 84.5};
  std::vector<heom::AdoIndex> scan_depths = {{5, 5}, {10, 10}, {15, 15}, {20, 20}, {25, 25}};
  std::string out;  // empty = stdout
  Format format = Format::Csv;
  int workers = 1;
  unsigned seed = 12345;  // gauge self-test phases
  double prominence = 1e-3;
  int pm_n_max = 8;
  int pm_n_max_cap = 64;
  std::string preset;  // provenance only
};

// Exit codes shared by the CLI and the partial-failure reporting.
enum ExitCode {
  kOk = 0,
  kConfigError = 2,
  kDivergence = 3,
  kDegeneracy = 4,
  kNotConverged = 5,
  kPartialSweepFailure = 6,
};

// ----- configuration text ------------------------------------------------
// Flat "key = value" lines; '#' starts a comment except for the "#% " echo
// prefix, which is stripped so any emitted output file doubles as a config.

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
void apply_config_text(RunConfig& cfg, const std::string& text);  // layers keys onto cfg
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);
std::string serialize_config(const RunConfig& cfg);  // full effective state

RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// ----- records -------------------------------------------------------------

struct CycleSummary {
  int cycle = 0;
  double phi_unwrapped = 0.0;
  double phi_mod_2pi = 0.0;
  double phi_unitary = 0.0;
  double ratio = 0.0;
};

struct Diagnostics {
  double max_trace_drift = 0.0;
  double max_herm_defect = 0.0;
  double min_eig = 0.0;
  double max_route_gap = 0.0;
  double gauge_delta = 0.0;       // seeded re-gauging shift of the final phase
  double min_gap = 0.0;
  double min_step_overlap = 1.0;
  bool direct_route_valid = true;
};

struct RunRecord {
  RunConfig cfg;
  integrate::Trajectory traj;
  gp::GpSeries gps;             // may stop early on degeneracy
  size_t gp_valid_samples = 0;  // phi defined for samples [0, gp_valid_samples)
  std::vector<CycleSummary> cycle_summaries;
  Diagnostics diag;
  int status = kOk;
  std::string status_detail;
  double wall_seconds = 0.0;  // never serialized; reproducibility excludes timing
};

struct SweepRow {
  double axis1 = 0.0;
  double axis2 = 0.0;
  int cycles = 0;
  double phi_unwrapped = 0.0;
  double phi_unitary = 0.0;
  double ratio = 0.0;
  int revivals = 0;
  double min_eig = 0.0;
  std::string status = "ok";
};

struct SweepRecord {
  RunConfig cfg;
  std::vector<SweepRow> rows;  // row-major: axis1 outer, axis2 inner, cycles innermost
  int status = kOk;
  double wall_seconds = 0.0;
};

struct ThetaEntry {
  double theta0_deg = 0.0;
  RunRecord record;
  double min_R = 1.0;
  double min_R_short = 1.0;  // first two cycles
};

struct ThetaScanRecord {
  RunConfig cfg;
  std::vector<ThetaEntry> entries;
  int status = kOk;
  double wall_seconds = 0.0;
};

struct OracleCompareRecord {
  RunConfig cfg;
  integrate::Trajectory heom_traj;
  oracle::PseudomodeResult pm;
  std::vector<double> trace_distances;  // per shared sample
  double max_trace_distance = 0.0;
  int status = kOk;
  double wall_seconds = 0.0;
};

struct ConvergenceScanRecord {
  RunConfig cfg;
  heom::ConvergenceReport report;
  int status = kOk;
  double wall_seconds = 0.0;
};

// ----- operations ------------------------------------------------------------

RunRecord run_single(const RunConfig& cfg);
SweepRecord run_sweep(const RunConfig& cfg);
ThetaScanRecord run_theta_scan(const RunConfig& cfg);
OracleCompareRecord run_oracle_compare(const RunConfig& cfg);
ConvergenceScanRecord run_convergence_scan(const RunConfig& cfg);

// ----- output ----------------------------------------------------------------

std::string emit(const RunRecord& rec);
std::string emit(const SweepRecord& rec);
std::string emit(const ThetaScanRecord& rec);
std::string emit(const OracleCompareRecord& rec);
std::string emit(const ConvergenceScanRecord& rec);

// Writes to cfg.out or stdout; verifies writability before use.
void write_output(const std::string& payload, const RunConfig& cfg);
void check_output_writable(const RunConfig& cfg);

}  // namespace run
}  // namespace heomgp
