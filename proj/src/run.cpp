// run.cpp: config plumbing, presets, run drivers, and emitters. Output files
// open with an echoed config ("#% key = value" lines) so any result file can
// be fed back in as a config and reproduce itself byte for byte; nothing
// time- or host-dependent is ever serialized.
#include "heomgp/run.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "heomgp/observables.hpp"

namespace heomgp {
namespace run {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;

std::string fg(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  while (end && (*end == ' ' || *end == '\t')) ++end;
  if (end == s.c_str() || (end && *end) || errno == ERANGE)
    throw ConfigError("bad numeric value for '" + key + "': " + s);
  return v;
}

int parse_int(const std::string& s, const std::string& key) {
  const double v = parse_num(s, key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("value for '" + key + "' must be an integer: " + s);
  return i;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Single: return "single";
    case Mode::Sweep: return "sweep";
    case Mode::ThetaScan: return "theta-scan";
    case Mode::OracleCompare: return "oracle-compare";
    case Mode::ConvergenceScan: return "convergence-scan";
  }
  return "single";
}

Mode mode_from(const std::string& s) {
  if (s == "single") return Mode::Single;
  if (s == "sweep") return Mode::Sweep;
  if (s == "theta-scan") return Mode::ThetaScan;
  if (s == "oracle-compare") return Mode::OracleCompare;
  if (s == "convergence-scan") return Mode::ConvergenceScan;
  throw ConfigError("unknown mode: " + s);
}

std::string format_name(Format f) { return f == Format::Csv ? "csv" : "json"; }

Format format_from(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("unknown format: " + s);
}

std::string policy_name(PeriodPolicy p) {
  return p == PeriodPolicy::Omega ? "omega" : "omega-plus-delta";
}

PeriodPolicy policy_from(const std::string& s) {
  if (s == "omega") return PeriodPolicy::Omega;
  if (s == "omega-plus-delta") return PeriodPolicy::OmegaPlusDelta;
  throw ConfigError("unknown period_policy: " + s);
}

bool is_axis_param(const std::string& name) {
  return name == "Omega" || name == "Delta" || name == "omegaD" ||
         name == "gamma0" || name == "theta0";
}

SweepAxis parse_axis(const std::string& s, const std::string& key) {
  const auto toks = split_ws(s);
  if (toks.size() != 4)
    throw ConfigError("'" + key + "' needs: <param> <min> <max> <count>");
  SweepAxis ax;
  ax.param = toks[0];
  if (!is_axis_param(ax.param))
    throw ConfigError("'" + key + "' parameter must be one of Omega, Delta, omegaD, gamma0, theta0");
  ax.min = parse_num(toks[1], key);
  ax.max = parse_num(toks[2], key);
  ax.count = parse_int(toks[3], key);
  if (ax.count < 1) throw ConfigError("'" + key + "' count must be >= 1");
  return ax;
}

std::string axis_str(const SweepAxis& ax) {
  return ax.param + " " + fg(ax.min) + " " + fg(ax.max) + " " + std::to_string(ax.count);
}

void set_model_param(ModelParams& m, const std::string& name, double v) {
  if (name == "Omega") m.Omega = v;
  else if (name == "Delta") m.Delta = v;
  else if (name == "omegaD") m.omegaD = v;
  else if (name == "gamma0") m.gamma0 = v;
  else if (name == "theta0") m.theta0 = v;
  else throw ConfigError("unknown sweep parameter: " + name);
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "schema_version") {
    if (parse_int(value, key) != kSchemaVersion)
      throw ConfigError("unsupported schema_version: " + value);
  } else if (key == "tool_version") {
    // informational echo; accepted so output files reparse cleanly
  } else if (key == "preset") {
    cfg.preset = value;  // provenance only; never re-applies the preset
  } else if (key == "mode") {
    cfg.mode = mode_from(value);
  } else if (key == "format") {
    cfg.format = format_from(value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "workers") {
    cfg.workers = parse_int(value, key);
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  } else if (key == "seed") {
    const double v = parse_num(value, key);
    if (v < 0 || v != std::floor(v)) throw ConfigError("seed must be a nonnegative integer");
    cfg.seed = static_cast<unsigned>(v);
  } else if (key == "prominence") {
    cfg.prominence = parse_num(value, key);
    if (!(cfg.prominence > 0)) throw ConfigError("prominence must be > 0");
  } else if (key == "pm_n_max") {
    cfg.pm_n_max = parse_int(value, key);
  } else if (key == "pm_n_max_cap") {
    cfg.pm_n_max_cap = parse_int(value, key);
  } else if (key == "Omega" || key == "Delta" || key == "omegaD" || key == "gamma0" ||
             key == "theta0") {
    set_model_param(cfg.model, key, parse_num(value, key));
  } else if (key == "theta0_deg") {
    cfg.model.theta0 = parse_num(value, key) * kPi / 180.0;
  } else if (key == "cycles") {
    cfg.model.cycles = parse_int(value, key);
  } else if (key == "depth1") {
    cfg.model.depth1 = parse_int(value, key);
  } else if (key == "depth2") {
    cfg.model.depth2 = parse_int(value, key);
  } else if (key == "depth") {
    const auto comma = value.find(',');
    if (comma == std::string::npos) throw ConfigError("depth needs the form N1,N2");
    cfg.model.depth1 = parse_int(value.substr(0, comma), key);
    cfg.model.depth2 = parse_int(value.substr(comma + 1), key);
  } else if (key == "dt") {
    cfg.model.dt = parse_num(value, key);
  } else if (key == "samples_per_cycle") {
    cfg.model.samples_per_cycle = parse_int(value, key);
  } else if (key == "period_policy") {
    cfg.model.period_policy = policy_from(value);
  } else if (key == "axis1") {
    cfg.axis1 = parse_axis(value, key);
  } else if (key == "axis2") {
    cfg.axis2 = parse_axis(value, key);
  } else if (key == "sweep_cycles") {
    std::vector<int> ns;
    for (const auto& t : split_ws(value)) {
      const int n = parse_int(t, key);
      if (n < 1) throw ConfigError("sweep_cycles entries must be >= 1");
      ns.push_back(n);
    }
    if (ns.empty()) throw ConfigError("sweep_cycles must not be empty");
    cfg.sweep_cycles = std::move(ns);
  } else if (key == "theta_list_deg") {
    std::vector<double> ds;
    for (const auto& t : split_ws(value)) ds.push_back(parse_num(t, key));
    if (ds.empty()) throw ConfigError("theta_list_deg must not be empty");
    cfg.theta_list_deg = std::move(ds);
  } else if (key == "scan_depths") {
    std::vector<heom::AdoIndex> ds;
    for (const auto& t : split_ws(value)) {
      const auto comma = t.find(',');
      if (comma == std::string::npos)
        throw ConfigError("scan_depths entries need the form N1,N2");
      heom::AdoIndex d;
      d.n1 = parse_int(t.substr(0, comma), key);
      d.n2 = parse_int(t.substr(comma + 1), key);
      ds.push_back(d);
    }
    if (ds.empty()) throw ConfigError("scan_depths must not be empty");
    cfg.scan_depths = std::move(ds);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

namespace {

void apply_json_config(RunConfig& cfg, const ojson& obj) {
  if (!obj.is_object()) throw ConfigError("JSON config must be an object");
  for (const auto& [key, val] : obj.items()) {
    std::string s;
    if (val.is_string()) {
      s = val.get<std::string>();
    } else if (val.is_object()) {
      if (!(key == "axis1" || key == "axis2"))
        throw ConfigError("unexpected object value for key: " + key);
      s = val.at("param").get<std::string>() + " " + val.at("min").dump() + " " +
          val.at("max").dump() + " " + val.at("count").dump();
    } else if (val.is_array()) {
      std::string joined;
      for (const auto& e : val) {
        if (!joined.empty()) joined += ' ';
        if (e.is_array()) {
          if (e.size() != 2) throw ConfigError("depth pairs need two entries: " + key);
          joined += e[0].dump() + "," + e[1].dump();
        } else {
          joined += e.dump();
        }
      }
      s = joined;
    } else {
      s = val.dump();
    }
    apply_override(cfg, key, s);
  }
}

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text) {
  // JSON payloads carry their config under "config" (or are one themselves)
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    ojson j;
    try {
      j = ojson::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("JSON parse failed: ") + e.what());
    }
    apply_json_config(cfg, j.contains("config") ? j["config"] : j);
    return;
  }

  // Echoed outputs mark config lines with "#% "; if any line carries the
  // marker, only marked lines are read. A plain config has no markers and
  // every non-comment line must be a key = value pair.
  const bool echo_mode = text.find("#% ") != std::string::npos;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (echo_mode) {
      if (line.rfind("#% ", 0) != 0) continue;
      line = line.substr(3);
    } else {
      const auto start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      if (line[start] == '#') continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    try {
      apply_override(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream o;
  o << "schema_version = " << kSchemaVersion << "\n";
  o << "tool_version = " << kToolVersion << "\n";
  if (!cfg.preset.empty()) o << "preset = " << cfg.preset << "\n";
  o << "mode = " << mode_name(cfg.mode) << "\n";
  o << "format = " << format_name(cfg.format) << "\n";
  if (!cfg.out.empty()) o << "out = " << cfg.out << "\n";
  o << "workers = " << cfg.workers << "\n";
  o << "seed = " << cfg.seed << "\n";
  o << "prominence = " << fg(cfg.prominence) << "\n";
  o << "pm_n_max = " << cfg.pm_n_max << "\n";
  o << "pm_n_max_cap = " << cfg.pm_n_max_cap << "\n";
  o << "Omega = " << fg(cfg.model.Omega) << "\n";
  o << "Delta = " << fg(cfg.model.Delta) << "\n";
  o << "omegaD = " << fg(cfg.model.omegaD) << "\n";
  o << "gamma0 = " << fg(cfg.model.gamma0) << "\n";
  o << "theta0 = " << fg(cfg.model.theta0) << "\n";
  o << "cycles = " << cfg.model.cycles << "\n";
  o << "depth1 = " << cfg.model.depth1 << "\n";
  o << "depth2 = " << cfg.model.depth2 << "\n";
  o << "dt = " << fg(cfg.model.dt) << "\n";
  o << "samples_per_cycle = " << cfg.model.samples_per_cycle << "\n";
  o << "period_policy = " << policy_name(cfg.model.period_policy) << "\n";
  if (cfg.axis1) o << "axis1 = " << axis_str(*cfg.axis1) << "\n";
  if (cfg.axis2) o << "axis2 = " << axis_str(*cfg.axis2) << "\n";
  o << "sweep_cycles =";
  for (int n : cfg.sweep_cycles) o << " " << n;
  o << "\n";
  o << "theta_list_deg =";
  for (double d : cfg.theta_list_deg) o << " " << fg(d);
  o << "\n";
  o << "scan_depths =";
  for (const auto& d : cfg.scan_depths) o << " " << d.n1 << "," << d.n2;
  o << "\n";
  return o.str();
}

std::vector<std::string> preset_names() {
  return {"fig1", "fig1-unitary", "fig4", "fig7", "fig8", "fig8-frozen", "fig10", "theta-scan"};
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  ModelParams& m = c.model;
  if (name == "fig1") {
    m.gamma0 = 1.0;  // strong coupling, free gap: coherence revivals
  } else if (name == "fig1-unitary") {
    m.gamma0 = 1e-12;  // decoupled reference
  } else if (name == "fig4") {
    m.gamma0 = 0.01;  // weak coupling, free gap: phase drifts off the unitary value
  } else if (name == "fig7" || name == "fig10") {
    c.mode = Mode::Sweep;
    m.gamma0 = name == "fig7" ? 0.01 : 1.0;
    m.cycles = 8;
    // sweep depth picked by the convergence scan for each coupling
    m.depth1 = m.depth2 = name == "fig7" ? 8 : 14;
    c.axis1 = SweepAxis{"Delta", 0.0, 8.0, 17};
    c.axis2 = SweepAxis{"omegaD", 0.0, 8.0, 17};
  } else if (name == "fig8") {
    m.gamma0 = 1.0;  // undriven comparison window for the driven run
  } else if (name == "fig8-frozen") {
    m.gamma0 = 1.0;
    m.Delta = 7.0;
    m.omegaD = 4.0;  // drive detuned from the gap: revivals are suppressed
  } else if (name == "theta-scan") {
    c.mode = Mode::ThetaScan;
    m.gamma0 = 1.0;
    m.Delta = 7.0;
    m.omegaD = 4.0;
  } else {
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset: " + name + " (available: " + names + ")");
  }
  return c;
}

// ----- run drivers -----------------------------------------------------------

namespace {

double wrap_2pi(double x) {
  double m = std::fmod(x, 2.0 * kPi);
  if (m < 0) m += 2.0 * kPi;
  return m;
}

void fill_summaries_and_diag(RunRecord& rec) {
  const auto& traj = rec.traj;
  const auto& gps = rec.gps;
  const int spc = traj.samples_per_cycle;
  for (int k = 1; k <= rec.cfg.model.cycles; ++k) {
    const size_t idx = static_cast<size_t>(k) * spc;
    if (idx >= gps.phi.size()) break;
    CycleSummary cs;
    cs.cycle = k;
    cs.phi_unwrapped = gps.phi[idx];
    cs.phi_mod_2pi = wrap_2pi(gps.phi[idx]);
    cs.phi_unitary = gp::unitary_gp(rec.cfg.model.theta0, k);
    cs.ratio = cs.phi_unitary != 0.0 ? cs.phi_unwrapped / cs.phi_unitary
                                     : std::numeric_limits<double>::quiet_NaN();
    rec.cycle_summaries.push_back(cs);
  }
  Diagnostics& d = rec.diag;
  d.min_eig = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.samples) {
    d.max_trace_drift = std::max(d.max_trace_drift, s.trace_drift);
    d.max_herm_defect = std::max(d.max_herm_defect, s.herm_defect);
    const auto eig = algebra::eig_hermitian(algebra::hermitize(s.rho));
    d.min_eig = std::min(d.min_eig, eig.eps2);
  }
  if (traj.samples.empty()) d.min_eig = 0.0;
  d.max_route_gap = gps.max_route_gap;
  d.min_gap = gps.min_gap;
  d.min_step_overlap = gps.min_step_overlap;
  d.direct_route_valid = gps.direct_route_valid;
}

// Re-phases every eigenvector with a seeded random factor and re-accumulates;
// any shift in phi is gauge leakage.
double gauge_selftest(const gp::EigenSeries& es, const gp::GpSeries& base, unsigned seed) {
  gp::EigenSeries twisted = es;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  for (auto& v : twisted.v1) v *= std::polar(1.0, u(rng));
  const gp::GpSeries again = gp::gp_accumulate_partial(twisted);
  const size_t shared = std::min(base.phi.size(), again.phi.size());
  double delta = base.phi.size() == again.phi.size()
                     ? 0.0
                     : std::numeric_limits<double>::infinity();
  for (size_t m = 0; m < shared; ++m)
    delta = std::max(delta, std::abs(base.phi[m] - again.phi[m]));
  return delta;
}

std::string classify(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const InvalidParams*>(&e)) return "invalid";
  return "error";
}

}  // namespace

RunRecord run_single(const RunConfig& cfg) {
  RunRecord rec;
  rec.cfg = cfg;
  model::validate(cfg.model);
  try {
    auto ev = integrate::evolve(cfg.model);
    rec.traj = std::move(ev.traj);
  } catch (const DivergenceError& e) {
    rec.status = kDivergence;
    rec.status_detail = e.what();
    return rec;
  }
  const gp::EigenSeries es = gp::eigendecompose(rec.traj);
  rec.gps = gp::gp_accumulate_partial(es);
  rec.gp_valid_samples = rec.gps.valid_samples;
  if (!rec.gps.complete) {
    rec.status = kDegeneracy;
    rec.status_detail =
        rec.gps.stop_reason + " at tau = " + fg(rec.gps.stop_tau);
  }
  rec.diag.gauge_delta = gauge_selftest(es, rec.gps, cfg.seed);
  fill_summaries_and_diag(rec);
  return rec;
}

namespace {

std::vector<SweepRow> sweep_point(const RunConfig& cfg, int i1, int i2, int max_n) {
  const double a1 = cfg.axis1->value(i1);
  const double a2 = cfg.axis2 ? cfg.axis2->value(i2)
                              : std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepRow> rows;
  rows.reserve(cfg.sweep_cycles.size());
  for (int n : cfg.sweep_cycles) {
    SweepRow r;
    r.axis1 = a1;
    r.axis2 = a2;
    r.cycles = n;
    r.phi_unwrapped = r.phi_unitary = r.ratio = std::numeric_limits<double>::quiet_NaN();
    r.min_eig = std::numeric_limits<double>::quiet_NaN();
    rows.push_back(r);
  }

  ModelParams m = cfg.model;
  set_model_param(m, cfg.axis1->param, a1);
  if (cfg.axis2) set_model_param(m, cfg.axis2->param, a2);
  m.cycles = max_n;

  integrate::Trajectory traj;
  try {
    model::validate(m);
    auto ev = integrate::evolve(m);
    traj = std::move(ev.traj);
  } catch (const std::exception& e) {
    for (auto& r : rows) r.status = classify(e);
    return rows;
  }

  const gp::EigenSeries es = gp::eigendecompose(traj);
  const gp::GpSeries gps = gp::gp_accumulate_partial(es);

  std::vector<double> rvals, prefix_min_eig;
  rvals.reserve(traj.samples.size());
  prefix_min_eig.reserve(traj.samples.size());
  double running = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    rvals.push_back(traj.samples[i].R);
    running = std::min(running, es.eps2[i]);
    prefix_min_eig.push_back(running);
  }

  const int spc = traj.samples_per_cycle;
  for (size_t k = 0; k < rows.size(); ++k) {
    SweepRow& r = rows[k];
    const size_t idx = static_cast<size_t>(r.cycles) * spc;
    if (idx >= traj.samples.size()) {
      r.status = "short";  // requested N beyond the integrated window
      continue;
    }
    r.min_eig = prefix_min_eig[idx];
    const std::vector<double> prefix(rvals.begin(), rvals.begin() + idx + 1);
    r.revivals = observables::count_peaks(prefix, cfg.prominence);
    if (idx < gps.phi.size()) {
      r.phi_unwrapped = gps.phi[idx];
      r.phi_unitary = gp::unitary_gp(m.theta0, r.cycles);
      r.ratio = r.phi_unitary != 0.0 ? r.phi_unwrapped / r.phi_unitary
                                     : std::numeric_limits<double>::quiet_NaN();
    } else {
      r.status = gps.stop_reason;
    }
  }
  return rows;
}

}  // namespace

SweepRecord run_sweep(const RunConfig& cfg) {
  if (!cfg.axis1) throw ConfigError("sweep mode requires axis1");
  SweepRecord rec;
  rec.cfg = cfg;
  const int n1 = cfg.axis1->count;
  const int n2 = cfg.axis2 ? cfg.axis2->count : 1;
  const int max_n = *std::max_element(cfg.sweep_cycles.begin(), cfg.sweep_cycles.end());

  const int tasks = n1 * n2;
  std::vector<std::vector<SweepRow>> slots(tasks);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= tasks) return;
      try {
        slots[i] = sweep_point(cfg, i / n2, i % n2, max_n);
      } catch (const std::exception& e) {
        // belt and braces; sweep_point already classifies per-point failures
        const double nan = std::numeric_limits<double>::quiet_NaN();
        std::vector<SweepRow> rows(cfg.sweep_cycles.size());
        for (size_t k = 0; k < rows.size(); ++k) {
          rows[k].axis1 = cfg.axis1->value(i / n2);
          rows[k].axis2 = cfg.axis2 ? cfg.axis2->value(i % n2) : nan;
          rows[k].cycles = cfg.sweep_cycles[k];
          rows[k].phi_unwrapped = rows[k].phi_unitary = rows[k].ratio = nan;
          rows[k].min_eig = nan;
          rows[k].status = classify(e);
        }
        slots[i] = std::move(rows);
      }
    }
  };

  const int nthreads = std::max(1, std::min(cfg.workers, tasks));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& slot : slots)
    for (auto& r : slot) rec.rows.push_back(std::move(r));
  for (const auto& r : rec.rows)
    if (r.status != "ok") {
      rec.status = kPartialSweepFailure;
      break;
    }
  return rec;
}

ThetaScanRecord run_theta_scan(const RunConfig& cfg) {
  ThetaScanRecord rec;
  rec.cfg = cfg;
  for (double deg : cfg.theta_list_deg)
    if (!(deg > 0.0 && deg < 180.0))
      throw ConfigError("theta_list_deg entries must lie strictly inside (0, 180)");
  for (double deg : cfg.theta_list_deg) {
    const double rad = deg * kPi / 180.0;
    ThetaEntry entry;
    entry.theta0_deg = deg;
    RunConfig point = cfg;
    point.mode = Mode::Single;
    point.model.theta0 = rad;
    entry.record = run_single(point);
    const auto& samples = entry.record.traj.samples;
    const size_t short_end =
        std::min(samples.size(), static_cast<size_t>(2 * cfg.model.samples_per_cycle) + 1);
    for (size_t i = 0; i < samples.size(); ++i) {
      entry.min_R = std::min(entry.min_R, samples[i].R);
      if (i < short_end) entry.min_R_short = std::min(entry.min_R_short, samples[i].R);
    }
    if (entry.record.status != kOk) rec.status = kPartialSweepFailure;
    rec.entries.push_back(std::move(entry));
  }
  return rec;
}

OracleCompareRecord run_oracle_compare(const RunConfig& cfg) {
  OracleCompareRecord rec;
  rec.cfg = cfg;
  model::validate(cfg.model);
  try {
    auto ev = integrate::evolve(cfg.model);
    rec.heom_traj = std::move(ev.traj);
  } catch (const DivergenceError&) {
    rec.status = kDivergence;
    return rec;
  }
  oracle::PseudomodeParams pp;
  pp.model = cfg.model;
  pp.n_max = cfg.pm_n_max;
  pp.n_max_cap = cfg.pm_n_max_cap;
  try {
    rec.pm = oracle::pseudomode_evolve(pp);
  } catch (const TruncationInsufficient&) {
    rec.status = kNotConverged;
    return rec;
  }
  const size_t shared = std::min(rec.heom_traj.samples.size(), rec.pm.traj.samples.size());
  rec.trace_distances.reserve(shared);
  for (size_t i = 0; i < shared; ++i) {
    const double d =
        oracle::trace_distance(rec.heom_traj.samples[i].rho, rec.pm.traj.samples[i].rho);
    rec.trace_distances.push_back(d);
    rec.max_trace_distance = std::max(rec.max_trace_distance, d);
  }
  return rec;
}

ConvergenceScanRecord run_convergence_scan(const RunConfig& cfg) {
  ConvergenceScanRecord rec;
  rec.cfg = cfg;
  rec.report = heom::convergence_scan(cfg.model, cfg.scan_depths);
  if (!rec.report.converged) rec.status = kNotConverged;
  return rec;
}

// ----- emitters ----------------------------------------------------------------

namespace {

std::string echo_block(const RunConfig& cfg) {
  std::istringstream is(serialize_config(cfg));
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line)) os << "#% " << line << "\n";
  return os.str();
}

ojson config_json(const RunConfig& cfg) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kToolVersion;
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  j["mode"] = mode_name(cfg.mode);
  j["format"] = format_name(cfg.format);
  if (!cfg.out.empty()) j["out"] = cfg.out;
  j["workers"] = cfg.workers;
  j["seed"] = cfg.seed;
  j["prominence"] = cfg.prominence;
  j["pm_n_max"] = cfg.pm_n_max;
  j["pm_n_max_cap"] = cfg.pm_n_max_cap;
  j["Omega"] = cfg.model.Omega;
  j["Delta"] = cfg.model.Delta;
  j["omegaD"] = cfg.model.omegaD;
  j["gamma0"] = cfg.model.gamma0;
  j["theta0"] = cfg.model.theta0;
  j["cycles"] = cfg.model.cycles;
  j["depth1"] = cfg.model.depth1;
  j["depth2"] = cfg.model.depth2;
  j["dt"] = cfg.model.dt;
  j["samples_per_cycle"] = cfg.model.samples_per_cycle;
  j["period_policy"] = policy_name(cfg.model.period_policy);
  if (cfg.axis1)
    j["axis1"] = {{"param", cfg.axis1->param},
                  {"min", cfg.axis1->min},
                  {"max", cfg.axis1->max},
                  {"count", cfg.axis1->count}};
  if (cfg.axis2)
    j["axis2"] = {{"param", cfg.axis2->param},
                  {"min", cfg.axis2->min},
                  {"max", cfg.axis2->max},
                  {"count", cfg.axis2->count}};
  j["sweep_cycles"] = cfg.sweep_cycles;
  j["theta_list_deg"] = cfg.theta_list_deg;
  ojson depths = ojson::array();
  for (const auto& d : cfg.scan_depths) depths.push_back({d.n1, d.n2});
  j["scan_depths"] = depths;
  return j;
}

ojson maybe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

struct SingleRows {
  // per-sample derived columns shared by the CSV and JSON emitters
  std::vector<double> eps1, eps2, run_min_eig, phi, phi_u, ratio;
};

SingleRows derive_rows(const RunRecord& rec) {
  SingleRows rows;
  const double T = rec.traj.cycle_period;
  const double per_cycle = gp::unitary_gp(rec.cfg.model.theta0, 1);
  double running = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i < rec.traj.samples.size(); ++i) {
    const auto& s = rec.traj.samples[i];
    const auto eig = algebra::eig_hermitian(algebra::hermitize(s.rho));
    rows.eps1.push_back(eig.eps1);
    rows.eps2.push_back(eig.eps2);
    running = std::min(running, eig.eps2);
    rows.run_min_eig.push_back(running);
    const double phi = i < rec.gps.phi.size() ? rec.gps.phi[i] : nan;
    const double phi_u = T > 0 ? per_cycle * s.tau / T : nan;
    rows.phi.push_back(phi);
    rows.phi_u.push_back(phi_u);
    rows.ratio.push_back(!std::isnan(phi) && phi_u != 0.0 && !std::isnan(phi_u)
                             ? phi / phi_u
                             : nan);
  }
  return rows;
}

void append_status_comments(std::ostringstream& o, int status,
                            const std::string& detail) {
  o << "# status = " << status << (status == kOk ? " (ok)" : "") << "\n";
  if (!detail.empty()) o << "# status_detail = " << detail << "\n";
}

void append_diag_comments(std::ostringstream& o, const Diagnostics& d) {
  o << "# max_trace_drift = " << fg(d.max_trace_drift) << "\n";
  o << "# max_herm_defect = " << fg(d.max_herm_defect) << "\n";
  o << "# min_eig = " << fg(d.min_eig) << "\n";
  o << "# max_route_gap = " << fg(d.max_route_gap) << "\n";
  o << "# gauge_delta = " << fg(d.gauge_delta) << "\n";
  o << "# min_gap = " << fg(d.min_gap) << "\n";
  o << "# min_step_overlap = " << fg(d.min_step_overlap) << "\n";
  o << "# direct_route_valid = " << (d.direct_route_valid ? 1 : 0) << "\n";
}

ojson diag_json(const Diagnostics& d) {
  ojson j;
  j["max_trace_drift"] = d.max_trace_drift;
  j["max_herm_defect"] = d.max_herm_defect;
  j["min_eig"] = d.min_eig;
  j["max_route_gap"] = d.max_route_gap;
  j["gauge_delta"] = d.gauge_delta;
  j["min_gap"] = d.min_gap;
  j["min_step_overlap"] = d.min_step_overlap;
  j["direct_route_valid"] = d.direct_route_valid;
  return j;
}

ojson summaries_json(const std::vector<CycleSummary>& cs) {
  ojson arr = ojson::array();
  for (const auto& c : cs) {
    ojson j;
    j["cycle"] = c.cycle;
    j["phi_unwrapped"] = c.phi_unwrapped;
    j["phi_mod_2pi"] = c.phi_mod_2pi;
    j["phi_unitary"] = c.phi_unitary;
    j["ratio"] = maybe(c.ratio);
    arr.push_back(j);
  }
  return arr;
}

}  // namespace

std::string emit(const RunRecord& rec) {
  const SingleRows rows = derive_rows(rec);
  if (rec.cfg.format == Format::Json) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["config"] = config_json(rec.cfg);
    j["columns"] = {"tau", "cycle", "x", "y", "z", "R", "rho11", "re_rho12", "im_rho12",
                    "eps1", "eps2", "phi_unwrapped", "phi_unitary", "ratio",
                    "trace_drift", "min_eig"};
    ojson data = ojson::array();
    const int spc = rec.traj.samples_per_cycle;
    for (size_t i = 0; i < rec.traj.samples.size(); ++i) {
      const auto& s = rec.traj.samples[i];
      data.push_back({s.tau, spc > 0 ? static_cast<int>(i) / spc : 0, s.x, s.y, s.z, s.R,
                      s.rho11, s.rho12.real(), s.rho12.imag(), rows.eps1[i], rows.eps2[i],
                      maybe(rows.phi[i]), maybe(rows.phi_u[i]), maybe(rows.ratio[i]),
                      s.trace_drift, rows.run_min_eig[i]});
    }
    j["rows"] = data;
    j["cycle_summaries"] = summaries_json(rec.cycle_summaries);
    j["diagnostics"] = diag_json(rec.diag);
    j["status"] = rec.status;
    j["status_detail"] = rec.status_detail;
    return j.dump(1) + "\n";
  }

  std::ostringstream o;
  o << echo_block(rec.cfg);
  o << "tau,cycle,x,y,z,R,rho11,re_rho12,im_rho12,eps1,eps2,phi_unwrapped,"
       "phi_unitary,ratio,trace_drift,min_eig\n";
  const int spc = rec.traj.samples_per_cycle;
  for (size_t i = 0; i < rec.traj.samples.size(); ++i) {
    const auto& s = rec.traj.samples[i];
    o << fg(s.tau) << ',' << (spc > 0 ? static_cast<int>(i) / spc : 0) << ',' << fg(s.x)
      << ',' << fg(s.y) << ',' << fg(s.z) << ',' << fg(s.R) << ',' << fg(s.rho11) << ','
      << fg(s.rho12.real()) << ',' << fg(s.rho12.imag()) << ',' << fg(rows.eps1[i]) << ','
      << fg(rows.eps2[i]) << ',' << fg(rows.phi[i]) << ',' << fg(rows.phi_u[i]) << ','
      << fg(rows.ratio[i]) << ',' << fg(s.trace_drift) << ',' << fg(rows.run_min_eig[i])
      << "\n";
  }
  for (const auto& c : rec.cycle_summaries) {
    o << "# cycle " << c.cycle << ": phi_unwrapped = " << fg(c.phi_unwrapped)
      << ", phi_mod_2pi = " << fg(c.phi_mod_2pi)
      << ", phi_unitary = " << fg(c.phi_unitary) << ", ratio = " << fg(c.ratio) << "\n";
  }
  append_diag_comments(o, rec.diag);
  append_status_comments(o, rec.status, rec.status_detail);
  return o.str();
}

std::string emit(const SweepRecord& rec) {
  if (rec.cfg.format == Format::Json) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["config"] = config_json(rec.cfg);
    ojson data = ojson::array();
    for (const auto& r : rec.rows) {
      ojson row;
      row["axis1"] = r.axis1;
      row["axis2"] = maybe(r.axis2);
      row["N"] = r.cycles;
      row["phi_unwrapped"] = maybe(r.phi_unwrapped);
      row["phi_unitary"] = maybe(r.phi_unitary);
      row["ratio"] = maybe(r.ratio);
      row["revivals"] = r.revivals;
      row["min_eig"] = maybe(r.min_eig);
      row["status"] = r.status;
      data.push_back(row);
    }
    j["rows"] = data;
    j["status"] = rec.status;
    return j.dump(1) + "\n";
  }

  std::ostringstream o;
  o << echo_block(rec.cfg);
  o << "axis1,axis2,N,phi_unwrapped,phi_unitary,ratio,revivals,min_eig,status\n";
  for (const auto& r : rec.rows) {
    o << fg(r.axis1) << ',' << fg(r.axis2) << ',' << r.cycles << ','
      << fg(r.phi_unwrapped) << ',' << fg(r.phi_unitary) << ',' << fg(r.ratio) << ','
      << r.revivals << ',' << fg(r.min_eig) << ',' << r.status << "\n";
  }
  append_status_comments(o, rec.status, "");
  return o.str();
}

std::string emit(const ThetaScanRecord& rec) {
  if (rec.cfg.format == Format::Json) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["config"] = config_json(rec.cfg);
    ojson entries = ojson::array();
    for (const auto& e : rec.entries) {
      ojson je;
      je["theta0_deg"] = e.theta0_deg;
      je["min_R"] = e.min_R;
      je["min_R_short"] = e.min_R_short;
      je["status"] = e.record.status;
      je["cycle_summaries"] = summaries_json(e.record.cycle_summaries);
      je["diagnostics"] = diag_json(e.record.diag);
      entries.push_back(je);
    }
    j["entries"] = entries;
    j["status"] = rec.status;
    return j.dump(1) + "\n";
  }

  std::ostringstream o;
  o << echo_block(rec.cfg);
  o << "theta0_deg,tau,cycle,x,y,z,R,phi_unwrapped,phi_unitary,ratio\n";
  for (const auto& e : rec.entries) {
    const SingleRows rows = derive_rows(e.record);
    const int spc = e.record.traj.samples_per_cycle;
    for (size_t i = 0; i < e.record.traj.samples.size(); ++i) {
      const auto& s = e.record.traj.samples[i];
      o << fg(e.theta0_deg) << ',' << fg(s.tau) << ','
        << (spc > 0 ? static_cast<int>(i) / spc : 0) << ',' << fg(s.x) << ',' << fg(s.y)
        << ',' << fg(s.z) << ',' << fg(s.R) << ',' << fg(rows.phi[i]) << ','
        << fg(rows.phi_u[i]) << ',' << fg(rows.ratio[i]) << "\n";
    }
  }
  for (const auto& e : rec.entries) {
    o << "# theta " << fg(e.theta0_deg) << ": min_R = " << fg(e.min_R)
      << ", min_R_short = " << fg(e.min_R_short) << ", status = " << e.record.status
      << "\n";
  }
  append_status_comments(o, rec.status, "");
  return o.str();
}

std::string emit(const OracleCompareRecord& rec) {
  if (rec.cfg.format == Format::Json) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["config"] = config_json(rec.cfg);
    j["pm_n_max_used"] = rec.pm.n_max_used;
    j["pm_max_top_pop"] = rec.pm.max_top_pop;
    j["max_trace_distance"] = rec.max_trace_distance;
    j["trace_distances"] = rec.trace_distances;
    j["status"] = rec.status;
    return j.dump(1) + "\n";
  }

  std::ostringstream o;
  o << echo_block(rec.cfg);
  o << "tau,trace_distance,heom_rho11,pm_rho11,heom_re_rho12,pm_re_rho12,"
       "heom_im_rho12,pm_im_rho12\n";
  for (size_t i = 0; i < rec.trace_distances.size(); ++i) {
    const auto& a = rec.heom_traj.samples[i];
    const auto& b = rec.pm.traj.samples[i];
    o << fg(a.tau) << ',' << fg(rec.trace_distances[i]) << ',' << fg(a.rho11) << ','
      << fg(b.rho11) << ',' << fg(a.rho12.real()) << ',' << fg(b.rho12.real()) << ','
      << fg(a.rho12.imag()) << ',' << fg(b.rho12.imag()) << "\n";
  }
  o << "# pm_n_max_used = " << rec.pm.n_max_used << "\n";
  o << "# pm_max_top_pop = " << fg(rec.pm.max_top_pop) << "\n";
  o << "# max_trace_distance = " << fg(rec.max_trace_distance) << "\n";
  append_status_comments(o, rec.status, "");
  return o.str();
}

std::string emit(const ConvergenceScanRecord& rec) {
  if (rec.cfg.format == Format::Json) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["config"] = config_json(rec.cfg);
    ojson entries = ojson::array();
    for (const auto& e : rec.report.entries) {
      ojson je;
      je["depth1"] = e.depth1;
      je["depth2"] = e.depth2;
      je["max_dist_prev"] = maybe(e.max_dist_prev);
      je["min_eig"] = e.min_eig;
      entries.push_back(je);
    }
    j["entries"] = entries;
    j["converged"] = rec.report.converged;
    j["converged_at1"] = rec.report.converged_at1;
    j["converged_at2"] = rec.report.converged_at2;
    j["threshold"] = rec.report.threshold;
    j["status"] = rec.status;
    return j.dump(1) + "\n";
  }

  std::ostringstream o;
  o << echo_block(rec.cfg);
  o << "depth1,depth2,max_dist_prev,min_eig\n";
  for (const auto& e : rec.report.entries) {
    o << e.depth1 << ',' << e.depth2 << ',' << fg(e.max_dist_prev) << ','
      << fg(e.min_eig) << "\n";
  }
  o << "# converged = " << (rec.report.converged ? 1 : 0) << "\n";
  o << "# converged_at = " << rec.report.converged_at1 << ","
    << rec.report.converged_at2 << "\n";
  o << "# threshold = " << fg(rec.report.threshold) << "\n";
  append_status_comments(o, rec.status, "");
  return o.str();
}

void check_output_writable(const RunConfig& cfg) {
  if (cfg.out.empty()) return;
  std::ofstream probe(cfg.out, std::ios::app);
  if (!probe) throw ConfigError("output path is not writable: " + cfg.out);
}

void write_output(const std::string& payload, const RunConfig& cfg) {
  if (cfg.out.empty()) {
    std::cout << payload;
    std::cout.flush();
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("output path is not writable: " + cfg.out);
  out << payload;
  out.close();
  if (!out) throw ConfigError("write failed: " + cfg.out);
}

}  // namespace run
}  // namespace heomgp
