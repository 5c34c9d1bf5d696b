// heomgp_main.cpp: command-line front end. Layering order for settings:
// preset, then config file, then --set overrides, then dedicated flags.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "heomgp/run.hpp"

namespace {

using namespace heomgp;

int dispatch(const run::RunConfig& cfg) {
  run::check_output_writable(cfg);
  switch (cfg.mode) {
    case run::Mode::Single: {
      const auto rec = run::run_single(cfg);
      run::write_output(run::emit(rec), cfg);
      return rec.status;
    }
    case run::Mode::Sweep: {
      const auto rec = run::run_sweep(cfg);
      run::write_output(run::emit(rec), cfg);
      return rec.status;
    }
    case run::Mode::ThetaScan: {
      const auto rec = run::run_theta_scan(cfg);
      run::write_output(run::emit(rec), cfg);
      return rec.status;
    }
    case run::Mode::OracleCompare: {
      const auto rec = run::run_oracle_compare(cfg);
      run::write_output(run::emit(rec), cfg);
      return rec.status;
    }
    case run::Mode::ConvergenceScan: {
      const auto rec = run::run_convergence_scan(cfg);
      run::write_output(run::emit(rec), cfg);
      return rec.status;
    }
  }
  return run::kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchy integrator for a driven two-level system in a "
               "Lorentzian environment, with geometric-phase accumulation"};

  std::string config_path, preset, out, format, policy, depth, dt;
  std::vector<std::string> sets;
  int workers = 0;

  std::string preset_list;
  for (const auto& n : run::preset_names())
    preset_list += (preset_list.empty() ? "" : ", ") + n;

  app.add_option("--config", config_path,
                 "config file: key = value lines or a previously emitted output file");
  app.add_option("--preset", preset, "named parameter set (" + preset_list + ")");
  app.add_option("--set", sets, "override one config key, as key=value (repeatable)");
  app.add_option("--out", out, "output path (default: stdout)");
  app.add_option("--format", format, "output format: csv or json");
  app.add_option("--workers", workers, "sweep worker threads");
  app.add_option("--period-policy", policy, "cycle definition: omega or omega-plus-delta");
  app.add_option("--depth", depth, "hierarchy truncation as N1,N2");
  app.add_option("--dt", dt, "integrator step (0 = automatic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : run::kConfigError;
  }

  try {
    run::RunConfig cfg;
    if (!preset.empty()) cfg = run::preset_config(preset);
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw ConfigError("cannot open config file: " + config_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      run::apply_config_text(cfg, ss.str());
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set needs key=value, got: " + kv);
      run::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (app.count("--out")) cfg.out = out;
    if (app.count("--format")) run::apply_override(cfg, "format", format);
    if (app.count("--workers")) run::apply_override(cfg, "workers", std::to_string(workers));
    if (app.count("--period-policy")) run::apply_override(cfg, "period_policy", policy);
    if (app.count("--depth")) run::apply_override(cfg, "depth", depth);
    if (app.count("--dt")) run::apply_override(cfg, "dt", dt);
    return dispatch(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kConfigError;
  } catch (const InvalidParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kConfigError;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kDivergence;
  } catch (const DegeneracyEncountered& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kDegeneracy;
  } catch (const OverlapTooSmall& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kDegeneracy;
  } catch (const TruncationInsufficient& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kNotConverged;
  } catch (const NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
