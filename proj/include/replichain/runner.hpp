#pragma once
// Experiment driver behind the CLI: parses a config into a typed plan,
// runs it, and writes CSV outputs plus a manifest into the output directory.

#include "replichain/io.hpp"
#include "replichain/model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace replichain {

struct ExperimentConfig {
  std::string mode; // simulate | steady | sweep | analyze | validate

  SystemSpec spec;
  double mu = 1.0;
  std::vector<double> mu_profile; // empty means uniform(mu)

  std::string integrator = "exact"; // exact | rk4 | discrete
  double dt = 0.0;                  // 0 means integrator default
  double tau = 0.1;                 // discrete collision duration

  double t_end = 0.0;
  std::vector<double> sample_times;  // profile snapshot times
  double series_dt = 0.0;            // 0 means no dense series
  std::vector<int> series_probes;    // sites for the dense series
  std::vector<std::string> observables; // magnetization current cross_concurrence longitudinal_concurrence

  std::string sweep_axis = "gamma"; // gamma | mu
  std::vector<double> sweep_grid;
  double t_ness = -1.0; // relaxation time for steady/sweep; -1 means N

  std::filesystem::path input; // analyze mode: directory of a prior run
  std::vector<std::string> fits; // xi | envelope | collapse
  std::vector<int> envelope_p;
  double floor = 1e-8;

  std::string config_text; // raw config bytes, hashed into the manifest

  static ExperimentConfig from_config(Config& cfg, const std::string& mode);
};

struct RunContext {
  std::filesystem::path out_dir;
  int threads = 1;
  bool quiet = false;
};

// Each returns the process exit code: 0 ok, 1 validation failure.
// Config and numerical errors propagate as ConfigError / NumericalError.
int run_simulate(const ExperimentConfig& cfg, const RunContext& ctx);
int run_steady(const ExperimentConfig& cfg, const RunContext& ctx);
int run_sweep(const ExperimentConfig& cfg, const RunContext& ctx);
int run_analyze(const ExperimentConfig& cfg, const RunContext& ctx);
int run_validate(const ExperimentConfig& cfg, const RunContext& ctx);

int run_mode(const ExperimentConfig& cfg, const RunContext& ctx);

} // namespace replichain
