#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pathtune/cost_model.hpp"
#include "pathtune/propagation.hpp"
#include "pathtune/workloads.hpp"

namespace pathtune {

struct SweepSpec {
  std::vector<WorkloadConfig> configs;
  PolicyKind policy = PolicyKind::online;
  std::vector<double> epsilons;  // strictly decreasing ladder
  int iterations = 5;            // paired full and selective runs per config
  std::uint64_t seed = 0;
  NoiseKind noise = NoiseKind::none;
  double noise_cv = 0.0;
  bool reset_between_configs = true;
  double collective_skip_quorum = 1.0;
  GroundTruthModel base_model;  // cost coefficients; seed/noise set per phase
};

// One (configuration, epsilon) evaluation.
struct ConfigResult {
  int config_index = 0;
  std::string label;
  double epsilon = 0.0;
  double predicted_time = 0.0;  // final selective iteration's path model
  double full_time = 0.0;       // the full execution directly prior
  double relative_error = 0.0;
  double executed_fraction = 1.0;  // executed / total kernel instances, all iterations
  double wall_time_ratio = 1.0;    // selective wall sum / full wall sum
  std::uint64_t control_messages = 0;
  double noise_floor_cv = 0.0;  // CV of the paired full executions
  std::vector<double> full_times;
  std::vector<Coordinator::KernelRow> kernels;
  bool failed = false;
  std::string error;
};

struct EpsilonSummary {
  double epsilon = 0.0;
  int selected_config = -1;
  double best_gap = 1.0;  // true time of selection / true optimum
  double mean_relative_error = 0.0;
};

struct TuningReport {
  PolicyKind policy = PolicyKind::online;
  std::vector<double> epsilons;
  int iterations = 0;
  std::uint64_t seed = 0;
  NoiseKind noise = NoiseKind::none;
  double noise_cv = 0.0;
  std::vector<std::string> config_labels;
  std::vector<double> true_times;     // noiseless full execution per config
  std::vector<ConfigResult> results;  // epsilon-major, config-minor
  std::vector<EpsilonSummary> summaries;
  bool any_config_error = false;

  const ConfigResult& at(std::size_t epsilon_index, std::size_t config_index) const;
};

// |predicted - full| / full; full must be positive.
double prediction_error(double predicted, double full);

// Argmin of predicted time, ties to the lowest config id. Entries that are
// NaN (failed configs) are skipped.
int select_best(const std::vector<double>& predicted_times);

// Exhaustive sweep: per epsilon and configuration, paired full executions
// followed by selective iterations under the policy. Configuration errors
// mark their rows failed and the sweep continues.
TuningReport sweep(const SweepSpec& spec);

void write_report_json(const TuningReport& report, std::ostream& out);
void write_config_csv(const TuningReport& report, std::ostream& out);
void write_signature_csv(const TuningReport& report, std::ostream& out);

// Writes <base>.json, <base>_configs.csv, <base>_signatures.csv.
void write_report_files(const TuningReport& report, const std::string& base_path);

}  // namespace pathtune
