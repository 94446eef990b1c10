#include "pathtune/autotune.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "pathtune/engine.hpp"
#include "pathtune/errors.hpp"

namespace pathtune {

namespace {

// Deterministic per-run seeds: phase 0 = paired full/selective iterations,
// 2 = noiseless truth, 3 = a priori seeding run.
std::uint64_t run_seed(std::uint64_t base, std::size_t config, std::size_t epsilon, int phase,
                       int iteration) {
  std::uint64_t h = hash_mix(base, 0x5eedull);
  h = hash_mix(h, static_cast<std::uint64_t>(config) + 1);
  h = hash_mix(h, static_cast<std::uint64_t>(epsilon) + 1);
  h = hash_mix(h, static_cast<std::uint64_t>(phase) + 1);
  h = hash_mix(h, static_cast<std::uint64_t>(iteration) + 1);
  return h;
}

double coefficient_of_variation(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (mean <= 0.0) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1)) / mean;
}

void validate_spec(const SweepSpec& spec) {
  if (spec.configs.empty()) throw ConfigError("sweep: empty configuration list");
  if (spec.epsilons.empty()) throw ConfigError("sweep: empty epsilon ladder");
  for (double e : spec.epsilons) {
    if (!(e > 0.0)) throw ConfigError("sweep: epsilons must be positive");
  }
  for (std::size_t i = 1; i < spec.epsilons.size(); ++i) {
    if (!(spec.epsilons[i] < spec.epsilons[i - 1])) {
      throw ConfigError("sweep: epsilon ladder must be strictly decreasing");
    }
  }
  if (spec.iterations < 1) throw ConfigError("sweep: iterations must be >= 1");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const ConfigResult& TuningReport::at(std::size_t epsilon_index, std::size_t config_index) const {
  return results.at(epsilon_index * config_labels.size() + config_index);
}

double prediction_error(double predicted, double full) {
  if (!(full > 0.0)) throw std::invalid_argument("prediction_error: full time must be positive");
  return std::abs(predicted - full) / full;
}

int select_best(const std::vector<double>& predicted_times) {
  int best = -1;
  for (std::size_t i = 0; i < predicted_times.size(); ++i) {
    if (std::isnan(predicted_times[i])) continue;
    if (best < 0 || predicted_times[i] < predicted_times[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

TuningReport sweep(const SweepSpec& spec) {
  validate_spec(spec);

  TuningReport report;
  report.policy = spec.policy;
  report.epsilons = spec.epsilons;
  report.iterations = spec.iterations;
  report.seed = spec.seed;
  report.noise = spec.noise;
  report.noise_cv = spec.noise_cv;

  // Generate programs and the noiseless ground truth once per config.
  const std::size_t nconfigs = spec.configs.size();
  std::vector<Program> programs(nconfigs);
  std::vector<bool> config_ok(nconfigs, false);
  std::vector<std::string> config_errors(nconfigs);
  report.true_times.assign(nconfigs, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t c = 0; c < nconfigs; ++c) {
    report.config_labels.push_back(spec.configs[c].label);
    try {
      programs[c] = spec.configs[c].generate();
      if (auto res = validate(programs[c]); !res) {
        throw ConfigError("generated program failed validation: " + res.detail);
      }
      GroundTruthModel truth = spec.base_model;
      truth.noise = NoiseKind::none;
      truth.noise_cv = 0.0;
      truth.seed = run_seed(spec.seed, c, 0, 2, 0);
      CoordinatorOptions opts;
      opts.force_full = true;
      Coordinator full(opts);
      report.true_times[c] = run(programs[c], truth, full).makespan;
      config_ok[c] = true;
    } catch (const ConfigError& err) {
      report.any_config_error = true;
      config_errors[c] = err.what();
    }
  }

  for (std::size_t e = 0; e < spec.epsilons.size(); ++e) {
    const double epsilon = spec.epsilons[e];
    CoordinatorOptions options;
    options.policy = spec.policy;
    options.confidence.tolerance = epsilon;
    options.collective_skip_quorum = spec.collective_skip_quorum;
    Coordinator selective(options);

    for (std::size_t c = 0; c < nconfigs; ++c) {
      ConfigResult row;
      row.config_index = static_cast<int>(c);
      row.label = spec.configs[c].label;
      row.epsilon = epsilon;
      if (!config_ok[c]) {
        row.failed = true;
        row.error = config_errors[c];
        report.results.push_back(std::move(row));
        continue;
      }
      const Program& program = programs[c];

      // Paired full executions (ground truth for this cell).
      double full_wall = 0.0;
      for (int it = 0; it < spec.iterations; ++it) {
        GroundTruthModel model = spec.base_model;
        model.noise = spec.noise;
        model.noise_cv = spec.noise_cv;
        model.seed = run_seed(spec.seed, c, e, 0, it);
        CoordinatorOptions opts;
        opts.force_full = true;
        Coordinator full(opts);
        RunResult res = run(program, model, full);
        row.full_times.push_back(res.makespan);
        full_wall += res.makespan;
      }
      row.full_time = row.full_times.back();
      row.noise_floor_cv = coefficient_of_variation(row.full_times);

      // Selective runs under the policy; statistics persist across the
      // iterations of one configuration.
      if (spec.reset_between_configs) selective.reset_statistics();
      double selective_wall = 0.0;
      if (spec.policy == PolicyKind::apriori) {
        GroundTruthModel model = spec.base_model;
        model.noise = spec.noise;
        model.noise_cv = spec.noise_cv;
        model.seed = run_seed(spec.seed, c, e, 3, 0);
        selective_wall += run(program, model, selective).makespan;  // seeding cost
        selective.seed_apriori(apriori_counts(program, model));
      }
      std::uint64_t executed = 0, total = 0, control = 0;
      for (int it = 0; it < spec.iterations; ++it) {
        GroundTruthModel model = spec.base_model;
        model.noise = spec.noise;
        model.noise_cv = spec.noise_cv;
        // Same seed as full iteration `it`: each selective run predicts the
        // environment of the full execution performed directly prior, and
        // executed instances reproduce that run's draws (common random
        // numbers), so the error isolates what substitution loses.
        model.seed = run_seed(spec.seed, c, e, 0, it);
        RunResult res = run(program, model, selective);
        executed += res.executed_instances;
        total += res.total_instances;
        control += selective.control_messages();
        selective_wall += res.makespan;
      }
      row.predicted_time = selective.predicted_time();
      row.relative_error = prediction_error(row.predicted_time, row.full_time);
      row.executed_fraction =
          total > 0 ? static_cast<double>(executed) / static_cast<double>(total) : 1.0;
      row.wall_time_ratio = full_wall > 0.0 ? selective_wall / full_wall : 1.0;
      row.control_messages = control;
      row.kernels = selective.kernel_table();
      report.results.push_back(std::move(row));
    }

    // Per-epsilon selection against the noiseless truth.
    EpsilonSummary summary;
    summary.epsilon = epsilon;
    std::vector<double> predicted(nconfigs, std::numeric_limits<double>::quiet_NaN());
    double err_sum = 0.0;
    int err_count = 0;
    for (std::size_t c = 0; c < nconfigs; ++c) {
      const ConfigResult& row = report.at(e, c);
      if (row.failed) continue;
      predicted[c] = row.predicted_time;
      err_sum += row.relative_error;
      ++err_count;
    }
    summary.selected_config = select_best(predicted);
    if (summary.selected_config >= 0) {
      double best_true = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < nconfigs; ++c) {
        if (config_ok[c]) best_true = std::min(best_true, report.true_times[c]);
      }
      summary.best_gap =
          report.true_times[static_cast<std::size_t>(summary.selected_config)] / best_true;
    }
    summary.mean_relative_error = err_count > 0 ? err_sum / err_count : 0.0;
    report.summaries.push_back(summary);
  }
  return report;
}

void write_report_json(const TuningReport& report, std::ostream& out) {
  using nlohmann::json;
  json doc;
  doc["policy"] = to_string(report.policy);
  doc["epsilons"] = report.epsilons;
  doc["iterations"] = report.iterations;
  doc["seed"] = report.seed;
  doc["noise"] = to_string(report.noise);
  doc["noise_cv"] = report.noise_cv;
  doc["configs"] = report.config_labels;
  doc["true_times"] = json::array();
  for (double t : report.true_times) {
    if (std::isnan(t)) {
      doc["true_times"].push_back(nullptr);
    } else {
      doc["true_times"].push_back(t);
    }
  }
  doc["results"] = json::array();
  for (const auto& row : report.results) {
    json r;
    r["config"] = row.config_index;
    r["label"] = row.label;
    r["epsilon"] = row.epsilon;
    if (row.failed) {
      r["error"] = row.error;
    } else {
      r["predicted_time"] = row.predicted_time;
      r["full_time"] = row.full_time;
      r["relative_error"] = row.relative_error;
      r["executed_fraction"] = row.executed_fraction;
      r["wall_time_ratio"] = row.wall_time_ratio;
      r["control_messages"] = row.control_messages;
      r["noise_floor_cv"] = row.noise_floor_cv;
      r["full_times"] = row.full_times;
    }
    doc["results"].push_back(std::move(r));
  }
  doc["selection"] = json::array();
  for (const auto& s : report.summaries) {
    json j;
    j["epsilon"] = s.epsilon;
    j["selected_config"] = s.selected_config;
    j["best_gap"] = s.best_gap;
    j["mean_relative_error"] = s.mean_relative_error;
    doc["selection"].push_back(std::move(j));
  }
  out << doc.dump(2) << "\n";
}

void write_config_csv(const TuningReport& report, std::ostream& out) {
  out << "config,label,epsilon,predicted_time,full_time,relative_error,executed_fraction,"
         "wall_time_ratio,control_messages,noise_floor_cv,failed\n";
  for (const auto& row : report.results) {
    out << row.config_index << ",\"" << row.label << "\"," << format_double(row.epsilon) << ','
        << format_double(row.predicted_time) << ',' << format_double(row.full_time) << ','
        << format_double(row.relative_error) << ',' << format_double(row.executed_fraction)
        << ',' << format_double(row.wall_time_ratio) << ',' << row.control_messages << ','
        << format_double(row.noise_floor_cv) << ',' << (row.failed ? 1 : 0) << "\n";
  }
}

void write_signature_csv(const TuningReport& report, std::ostream& out) {
  out << "config,epsilon,signature,count,mean,variance,freq,executed,skipped\n";
  for (const auto& row : report.results) {
    for (const auto& k : row.kernels) {
      out << row.config_index << ',' << format_double(row.epsilon) << ",\"" << k.sig.str()
          << "\"," << k.count << ',' << format_double(k.mean) << ',' << format_double(k.variance)
          << ',' << k.freq << ',' << k.executed << ',' << k.skipped << "\n";
    }
  }
}

void write_report_files(const TuningReport& report, const std::string& base_path) {
  {
    std::ofstream out(base_path + ".json");
    if (!out) throw ConfigError("cannot write " + base_path + ".json");
    write_report_json(report, out);
  }
  {
    std::ofstream out(base_path + "_configs.csv");
    if (!out) throw ConfigError("cannot write " + base_path + "_configs.csv");
    write_config_csv(report, out);
  }
  {
    std::ofstream out(base_path + "_signatures.csv");
    if (!out) throw ConfigError("cannot write " + base_path + "_signatures.csv");
    write_signature_csv(report, out);
  }
}

}  // namespace pathtune
