// Exhaustive-sweep autotuning driver over simulated workloads.
//
//   tune --workload cholesky --space spaces/chol.txt --policy online \
//        --epsilon 1,0.5,0.25 --iters 5 --noise gaussian --noise-cv 0.05 \
//        --seed 42 --out report
//
// Writes <out>.json, <out>_configs.csv, <out>_signatures.csv.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pathtune/autotune.hpp"
#include "pathtune/engine.hpp"
#include "pathtune/errors.hpp"
#include "pathtune/propagation.hpp"
#include "pathtune/trace.hpp"
#include "pathtune/workloads.hpp"

using namespace pathtune;

namespace {

std::vector<double> parse_epsilons(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

WorkloadConfig default_workload(const std::string& kind) {
  if (kind == "cholesky") return parse_workload_line("cholesky n=1024 b=128 grid=2x2x2");
  if (kind == "qr") return parse_workload_line("qr m=4096 n=1024 b=128 pr=4 pc=2");
  if (kind == "micro") return parse_workload_line("micro ranks=4 repeats=8");
  throw ConfigError("unknown workload kind: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective-execution autotuning simulator"};

  std::string workload = "cholesky";
  std::string space_path;
  std::string script_path;
  std::string policy = "online";
  std::string epsilon_csv = "1,0.5,0.25,0.125,0.0625,0.03125,0.015625";
  int iters = 5;
  std::string noise = "none";
  double noise_cv = 0.0;
  std::uint64_t seed = 0;
  std::string out_path = "report";
  std::string dump_trace_path;
  std::string dump_registry_path;
  bool keep_stats = false;
  double quorum = 1.0;

  app.add_option("--workload", workload, "cholesky|qr|micro (used when --space is absent)");
  app.add_option("--space", space_path, "configuration space file, one config per line");
  app.add_option("--script", script_path, "run a script-format program instead of a workload");
  app.add_option("--policy", policy, "eager|online|local|apriori|conditional");
  app.add_option("--epsilon", epsilon_csv, "comma-separated decreasing tolerance ladder");
  app.add_option("--iters", iters, "executions per configuration");
  app.add_option("--noise", noise, "none|gaussian|lognormal");
  app.add_option("--noise-cv", noise_cv, "coefficient of variation of kernel noise");
  app.add_option("--seed", seed, "rng seed");
  app.add_option("--out", out_path, "report base path");
  app.add_option("--dump-trace", dump_trace_path, "write a full-execution trace edge list CSV");
  app.add_option("--dump-registry", dump_registry_path,
                 "write the rank-0 channel registry after a full execution");
  app.add_flag("--keep-stats", keep_stats, "carry statistics across configurations");
  app.add_option("--collective-quorum", quorum,
                 "fraction of members that must agree before a collective is skipped");

  CLI11_PARSE(app, argc, argv);

  try {
    SweepSpec spec;
    if (!script_path.empty()) {
      // Direct script mode: run the program once in full and report times.
      Program program = parse_script_file(script_path);
      if (auto res = validate(program); !res) {
        std::cerr << "validation failed: " << res.detail << "\n";
        return 1;
      }
      GroundTruthModel model;
      model.noise = noise_from_string(noise);
      model.noise_cv = noise_cv;
      model.seed = seed;
      CoordinatorOptions opts;
      opts.force_full = true;
      Coordinator coord(opts);
      RunResult res = run(program, model, coord);
      auto cp = brute_force_critical_path(res.dag, CostMetric::exec_time);
      std::cout << "ranks: " << program.world_size << "\n"
                << "events: " << res.dag.vertices.size() << "\n"
                << "makespan: " << res.makespan << "\n"
                << "critical path cost: " << cp.cost << "\n";
      if (!dump_trace_path.empty()) {
        std::ofstream out(dump_trace_path);
        res.dag.dump_edges_csv(out);
      }
      if (!dump_registry_path.empty()) {
        std::ofstream out(dump_registry_path);
        out << "hash,offset,dims,is_maximal\n";
        for (const auto& [h, entry] : coord.state(0).registry.table()) {
          out << h << ',' << entry.offset << ",\"";
          for (std::size_t i = 0; i < entry.dims.size(); ++i) {
            if (i) out << ' ';
            out << '(' << entry.dims[i].stride << 'x' << entry.dims[i].size << ')';
          }
          out << "\"," << (entry.is_maximal ? 1 : 0) << "\n";
        }
      }
      return 0;
    }

    if (!space_path.empty()) {
      spec.configs = parse_space_file(space_path);
    } else {
      spec.configs.push_back(default_workload(workload));
    }
    spec.policy = policy_from_string(policy);
    spec.epsilons = parse_epsilons(epsilon_csv);
    spec.iterations = iters;
    spec.seed = seed;
    spec.noise = noise_from_string(noise);
    spec.noise_cv = noise_cv;
    spec.reset_between_configs = !keep_stats;
    spec.collective_skip_quorum = quorum;

    TuningReport report = sweep(spec);
    write_report_files(report, out_path);

    for (const auto& s : report.summaries) {
      std::cout << "epsilon " << s.epsilon << ": selected config " << s.selected_config
                << " (best_gap " << s.best_gap << ", mean relative error "
                << s.mean_relative_error << ")\n";
    }
    std::cout << "report written to " << out_path << ".json\n";
    if (report.any_config_error) {
      std::cerr << "some configurations failed; see the report\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
