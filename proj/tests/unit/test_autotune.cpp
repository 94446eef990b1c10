#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pathtune/autotune.hpp"
#include "pathtune/errors.hpp"

using namespace pathtune;

namespace {

SweepSpec small_cholesky_spec() {
  SweepSpec spec;
  for (std::int64_t b : {32, 64, 128}) {
    spec.configs.push_back(
        parse_workload_line("cholesky n=256 b=" + std::to_string(b) + " grid=2x2x2"));
  }
  spec.epsilons = {1.0, 0.125};
  spec.iterations = 3;
  spec.seed = 11;
  return spec;
}

std::uint64_t executed_on(const SweepSpec& base, PolicyKind policy, double epsilon) {
  SweepSpec spec = base;
  spec.policy = policy;
  spec.epsilons = {epsilon};
  TuningReport rep = sweep(spec);
  // rebuild executed counts from the fraction and the (shared) total
  double frac = 0.0;
  for (const auto& row : rep.results) frac += row.executed_fraction;
  return static_cast<std::uint64_t>(1e9 * frac);  // comparable across policies
}

}  // namespace

TEST_CASE("prediction_error arithmetic") {
  CHECK(prediction_error(9.5, 10.0) == doctest::Approx(0.05));
  CHECK(prediction_error(10.0, 10.0) == 0.0);
  CHECK_THROWS_AS(prediction_error(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("select_best picks the argmin with low-id ties") {
  CHECK(select_best({5.0, 3.0, 4.0}) == 1);
  CHECK(select_best({3.0, 3.0}) == 0);
  CHECK(select_best({std::nan(""), 2.0}) == 1);
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec = small_cholesky_spec();
  spec.epsilons = {0.5, 0.5};
  CHECK_THROWS_AS(sweep(spec), ConfigError);
  spec.epsilons = {};
  CHECK_THROWS_AS(sweep(spec), ConfigError);
  spec = small_cholesky_spec();
  spec.configs.clear();
  CHECK_THROWS_AS(sweep(spec), ConfigError);
}

TEST_CASE("noise-free sweeps predict exactly") {
  SweepSpec spec = small_cholesky_spec();
  for (PolicyKind policy : {PolicyKind::online, PolicyKind::conditional, PolicyKind::eager}) {
    spec.policy = policy;
    TuningReport rep = sweep(spec);
    for (const auto& row : rep.results) {
      REQUIRE(!row.failed);
      CHECK(row.relative_error <= 1e-12);
      CHECK(row.noise_floor_cv == 0.0);
    }
    // with exact predictions the selection is the true argmin
    for (const auto& s : rep.summaries) CHECK(s.best_gap == 1.0);
  }
}

TEST_CASE("tiny tolerance under noise executes everything") {
  SweepSpec spec;
  spec.configs.push_back(parse_workload_line("micro ranks=4 repeats=6"));
  spec.epsilons = {1e-12};
  spec.iterations = 3;
  spec.noise = NoiseKind::gaussian_cv;
  spec.noise_cv = 0.05;
  spec.seed = 3;
  TuningReport rep = sweep(spec);
  REQUIRE(rep.results.size() == 1);
  CHECK(rep.results[0].executed_fraction == 1.0);
  CHECK(rep.results[0].wall_time_ratio > 0.9);
}

TEST_CASE("single-config space selects itself") {
  SweepSpec spec;
  spec.configs.push_back(parse_workload_line("cholesky n=128 b=32 grid=2x2x2"));
  spec.epsilons = {0.5};
  spec.iterations = 2;
  TuningReport rep = sweep(spec);
  CHECK(rep.summaries[0].selected_config == 0);
  CHECK(rep.summaries[0].best_gap == 1.0);
}

TEST_CASE("failed configs are reported and the sweep continues") {
  SweepSpec spec;
  spec.configs.push_back(parse_workload_line("cholesky n=100 b=64 grid=2x2x2"));  // invalid
  spec.configs.push_back(parse_workload_line("cholesky n=128 b=32 grid=2x2x2"));
  spec.epsilons = {0.5};
  spec.iterations = 2;
  TuningReport rep = sweep(spec);
  CHECK(rep.any_config_error);
  CHECK(rep.results[0].failed);
  CHECK(!rep.results[1].failed);
  CHECK(rep.summaries[0].selected_config == 1);
}

TEST_CASE("reports are byte-identical across invocations") {
  SweepSpec spec = small_cholesky_spec();
  spec.noise = NoiseKind::gaussian_cv;
  spec.noise_cv = 0.05;
  TuningReport a = sweep(spec);
  TuningReport b = sweep(spec);
  std::ostringstream ja, jb, ca, cb, sa, sb;
  write_report_json(a, ja);
  write_report_json(b, jb);
  write_config_csv(a, ca);
  write_config_csv(b, cb);
  write_signature_csv(a, sa);
  write_signature_csv(b, sb);
  CHECK(ja.str() == jb.str());
  CHECK(ca.str() == cb.str());
  CHECK(sa.str() == sb.str());
  CHECK(ja.str().find("\"policy\"") != std::string::npos);
}

TEST_CASE("policy ordering of executed fractions on the cholesky workload") {
  SweepSpec spec = small_cholesky_spec();
  spec.noise = NoiseKind::gaussian_cv;
  spec.noise_cv = 0.05;
  spec.iterations = 5;
  const double eps = 0.5;
  const auto eager = executed_on(spec, PolicyKind::eager, eps);
  const auto online = executed_on(spec, PolicyKind::online, eps);
  const auto conditional = executed_on(spec, PolicyKind::conditional, eps);
  CHECK(eager <= online);
  CHECK(online <= conditional);
}

TEST_CASE("a priori pays for its seeding run in wall time") {
  SweepSpec spec = small_cholesky_spec();
  spec.epsilons = {0.5};
  spec.iterations = 3;
  spec.policy = PolicyKind::apriori;
  TuningReport rep = sweep(spec);
  for (const auto& row : rep.results) {
    REQUIRE(!row.failed);
    CHECK(row.relative_error <= 1e-12);  // exactness still holds
    CHECK(row.wall_time_ratio > 1.0 / 3.0);  // seeding adds a full run
  }
}
