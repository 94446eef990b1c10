#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "pathtune/engine.hpp"
#include "pathtune/propagation.hpp"
#include "pathtune/trace.hpp"

using namespace pathtune;

namespace {

Program from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_script(in);
}

CoordinatorOptions full_options() {
  CoordinatorOptions opts;
  opts.policy = PolicyKind::online;
  opts.force_full = true;
  return opts;
}

}  // namespace

TEST_CASE("serial chain: costs add up") {
  Program p = from_text(R"(world 1
rank 0 : compute custom 3
rank 0 : compute custom 2 2
)");
  GroundTruthModel model;
  model.mu_override[KernelSignature{RoutineTag::custom, {3}}] = 3.0;
  model.mu_override[KernelSignature{RoutineTag::custom, {2, 2}}] = 4.0;

  Coordinator coord(full_options());
  RunResult res = run(p, model, coord);
  CHECK(res.makespan == 7.0);
  CHECK(coord.predicted_time() == 7.0);
  CHECK(res.dag.vertices.size() == 2);
  CHECK(brute_force_critical_path(res.dag, CostMetric::exec_time).cost == 7.0);
}

TEST_CASE("two ranks joined by an allreduce") {
  Program p = from_text(R"(world 2
rank 0 : compute custom 5
rank 1 : compute custom 7
rank 0 : allreduce -1 8 world
rank 1 : allreduce -1 8 world
)");
  GroundTruthModel model;
  model.mu_override[KernelSignature{RoutineTag::custom, {5}}] = 5.0;
  model.mu_override[KernelSignature{RoutineTag::custom, {7}}] = 7.0;
  model.mu_override[KernelSignature{RoutineTag::allreduce, {8, 1, 2}}] = 1.0;

  Coordinator coord(full_options());
  RunResult res = run(p, model, coord);
  CHECK(res.wall_clock[0] == 8.0);
  CHECK(res.wall_clock[1] == 8.0);
  CHECK(coord.state(0).path.exec_time == 8.0);
  CHECK(coord.state(1).path.exec_time == 8.0);  // collective agreement
  auto cp = brute_force_critical_path(res.dag, CostMetric::exec_time);
  CHECK(cp.cost == 8.0);
}

TEST_CASE("blocking pair charges both sides from the rendezvous") {
  Program p = from_text(R"(world 2
rank 0 : compute custom 7
rank 0 : send 1 64
rank 1 : compute custom 5
rank 1 : recv 0 64
)");
  GroundTruthModel model;
  model.mu_override[KernelSignature{RoutineTag::custom, {7}}] = 7.0;
  model.mu_override[KernelSignature{RoutineTag::custom, {5}}] = 5.0;
  model.mu_override[KernelSignature{RoutineTag::send, {64, 1, 2}}] = 2.0;
  model.mu_override[KernelSignature{RoutineTag::recv, {64, 1, 2}}] = 2.0;

  Coordinator coord(full_options());
  RunResult res = run(p, model, coord);
  CHECK(res.wall_clock[0] == 9.0);
  CHECK(res.wall_clock[1] == 9.0);
  CHECK(coord.state(1).path.exec_time == 9.0);
}

TEST_CASE("nonblocking transfer overlaps intervening compute") {
  // sender's compute hides the transfer entirely
  Program p = from_text(R"(world 2
rank 0 : isend 1 8 t1
rank 0 : compute custom 5
rank 0 : wait t1
rank 1 : recv 0 8
)");
  GroundTruthModel model;
  model.mu_override[KernelSignature{RoutineTag::isend, {8, 1, 2}}] = 2.0;
  model.mu_override[KernelSignature{RoutineTag::recv, {8, 1, 2}}] = 3.0;
  model.mu_override[KernelSignature{RoutineTag::custom, {5}}] = 5.0;

  Coordinator coord(full_options());
  RunResult res = run(p, model, coord);
  CHECK(res.wall_clock[0] == 5.0);  // max(compute span, transfer span)
  CHECK(res.wall_clock[1] == 3.0);  // max(0, post 0) + recv cost
  CHECK(coord.state(0).path.exec_time == 5.0);
  CHECK(coord.state(1).path.exec_time == 3.0);
  auto cp = brute_force_critical_path(res.dag, CostMetric::exec_time);
  CHECK(cp.cost == 5.0);
}

TEST_CASE("nonblocking transfer dominates an idle sender") {
  Program p = from_text(R"(world 2
rank 0 : isend 1 8 t1
rank 0 : wait t1
rank 1 : compute custom 5
rank 1 : recv 0 8
)");
  GroundTruthModel model;
  model.mu_override[KernelSignature{RoutineTag::isend, {8, 1, 2}}] = 2.0;
  model.mu_override[KernelSignature{RoutineTag::recv, {8, 1, 2}}] = 3.0;
  model.mu_override[KernelSignature{RoutineTag::custom, {5}}] = 5.0;

  Coordinator coord(full_options());
  RunResult res = run(p, model, coord);
  // transfer rendezvous at max(post=0, receiver entry=5) = 5
  CHECK(res.wall_clock[0] == 7.0);
  CHECK(res.wall_clock[1] == 8.0);
  CHECK(coord.state(0).path.exec_time == 7.0);
  CHECK(coord.state(1).path.exec_time == 8.0);

  // the sender's path adopted the receiver's prefix: compute + isend
  auto freqs = coord.state(0).path_freq;
  CHECK(freqs.at(KernelSignature{RoutineTag::custom, {5}}) == 1);
  CHECK(freqs.at(KernelSignature{RoutineTag::isend, {8, 1, 2}}) == 1);

  auto cp = brute_force_critical_path(res.dag, CostMetric::exec_time);
  CHECK(cp.cost == 8.0);
}

TEST_CASE("blocking send against a posted irecv") {
  Program p = from_text(R"(world 2
rank 0 : compute custom 4
rank 0 : send 1 8
rank 1 : irecv 0 8 r1
rank 1 : compute custom 5
rank 1 : wait r1
)");
  GroundTruthModel model;
  model.mu_override[KernelSignature{RoutineTag::custom, {4}}] = 4.0;
  model.mu_override[KernelSignature{RoutineTag::custom, {5}}] = 5.0;
  model.mu_override[KernelSignature{RoutineTag::send, {8, 1, 2}}] = 2.0;
  model.mu_override[KernelSignature{RoutineTag::irecv, {8, 1, 2}}] = 2.0;

  Coordinator coord(full_options());
  RunResult res = run(p, model, coord);
  // send: max(own 4, irecv post 0) + 2 = 6
  CHECK(res.wall_clock[0] == 6.0);
  // wait: max(local 5, max(post 0, sender entry 4) + 2) = 6
  CHECK(res.wall_clock[1] == 6.0);
  CHECK(coord.state(1).path.exec_time == 6.0);
}

TEST_CASE("determinism: identical seeds give identical traces") {
  std::mt19937_64 rng(31);
  Program p = testing::random_program(rng);
  GroundTruthModel model;
  model.noise = NoiseKind::gaussian_cv;
  model.noise_cv = 0.2;
  model.seed = 777;

  Coordinator a(full_options());
  Coordinator b(full_options());
  RunResult ra = run(p, model, a);
  RunResult rb = run(p, model, b);
  REQUIRE(ra.dag.vertices.size() == rb.dag.vertices.size());
  for (std::size_t i = 0; i < ra.dag.vertices.size(); ++i) {
    CHECK(ra.dag.vertices[i].cost == rb.dag.vertices[i].cost);
    CHECK(ra.dag.vertices[i].preds == rb.dag.vertices[i].preds);
  }
  CHECK(ra.wall_clock == rb.wall_clock);

  model.seed = 778;
  Coordinator c(full_options());
  RunResult rc = run(p, model, c);
  CHECK(rc.makespan != ra.makespan);
}

TEST_CASE("full execution matches the critical-path oracle on random programs") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    Program p = testing::random_program(rng);
    GroundTruthModel model = testing::continuous_cost_model(p, 1000 + trial);
    REQUIRE(validate(p));

    Coordinator coord(full_options());
    RunResult res = run(p, model, coord);
    auto cp = brute_force_critical_path(res.dag, CostMetric::exec_time);

    double predicted = coord.predicted_time();
    CHECK(predicted == doctest::Approx(cp.cost).epsilon(1e-12));

    // frequency correctness under online propagation
    auto freqs = coord.critical_freqs();
    CHECK(freqs == cp.signature_counts);

    // wall clock of the slowest rank equals the path cost in full mode
    CHECK(res.makespan == doctest::Approx(cp.cost).epsilon(1e-12));
  }
}

TEST_CASE("validation soundness: accepted programs run to completion") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 60; ++trial) {
    Program p = testing::random_program(rng);
    REQUIRE(validate(p));

    // mutate: drop one random event (may invalidate matching)
    Program mutated = p;
    const int r = static_cast<int>(rng() % mutated.script.size());
    if (!mutated.script[static_cast<std::size_t>(r)].empty()) {
      auto& script = mutated.script[static_cast<std::size_t>(r)];
      script.erase(script.begin() + static_cast<std::ptrdiff_t>(rng() % script.size()));
    }
    if (validate(mutated)) {
      GroundTruthModel model = testing::continuous_cost_model(mutated, trial);
      Coordinator coord(full_options());
      CHECK_NOTHROW(run(mutated, model, coord));
    }
  }
}
