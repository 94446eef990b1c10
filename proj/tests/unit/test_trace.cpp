#include <doctest.h>

#include <random>
#include <vector>

#include "pathtune/cost_model.hpp"
#include "pathtune/errors.hpp"
#include "pathtune/trace.hpp"

using namespace pathtune;

namespace {

TraceVertex vertex(double cost, std::vector<std::uint32_t> preds,
                   const char* tag = "custom") {
  TraceVertex v;
  v.role = VertexRole::compute;
  KernelSignature sig;
  sig.tag = routine_tag_from_string(tag);
  sig.params = {static_cast<std::int64_t>(cost * 1000)};
  v.sig = sig;
  v.cost = cost;
  v.preds = std::move(preds);
  return v;
}

// Independent oracle: enumerate every path by DFS and keep the best under
// the same (cost, lexicographic id sequence) order.
struct EnumeratedBest {
  double cost = -1.0;
  std::vector<std::uint32_t> path;
};

void enumerate(const TraceDag& dag, const std::vector<std::vector<std::uint32_t>>& succs,
               std::uint32_t v, double acc, std::vector<std::uint32_t>& stack,
               EnumeratedBest& best, CostMetric metric) {
  acc += metric_weight(dag.vertices[v], metric);
  stack.push_back(v);
  // every prefix ending here is a candidate path
  if (acc > best.cost ||
      (acc == best.cost &&
       std::lexicographical_compare(stack.begin(), stack.end(), best.path.begin(),
                                    best.path.end()))) {
    best.cost = acc;
    best.path = stack;
  }
  for (auto s : succs[v]) {
    enumerate(dag, succs, s, acc, stack, best, metric);
  }
  stack.pop_back();
}

EnumeratedBest enumerate_critical_path(const TraceDag& dag, CostMetric metric) {
  std::vector<std::vector<std::uint32_t>> succs(dag.vertices.size());
  std::vector<bool> has_pred(dag.vertices.size(), false);
  for (const auto& v : dag.vertices) {
    for (auto p : v.preds) {
      succs[p].push_back(v.id);
      has_pred[v.id] = true;
    }
  }
  EnumeratedBest best;
  std::vector<std::uint32_t> stack;
  for (const auto& v : dag.vertices) {
    if (!has_pred[v.id]) enumerate(dag, succs, v.id, 0.0, stack, best, metric);
  }
  return best;
}

}  // namespace

TEST_CASE("two-chain") {
  TraceDag dag;
  auto a = dag.add_vertex(vertex(3.0, {}, "gemm"));
  dag.vertices[a].sig->params = {1};
  auto b = dag.add_vertex(vertex(4.0, {a}, "gemm"));
  dag.vertices[b].sig->params = {1};

  auto cp = brute_force_critical_path(dag, CostMetric::exec_time);
  CHECK(cp.cost == 7.0);
  CHECK(cp.path == std::vector<std::uint32_t>{a, b});
  KernelSignature sig{RoutineTag::gemm, {1}};
  CHECK(cp.signature_counts.at(sig) == 2);
}

TEST_CASE("diamond with equal arms picks the smaller-id arm") {
  TraceDag dag;
  auto s = dag.add_vertex(vertex(1.0, {}));
  auto a = dag.add_vertex(vertex(5.0, {s}));
  auto b = dag.add_vertex(vertex(5.0, {s}));
  auto t = dag.add_vertex(vertex(1.0, {a, b}));

  auto cp = brute_force_critical_path(dag, CostMetric::exec_time);
  CHECK(cp.cost == 7.0);
  CHECK(cp.path == std::vector<std::uint32_t>{s, a, t});
  (void)b;
}

TEST_CASE("matches exhaustive enumeration on random small DAGs") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    TraceDag dag;
    const int n = 2 + static_cast<int>(rng() % 9);
    for (int i = 0; i < n; ++i) {
      std::vector<std::uint32_t> preds;
      for (int j = 0; j < i; ++j) {
        if (rng() % 3 == 0) preds.push_back(static_cast<std::uint32_t>(j));
      }
      // mix of exact ties (integer costs) and generic costs
      const double cost = trial % 2 == 0 ? static_cast<double>(rng() % 4)
                                         : uniform01(rng) * 3.0;
      dag.add_vertex(vertex(cost, std::move(preds)));
    }
    auto expected = enumerate_critical_path(dag, CostMetric::exec_time);
    auto got = brute_force_critical_path(dag, CostMetric::exec_time);
    CHECK(got.cost == doctest::Approx(expected.cost).epsilon(1e-13));
    CHECK(got.path == expected.path);
  }
}

TEST_CASE("metrics weigh only their own vertex roles") {
  TraceDag dag;
  TraceVertex comp = vertex(2.0, {}, "gemm");
  comp.flops = 64.0;
  auto a = dag.add_vertex(comp);

  TraceVertex comm;
  comm.role = VertexRole::collective;
  comm.sig = KernelSignature{RoutineTag::bcast, {800, 1, 4}};
  comm.cost = 5.0;
  comm.bytes = 800;
  comm.collective_member = true;
  comm.preds = {a};
  dag.add_vertex(comm);

  CHECK(brute_force_critical_path(dag, CostMetric::exec_time).cost == 7.0);
  CHECK(brute_force_critical_path(dag, CostMetric::comm_time).cost == 5.0);
  CHECK(brute_force_critical_path(dag, CostMetric::comp_time).cost == 2.0);
  CHECK(brute_force_critical_path(dag, CostMetric::supersteps).cost == 1.0);
  CHECK(brute_force_critical_path(dag, CostMetric::comm_words).cost == 100.0);
  CHECK(brute_force_critical_path(dag, CostMetric::comp_flops).cost == 64.0);
}

TEST_CASE("corrupt traces are rejected") {
  TraceDag dag;
  auto a = dag.add_vertex(vertex(1.0, {}));
  TraceVertex bad = vertex(1.0, {a});
  bad.preds = {5};  // dangling/forward edge
  dag.add_vertex(bad);
  CHECK_THROWS_AS(brute_force_critical_path(dag, CostMetric::exec_time), CorruptTraceError);
}

TEST_CASE("single compute event yields (0, 0, flops) counters") {
  TraceDag dag;
  TraceVertex comp = vertex(2.0, {}, "gemm");
  comp.flops = 1234.0;
  dag.add_vertex(comp);
  CHECK(brute_force_critical_path(dag, CostMetric::supersteps).cost == 0.0);
  CHECK(brute_force_critical_path(dag, CostMetric::comm_words).cost == 0.0);
  CHECK(brute_force_critical_path(dag, CostMetric::comp_flops).cost == 1234.0);
}
