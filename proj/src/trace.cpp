#include "pathtune/trace.hpp"

#include <algorithm>
#include <ostream>

#include "pathtune/errors.hpp"

namespace pathtune {

std::uint32_t TraceDag::add_vertex(TraceVertex v) {
  v.id = static_cast<std::uint32_t>(vertices.size());
  vertices.push_back(std::move(v));
  return vertices.back().id;
}

void TraceDag::dump_edges_csv(std::ostream& out) const {
  out << "src,dst,dst_rank,dst_role,dst_signature,dst_cost,dst_executed\n";
  for (const auto& v : vertices) {
    for (auto p : v.preds) {
      out << p << ',' << v.id << ',' << v.rank << ',' << static_cast<int>(v.role) << ','
          << (v.sig ? v.sig->str() : "-") << ',' << v.cost << ',' << (v.executed ? 1 : 0)
          << '\n';
    }
  }
}

double metric_weight(const TraceVertex& v, CostMetric metric) {
  const bool comm = v.role == VertexRole::p2p || v.role == VertexRole::collective ||
                    v.role == VertexRole::transfer;
  switch (metric) {
    case CostMetric::exec_time:
      return v.cost;
    case CostMetric::comm_time:
      return comm ? v.cost : 0.0;
    case CostMetric::comp_time:
      return v.role == VertexRole::compute ? v.cost : 0.0;
    case CostMetric::supersteps:
      return v.collective_member ? 1.0 : 0.0;
    case CostMetric::comm_words:
      return comm ? static_cast<double>(v.bytes) / 8.0 : 0.0;
    case CostMetric::comp_flops:
      return v.role == VertexRole::compute ? v.flops : 0.0;
  }
  return 0.0;
}

namespace {

// Vertex-id sequence of the chosen path ending at v, source first.
std::vector<std::uint32_t> path_sequence(const std::vector<std::int64_t>& parent,
                                         std::uint32_t v) {
  std::vector<std::uint32_t> seq;
  std::int64_t cur = v;
  while (cur >= 0) {
    seq.push_back(static_cast<std::uint32_t>(cur));
    cur = parent[static_cast<std::size_t>(cur)];
  }
  std::reverse(seq.begin(), seq.end());
  return seq;
}

bool sequence_less(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

CriticalPath brute_force_critical_path(const TraceDag& dag, CostMetric metric) {
  const std::size_t n = dag.vertices.size();
  std::vector<double> completion(n, 0.0);
  std::vector<std::int64_t> parent(n, -1);

  for (std::size_t i = 0; i < n; ++i) {
    const TraceVertex& v = dag.vertices[i];
    if (v.id != i) throw CorruptTraceError("vertex ids out of order");
    double best = 0.0;
    std::int64_t best_pred = -1;
    for (auto p : v.preds) {
      if (p >= i) throw CorruptTraceError("edge violates topological id order (cycle?)");
      const double c = completion[p];
      if (best_pred < 0 || c > best) {
        best = c;
        best_pred = p;
      } else if (c == best) {
        auto cand = path_sequence(parent, p);
        auto cur = path_sequence(parent, static_cast<std::uint32_t>(best_pred));
        cand.push_back(static_cast<std::uint32_t>(i));
        cur.push_back(static_cast<std::uint32_t>(i));
        if (sequence_less(cand, cur)) best_pred = p;
      }
    }
    parent[i] = best_pred;
    completion[i] = best + metric_weight(v, metric);
  }

  CriticalPath out;
  if (n == 0) return out;
  std::uint32_t end = 0;
  for (std::uint32_t v = 1; v < n; ++v) {
    if (completion[v] > completion[end]) {
      end = v;
    } else if (completion[v] == completion[end]) {
      auto cand = path_sequence(parent, v);
      auto cur = path_sequence(parent, end);
      if (sequence_less(cand, cur)) end = v;
    }
  }
  out.cost = completion[end];
  out.path = path_sequence(parent, end);
  for (auto id : out.path) {
    const TraceVertex& v = dag.vertices[id];
    if (v.sig) out.signature_counts[*v.sig] += 1;
  }
  return out;
}

}  // namespace pathtune
