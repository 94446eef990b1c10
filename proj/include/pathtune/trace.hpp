#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathtune/program.hpp"
#include "pathtune/signature.hpp"

namespace pathtune {

// Roles a trace vertex can play. post/join vertices are zero-cost control
// structure for nonblocking operations; everything else is a kernel
// instance that was executed or skipped.
enum class VertexRole : std::uint8_t {
  compute,
  p2p,          // one side of a blocking-resolved point-to-point
  collective,   // one member of a blocking collective
  transfer,     // the data movement of a nonblocking op, charged at wait
  post,         // nonblocking start, zero cost
  join,         // wait completion point, zero cost
  control,      // split / region markers, zero cost
};

struct TraceVertex {
  std::uint32_t id = 0;
  int rank = -1;
  VertexRole role = VertexRole::control;
  std::optional<KernelSignature> sig;
  double cost = 0.0;      // charged path cost (sampled, or stored mean when skipped)
  bool executed = true;
  std::int64_t bytes = 0;
  double flops = 0.0;
  bool collective_member = false;  // counts as one superstep on a path
  std::vector<std::uint32_t> preds;
};

// Executed schedule: program order per rank plus communication
// dependencies. Vertices are appended in a valid topological order.
struct TraceDag {
  std::vector<TraceVertex> vertices;

  std::uint32_t add_vertex(TraceVertex v);
  void dump_edges_csv(std::ostream& out) const;  // one edge per row
};

enum class CostMetric { exec_time, comm_time, comp_time, supersteps, comm_words, comp_flops };

struct CriticalPath {
  double cost = 0.0;
  std::vector<std::uint32_t> path;  // vertex ids, source to sink
  std::map<KernelSignature, std::uint64_t> signature_counts;  // on the returned path
};

// Exact longest path by topological dynamic programming. Equal-cost
// alternatives resolve to the lexicographically smallest vertex-id
// sequence. Throws CorruptTraceError on cycles or dangling edges.
CriticalPath brute_force_critical_path(const TraceDag& dag, CostMetric metric);

double metric_weight(const TraceVertex& v, CostMetric metric);

}  // namespace pathtune
