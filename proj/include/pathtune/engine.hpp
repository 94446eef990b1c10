#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pathtune/cost_model.hpp"
#include "pathtune/program.hpp"
#include "pathtune/trace.hpp"

namespace pathtune {

// Draws ground-truth costs for one rank, keyed by (seed, rank, signature,
// occurrence index). Skipped occurrences advance the index without drawing,
// so runs with equal seeds see identical draws wherever execution overlaps.
class Sampler {
 public:
  Sampler(const GroundTruthModel& model, int rank) : model_(model), rank_(rank) {}

  double sample(const KernelSignature& sig) {
    return model_.sample_cost_keyed(sig, next_key(sig));
  }
  void advance(const KernelSignature& sig) { next_key(sig); }

 private:
  std::uint64_t next_key(const KernelSignature& sig) {
    const std::uint64_t index = counters_[sig]++;
    std::uint64_t h = hash_mix(model_.seed, static_cast<std::uint64_t>(rank_) + 1);
    h = hash_mix(h, sig.hash());
    return hash_mix(h, index);
  }

  const GroundTruthModel& model_;
  int rank_;
  std::map<KernelSignature, std::uint64_t> counters_;
};

struct SideOutcome {
  bool executed = true;
  double cost = 0.0;  // charged to the path: sampled when executed, stored mean when skipped
};

struct PairOutcome {
  SideOutcome send;
  SideOutcome recv;
};

// Interception points, called by the simulation at the same places a
// profiler would sit. The interceptor owns all per-rank profiling state and
// decides execute-vs-skip; the engine owns clocks, matching, and the trace.
class Interceptor {
 public:
  virtual ~Interceptor() = default;

  virtual void begin_run(const Program& program) = 0;
  virtual void end_run() {}

  virtual SideOutcome on_compute(int rank, const KernelSignature& sig, Sampler& sampler) = 0;

  // Matched blocking send/recv, resolved together.
  virtual PairOutcome on_blocking_p2p(int sender, const KernelSignature& send_sig, int receiver,
                                      const KernelSignature& recv_sig, Sampler& send_sampler,
                                      Sampler& recv_sampler) = 0;

  // Nonblocking start. post_id is the rank-local post index used by later
  // hooks; peer is the partner rank for p2p, channel is set for collectives.
  virtual void on_nonblocking_start(int rank, const KernelSignature& sig, int post_id, int peer,
                                    const Channel* channel) = 0;

  // Blocking side of a pair whose other side posted nonblocking.
  virtual SideOutcome on_blocking_with_post(int rank, const KernelSignature& sig, int peer,
                                            int peer_post_id, Sampler& sampler) = 0;

  // Wait completing a nonblocking p2p operation. peer_post_id >= 0 when the
  // peer side was itself nonblocking; otherwise the peer resolved earlier
  // through on_blocking_with_post.
  virtual SideOutcome on_wait_p2p(int rank, int local_post_id, int peer, int peer_post_id,
                                  Sampler& sampler) = 0;

  // Wait completing a nonblocking collective; one call per waiting member.
  virtual SideOutcome on_wait_collective(int rank, int local_post_id,
                                         std::span<const int> members,
                                         std::span<const int> member_post_ids,
                                         Sampler& sampler) = 0;

  // Blocking collective with every member arrived; one call for the group.
  // The returned cost is charged identically to all members.
  virtual SideOutcome on_blocking_collective(const Channel& channel, const KernelSignature& sig,
                                             std::span<const int> members, Sampler& sampler) = 0;

  virtual void on_comm_split(const Channel& channel, std::span<const int> members) = 0;
};

struct RunResult {
  TraceDag dag;
  std::vector<double> wall_clock;  // simulated per-rank finish time (skips cost nothing)
  double makespan = 0.0;
  std::uint64_t total_instances = 0;
  std::uint64_t executed_instances = 0;
};

// Deterministic event-driven execution. Kernel starts when its rank is free
// and all dependency messages have arrived; identical (program, model,
// interceptor state, seed) give bit-identical results. The program must
// have passed validate().
RunResult run(const Program& program, const GroundTruthModel& model, Interceptor& interceptor);

}  // namespace pathtune
