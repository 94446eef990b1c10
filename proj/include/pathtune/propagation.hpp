#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "pathtune/channels.hpp"
#include "pathtune/engine.hpp"
#include "pathtune/kernel_stats.hpp"

namespace pathtune {

// Running critical-path cost model of one rank (the pathset). exec_time is
// the ordering key; the other accumulators ride along the same path.
struct PathProfile {
  double exec_time = 0.0;
  double comm_time = 0.0;
  double comp_time = 0.0;
};

// Piggybacked payload exchanged at every interception point.
struct InternalMessage {
  bool needs_execution = true;
  double exec_time = 0.0;
  std::vector<KernelSignature> keys;
  std::vector<std::uint64_t> freqs;  // parallel to keys
  std::uint64_t kernel_agg_count = 0;
};

// Persistent per-kernel bookkeeping beside the local profile.
struct KernelMeta {
  bool is_predictable = false;  // sticky; under eager this is the global switch-off
  std::set<std::uint64_t> propagated_channels;
  std::uint64_t executed = 0;
  std::uint64_t skipped = 0;
  bool seen_this_iteration = false;
};

// Snapshot stored at a nonblocking post, consumed by the matching wait.
struct RequestRecord {
  KernelSignature sig;
  bool needs_execution = true;
  double exec_time = 0.0;
  PathProfile path;
  std::map<KernelSignature, std::uint64_t> freqs;
  // entry snapshot of a blocking peer, filled when that side resolves
  bool have_reply = false;
  double reply_exec_time = 0.0;
  PathProfile reply_path;
  std::map<KernelSignature, std::uint64_t> reply_freqs;
};

struct RankState {
  PathProfile path;
  std::map<KernelSignature, KernelProfile> local;          // locally-executed stats
  std::map<KernelSignature, std::uint64_t> path_freq;      // critical-path counts
  std::map<KernelSignature, KernelMeta> meta;
  ChannelRegistry registry{1};
  std::vector<RequestRecord> posts;

  PathKernelRecord record_view(const KernelSignature& sig) const;
};

struct CoordinatorOptions {
  PolicyKind policy = PolicyKind::online;
  ConfidenceConfig confidence;
  // All policies except eager execute each kernel at least once per
  // iteration; eager may switch a kernel off before an iteration touches it.
  bool min_one_execution_per_iteration = true;
  // Fraction of members that must deem a communication kernel predictable
  // before it is skipped. 1.0 = all members (the strict default).
  double collective_skip_quorum = 1.0;
  bool force_full = false;  // ground-truth mode: execute everything
};

// The interception layer: builds internal messages, max-reduces path
// execution times, adopts dominant-path kernel frequencies, decides
// selective execution per policy, and propagates statistics along
// aggregate channels under eager propagation.
class Coordinator final : public Interceptor {
 public:
  explicit Coordinator(CoordinatorOptions options);

  // Full reset (between configurations): statistics, flags, registries.
  void reset_statistics();
  // Seed critical-path counts from an offline full execution (a priori).
  void seed_apriori(std::map<KernelSignature, std::uint64_t> counts);

  // Each run() is one tuning iteration; per-run state resets here and
  // statistics persist.
  void begin_run(const Program& program) override;

  SideOutcome on_compute(int rank, const KernelSignature& sig, Sampler& sampler) override;
  PairOutcome on_blocking_p2p(int sender, const KernelSignature& send_sig, int receiver,
                              const KernelSignature& recv_sig, Sampler& send_sampler,
                              Sampler& recv_sampler) override;
  void on_nonblocking_start(int rank, const KernelSignature& sig, int post_id, int peer,
                            const Channel* channel) override;
  SideOutcome on_blocking_with_post(int rank, const KernelSignature& sig, int peer,
                                    int peer_post_id, Sampler& sampler) override;
  SideOutcome on_wait_p2p(int rank, int local_post_id, int peer, int peer_post_id,
                          Sampler& sampler) override;
  SideOutcome on_wait_collective(int rank, int local_post_id, std::span<const int> members,
                                 std::span<const int> member_post_ids, Sampler& sampler) override;
  SideOutcome on_blocking_collective(const Channel& channel, const KernelSignature& sig,
                                     std::span<const int> members, Sampler& sampler) override;
  void on_comm_split(const Channel& channel, std::span<const int> members) override;

  // Merge one kernel's profiles across the channel members, redistribute,
  // and switch execution off globally once the accumulated channels form a
  // maximal aggregate.
  void propagate_statistics(const KernelSignature& sig, const Channel& channel,
                            std::span<const int> members);

  InternalMessage make_message(int rank, const KernelSignature& sig) const;

  const RankState& state(int rank) const { return states_.at(static_cast<std::size_t>(rank)); }
  int world_size() const { return static_cast<int>(states_.size()); }
  double predicted_time() const;  // max over ranks of path exec_time
  int slowest_rank() const;
  std::map<KernelSignature, std::uint64_t> critical_freqs() const;  // slowest rank's table
  std::uint64_t control_messages() const { return control_messages_; }

  struct KernelRow {
    KernelSignature sig;
    std::uint64_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::uint64_t freq = 0;
    std::uint64_t executed = 0;
    std::uint64_t skipped = 0;
  };
  // Profiles merged across ranks; freq from the slowest rank's table.
  std::vector<KernelRow> kernel_table() const;

  const CoordinatorOptions& options() const { return options_; }
  void set_force_full(bool v) { options_.force_full = v; }
  void set_tolerance(double epsilon) { options_.confidence.tolerance = epsilon; }

 private:
  RankState& st(int rank) { return states_[static_cast<std::size_t>(rank)]; }
  void ensure_entries(RankState& s, const KernelSignature& sig);
  bool needs_execution(RankState& s, const KernelSignature& sig);
  void update_sticky(RankState& s, const KernelSignature& sig);
  double substituted_mean(const RankState& s, const KernelSignature& sig) const;
  bool propagate_counts() const {
    return options_.policy == PolicyKind::online || options_.policy == PolicyKind::eager;
  }
  bool count_freq_always() const { return !propagate_counts(); }
  double record_execution(RankState& s, const KernelSignature& sig, Sampler& sampler);
  void adopt(RankState& dst, const PathProfile& src_path,
             const std::map<KernelSignature, std::uint64_t>& src_freqs);

  CoordinatorOptions options_;
  std::vector<RankState> states_;
  std::map<KernelSignature, std::uint64_t> apriori_counts_;
  std::uint64_t control_messages_ = 0;
};

// One offline full execution; returns the per-signature counts along the
// execution-time critical path, for seeding the a priori policy.
std::map<KernelSignature, std::uint64_t> apriori_counts(const Program& program,
                                                        const GroundTruthModel& model);

}  // namespace pathtune
