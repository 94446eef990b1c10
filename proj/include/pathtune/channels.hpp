#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pathtune/kernel_stats.hpp"

namespace pathtune {

// One cartesian dimension of a communicator: every size-th member is
// stride apart in global rank space.
struct ChannelDim {
  std::int64_t stride = 1;
  std::int64_t size = 2;

  friend bool operator==(const ChannelDim&, const ChannelDim&) = default;
  friend auto operator<=>(const ChannelDim&, const ChannelDim&) = default;
};

// Deterministic 64-bit hash of a dims list. Offsets do not participate:
// translated copies of the same fiber pool their identity.
std::uint64_t channel_hash(const std::vector<ChannelDim>& dims);

// Communicator geometry on the global rank space. Cartesian channels are
// generated by (offset, dims); non-cartesian ones keep an explicit member
// list and are excluded from aggregation.
struct Channel {
  std::string name;
  std::int64_t offset = 0;
  std::vector<ChannelDim> dims;
  std::uint64_t hash = 0;
  bool is_maximal = false;
  bool cartesian = true;
  std::vector<int> raw_members;  // only when !cartesian

  std::vector<int> members() const;
  std::int64_t member_count() const;
};

// Greedy mixed-radix factorization of a sorted distinct rank list:
// smallest stride first, longest exact run, recurse on the block bases.
// Throws NonCartesianError when no factorization reproduces the input.
Channel infer_channel(const std::vector<int>& sorted_ranks);

// Convenience: channel from explicit geometry (members generated).
Channel make_channel(std::string name, std::int64_t offset, std::vector<ChannelDim> dims);

// XOR-combination of channels whose member sets meet in exactly one rank.
// Such aggregates accumulate toward a basis of the full cartesian grid.
struct AggregateChannel {
  std::set<std::uint64_t> constituents;  // hashes of the combined base channels
  std::vector<ChannelDim> dims;          // union of constituent dims
  std::int64_t offset = 0;
  std::vector<int> members;
  std::uint64_t hash = 0;  // XOR of constituent hashes
  bool is_maximal = false; // product of sizes == world size
};

// Per-rank table of channels and aggregates, keyed by hash. Initialized
// with the world channel (maximal). register_split closes the table under
// pairwise XOR combination.
class ChannelRegistry {
 public:
  explicit ChannelRegistry(int world_size);

  // Insert a split channel and rebuild aggregate closure. Re-registering
  // the same dims is a no-op; the same hash with different dims aborts
  // with HashCollisionError.
  void register_split(const Channel& channel);

  bool contains(std::uint64_t hash) const { return table_.count(hash) != 0; }
  const AggregateChannel* find(std::uint64_t hash) const;
  const AggregateChannel& world() const { return table_.at(world_hash_); }
  int world_size() const { return world_size_; }
  const std::map<std::uint64_t, AggregateChannel>& table() const { return table_; }

 private:
  void insert_and_close(AggregateChannel entry);

  int world_size_;
  std::uint64_t world_hash_;
  std::map<std::uint64_t, AggregateChannel> table_;
};

// True when propagating the record's statistics along this channel extends
// toward a grid basis: the channel is new to the record and XOR-combining
// it with the channels already used yields a registered aggregate.
bool is_propagation_admissible(const PathKernelRecord& record, const Channel& channel,
                               const ChannelRegistry& registry);

// Hash of the record's accumulated propagated-channel set.
std::uint64_t accumulated_hash(const PathKernelRecord& record);

}  // namespace pathtune
