#include "pathtune/channels.hpp"

#include <algorithm>
#include <optional>

#include "pathtune/errors.hpp"

namespace pathtune {

std::uint64_t channel_hash(const std::vector<ChannelDim>& dims) {
  std::vector<ChannelDim> canon = dims;
  std::sort(canon.begin(), canon.end());
  // splitmix64-style mixing over the sorted (stride,size) pairs
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    std::uint64_t z = h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    h = z ^ (z >> 31);
  };
  for (const auto& d : canon) {
    mix(static_cast<std::uint64_t>(d.stride));
    mix(static_cast<std::uint64_t>(d.size));
  }
  return h;
}

std::vector<int> Channel::members() const {
  if (!cartesian) return raw_members;
  std::vector<int> out{static_cast<int>(offset)};
  for (const auto& d : dims) {
    std::vector<int> next;
    next.reserve(out.size() * d.size);
    for (int base : out) {
      for (std::int64_t i = 0; i < d.size; ++i) {
        next.push_back(base + static_cast<int>(i * d.stride));
      }
    }
    out = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t Channel::member_count() const {
  if (!cartesian) return static_cast<std::int64_t>(raw_members.size());
  std::int64_t n = 1;
  for (const auto& d : dims) n *= d.size;
  return n;
}

namespace {

// Recursive factorization of a sorted, distinct, zero-based delta set.
// Tries the longest run first, backing off to shorter divisors when the
// block partition or the recursion on the bases fails.
std::optional<std::vector<ChannelDim>> factorize(const std::vector<std::int64_t>& deltas) {
  if (deltas.size() == 1) return std::vector<ChannelDim>{};
  const std::int64_t stride = deltas[1] - deltas[0];
  if (stride <= 0) return std::nullopt;

  std::set<std::int64_t> present(deltas.begin(), deltas.end());
  std::int64_t run = 1;
  while (present.count(run * stride)) ++run;

  const std::int64_t n = static_cast<std::int64_t>(deltas.size());
  for (std::int64_t size = std::min(run, n); size >= 2; --size) {
    if (n % size != 0) continue;
    // Partition into blocks {base, base+stride, ..., base+(size-1)*stride}.
    std::set<std::int64_t> remaining = present;
    std::vector<std::int64_t> bases;
    bool ok = true;
    while (!remaining.empty() && ok) {
      const std::int64_t base = *remaining.begin();
      for (std::int64_t j = 0; j < size; ++j) {
        if (remaining.erase(base + j * stride) == 0) {
          ok = false;
          break;
        }
      }
      if (ok) bases.push_back(base);
    }
    if (!ok) continue;
    auto rest = factorize(bases);
    if (!rest) continue;
    rest->insert(rest->begin(), ChannelDim{stride, size});
    return rest;
  }
  return std::nullopt;
}

}  // namespace

Channel infer_channel(const std::vector<int>& sorted_ranks) {
  if (sorted_ranks.size() < 2) {
    throw NonCartesianError("channel needs at least 2 ranks");
  }
  for (std::size_t i = 1; i < sorted_ranks.size(); ++i) {
    if (sorted_ranks[i] <= sorted_ranks[i - 1]) {
      throw NonCartesianError("rank list must be sorted ascending and distinct");
    }
  }
  std::vector<std::int64_t> deltas(sorted_ranks.size());
  for (std::size_t i = 0; i < sorted_ranks.size(); ++i) {
    deltas[i] = sorted_ranks[i] - sorted_ranks[0];
  }
  auto dims = factorize(deltas);
  if (!dims) {
    throw NonCartesianError("rank list is not a cartesian product of arithmetic progressions");
  }
  Channel ch;
  ch.offset = sorted_ranks[0];
  ch.dims = *dims;
  ch.hash = channel_hash(ch.dims);
  return ch;
}

Channel make_channel(std::string name, std::int64_t offset, std::vector<ChannelDim> dims) {
  Channel ch;
  ch.name = std::move(name);
  ch.offset = offset;
  ch.dims = std::move(dims);
  ch.hash = channel_hash(ch.dims);
  return ch;
}

ChannelRegistry::ChannelRegistry(int world_size) : world_size_(world_size) {
  AggregateChannel world;
  if (world_size >= 2) world.dims = {ChannelDim{1, world_size}};
  world.hash = channel_hash(world.dims);
  world.offset = 0;
  world.members.resize(world_size);
  for (int r = 0; r < world_size; ++r) world.members[r] = r;
  world.constituents = {world.hash};
  world.is_maximal = true;
  world_hash_ = world.hash;
  table_.emplace(world.hash, std::move(world));
}

const AggregateChannel* ChannelRegistry::find(std::uint64_t hash) const {
  auto it = table_.find(hash);
  return it == table_.end() ? nullptr : &it->second;
}

void ChannelRegistry::register_split(const Channel& channel) {
  if (!channel.cartesian) return;  // profiled but never aggregated
  AggregateChannel entry;
  entry.constituents = {channel.hash};
  entry.dims = channel.dims;
  std::sort(entry.dims.begin(), entry.dims.end());
  entry.offset = channel.offset;
  entry.members = channel.members();
  entry.hash = channel.hash;
  entry.is_maximal =
      static_cast<int>(entry.members.size()) == world_size_;
  insert_and_close(std::move(entry));
}

namespace {

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Combine two aggregates whose sorted member sets meet in exactly one rank.
// Returns nullopt when the product is not a clean cartesian extension.
std::optional<AggregateChannel> combine(const AggregateChannel& a, const AggregateChannel& b,
                                        int world_size) {
  std::vector<int> inter;
  std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                        std::back_inserter(inter));
  if (inter.size() != 1) return std::nullopt;
  const int corner = inter.front();

  AggregateChannel out;
  out.members.reserve(a.members.size() * b.members.size());
  for (int x : a.members) {
    for (int y : b.members) {
      out.members.push_back(x + y - corner);
    }
  }
  std::sort(out.members.begin(), out.members.end());
  if (std::adjacent_find(out.members.begin(), out.members.end()) != out.members.end()) {
    return std::nullopt;
  }
  if (out.members.front() < 0 || out.members.back() >= world_size) return std::nullopt;

  out.constituents = a.constituents;
  out.constituents.insert(b.constituents.begin(), b.constituents.end());
  out.dims = a.dims;
  out.dims.insert(out.dims.end(), b.dims.begin(), b.dims.end());
  std::sort(out.dims.begin(), out.dims.end());
  std::int64_t volume = 1;
  for (const auto& d : out.dims) volume *= d.size;
  if (volume != static_cast<std::int64_t>(out.members.size())) return std::nullopt;
  out.offset = out.members.front();
  out.hash = a.hash ^ b.hash;
  out.is_maximal = static_cast<int>(out.members.size()) == world_size;
  return out;
}

}  // namespace

void ChannelRegistry::insert_and_close(AggregateChannel entry) {
  std::vector<AggregateChannel> worklist;
  worklist.push_back(std::move(entry));
  while (!worklist.empty()) {
    AggregateChannel cur = std::move(worklist.back());
    worklist.pop_back();
    auto it = table_.find(cur.hash);
    if (it != table_.end()) {
      if (it->second.dims != cur.dims) {
        throw HashCollisionError("channel hash collision for distinct geometries");
      }
      continue;  // idempotent re-registration
    }
    for (const auto& [h, other] : table_) {
      std::vector<std::uint64_t> shared;
      std::set_intersection(cur.constituents.begin(), cur.constituents.end(),
                            other.constituents.begin(), other.constituents.end(),
                            std::back_inserter(shared));
      if (!shared.empty()) continue;
      if (is_subset(cur.members, other.members) || is_subset(other.members, cur.members)) {
        continue;
      }
      if (auto agg = combine(cur, other, world_size_)) {
        worklist.push_back(std::move(*agg));
      }
    }
    table_.emplace(cur.hash, std::move(cur));
  }
}

std::uint64_t accumulated_hash(const PathKernelRecord& record) {
  std::uint64_t acc = 0;
  for (std::uint64_t h : record.propagated_channels) acc ^= h;
  return acc;
}

bool is_propagation_admissible(const PathKernelRecord& record, const Channel& channel,
                               const ChannelRegistry& registry) {
  if (!channel.cartesian) return false;
  if (record.propagated_channels.count(channel.hash)) return false;
  return registry.contains(accumulated_hash(record) ^ channel.hash);
}

}  // namespace pathtune
