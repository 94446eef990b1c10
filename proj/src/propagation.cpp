#include "pathtune/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "pathtune/errors.hpp"
#include "pathtune/trace.hpp"

namespace pathtune {

PathKernelRecord RankState::record_view(const KernelSignature& sig) const {
  PathKernelRecord rec;
  rec.key = sig;
  if (auto it = path_freq.find(sig); it != path_freq.end()) rec.freq = it->second;
  if (auto it = meta.find(sig); it != meta.end()) {
    rec.is_predictable = it->second.is_predictable;
    rec.propagated_channels = it->second.propagated_channels;
  }
  return rec;
}

Coordinator::Coordinator(CoordinatorOptions options) : options_(options) {
  if (options_.policy == PolicyKind::eager) options_.min_one_execution_per_iteration = false;
}

void Coordinator::reset_statistics() {
  states_.clear();
  apriori_counts_.clear();
}

void Coordinator::seed_apriori(std::map<KernelSignature, std::uint64_t> counts) {
  apriori_counts_ = std::move(counts);
}

void Coordinator::begin_run(const Program& program) {
  if (states_.size() != static_cast<std::size_t>(program.world_size)) {
    states_.clear();
    states_.reserve(static_cast<std::size_t>(program.world_size));
    for (int r = 0; r < program.world_size; ++r) {
      RankState s;
      s.registry = ChannelRegistry(program.world_size);
      states_.push_back(std::move(s));
    }
  }
  control_messages_ = 0;
  for (auto& s : states_) {
    s.path = PathProfile{};
    s.path_freq.clear();
    s.posts.clear();
    for (auto& [sig, m] : s.meta) m.seen_this_iteration = false;
  }
}

void Coordinator::ensure_entries(RankState& s, const KernelSignature& sig) {
  s.local.try_emplace(sig);
  s.meta.try_emplace(sig);
  s.path_freq.try_emplace(sig, 0);
}

// Effective critical-path count feeding the confidence interval.
static std::uint64_t effective_freq(PolicyKind policy, std::uint64_t path_freq,
                                    const std::map<KernelSignature, std::uint64_t>& seeded,
                                    const KernelSignature& sig) {
  if (policy == PolicyKind::apriori) {
    auto it = seeded.find(sig);
    return it != seeded.end() && it->second > 0 ? it->second : 1;
  }
  return path_freq > 0 ? path_freq : 1;
}

bool Coordinator::needs_execution(RankState& s, const KernelSignature& sig) {
  if (options_.force_full) return true;
  KernelMeta& m = s.meta[sig];
  if (options_.policy == PolicyKind::eager) {
    // Execution stops only once statistics have been propagated across the
    // whole grid; local confidence alone never skips.
    return !m.is_predictable;
  }
  if (!m.is_predictable) {
    PathKernelRecord rec;
    rec.key = sig;
    rec.freq = effective_freq(options_.policy, s.path_freq[sig], apriori_counts_, sig);
    if (is_predictable(s.local[sig], rec, options_.confidence, options_.policy)) {
      m.is_predictable = true;
    }
  }
  bool needs = !m.is_predictable;
  if (options_.min_one_execution_per_iteration && !m.seen_this_iteration) needs = true;
  return needs;
}

void Coordinator::update_sticky(RankState& s, const KernelSignature& sig) {
  if (options_.force_full || options_.policy == PolicyKind::eager) return;
  KernelMeta& m = s.meta[sig];
  if (m.is_predictable) return;
  PathKernelRecord rec;
  rec.key = sig;
  rec.freq = effective_freq(options_.policy, s.path_freq[sig], apriori_counts_, sig);
  if (is_predictable(s.local[sig], rec, options_.confidence, options_.policy)) {
    m.is_predictable = true;
  }
}

double Coordinator::substituted_mean(const RankState& s, const KernelSignature& sig) const {
  auto it = s.local.find(sig);
  if (it == s.local.end() || it->second.count == 0 || !(it->second.mean > 0.0)) {
    throw SubstitutionUnavailable("no stored mean for skipped kernel " + sig.str());
  }
  return it->second.mean;
}

double Coordinator::record_execution(RankState& s, const KernelSignature& sig, Sampler& sampler) {
  const double cost = sampler.sample(sig);
  record_sample(s.local[sig], cost);
  KernelMeta& m = s.meta[sig];
  m.executed += 1;
  m.seen_this_iteration = true;
  return cost;
}

void Coordinator::adopt(RankState& dst, const PathProfile& src_path,
                        const std::map<KernelSignature, std::uint64_t>& src_freqs) {
  dst.path = src_path;
  if (propagate_counts()) dst.path_freq = src_freqs;
}

InternalMessage Coordinator::make_message(int rank, const KernelSignature& sig) const {
  const RankState& s = states_[static_cast<std::size_t>(rank)];
  InternalMessage msg;
  msg.exec_time = s.path.exec_time;
  auto it = s.meta.find(sig);
  msg.needs_execution = it == s.meta.end() || !it->second.is_predictable;
  if (propagate_counts()) {
    for (const auto& [key, freq] : s.path_freq) {
      msg.keys.push_back(key);
      msg.freqs.push_back(freq);
    }
  }
  return msg;
}

SideOutcome Coordinator::on_compute(int rank, const KernelSignature& sig, Sampler& sampler) {
  RankState& s = st(rank);
  ensure_entries(s, sig);
  const bool execute = needs_execution(s, sig);
  double cost;
  if (execute) {
    cost = record_execution(s, sig, sampler);
  } else {
    cost = substituted_mean(s, sig);
    s.meta[sig].skipped += 1;
  }
  s.path.exec_time += cost;
  s.path.comp_time += cost;
  s.path_freq[sig] += 1;
  update_sticky(s, sig);
  return {execute, cost};
}

PairOutcome Coordinator::on_blocking_p2p(int sender, const KernelSignature& send_sig,
                                         int receiver, const KernelSignature& recv_sig,
                                         Sampler& send_sampler, Sampler& recv_sampler) {
  RankState& ss = st(sender);
  RankState& rs = st(receiver);
  ensure_entries(ss, send_sig);
  ensure_entries(rs, recv_sig);

  // Internal sendrecv: each side sees the other's flag, time, and counts.
  const bool sender_needs = needs_execution(ss, send_sig);
  const bool receiver_needs = needs_execution(rs, recv_sig);
  control_messages_ += 2;
  const bool execute = sender_needs || receiver_needs;

  // Strictly larger path time overwrites the other side wholesale.
  if (ss.path.exec_time > rs.path.exec_time) {
    adopt(rs, ss.path, ss.path_freq);
  } else if (rs.path.exec_time > ss.path.exec_time) {
    adopt(ss, rs.path, rs.path_freq);
  }

  double send_cost, recv_cost;
  if (execute) {
    send_cost = record_execution(ss, send_sig, send_sampler);
    recv_cost = record_execution(rs, recv_sig, recv_sampler);
  } else {
    send_cost = substituted_mean(ss, send_sig);
    recv_cost = substituted_mean(rs, recv_sig);
    ss.meta[send_sig].skipped += 1;
    rs.meta[recv_sig].skipped += 1;
  }
  ss.path.exec_time += send_cost;
  ss.path.comm_time += send_cost;
  rs.path.exec_time += recv_cost;
  rs.path.comm_time += recv_cost;
  ss.path_freq[send_sig] += 1;
  rs.path_freq[recv_sig] += 1;
  update_sticky(ss, send_sig);
  update_sticky(rs, recv_sig);
  return {{execute, send_cost}, {execute, recv_cost}};
}

void Coordinator::on_nonblocking_start(int rank, const KernelSignature& sig, int post_id,
                                       int /*peer*/, const Channel* /*channel*/) {
  RankState& s = st(rank);
  ensure_entries(s, sig);
  RequestRecord rec;
  rec.sig = sig;
  rec.needs_execution = needs_execution(s, sig);
  rec.exec_time = s.path.exec_time;
  rec.path = s.path;
  if (propagate_counts()) rec.freqs = s.path_freq;
  if (rec.needs_execution) s.meta[sig].seen_this_iteration = true;
  control_messages_ += 1;  // eager dispatch of the internal message
  if (static_cast<std::size_t>(post_id) != s.posts.size()) {
    throw std::logic_error("nonblocking post ids must be sequential per rank");
  }
  s.posts.push_back(std::move(rec));
}

SideOutcome Coordinator::on_blocking_with_post(int rank, const KernelSignature& sig, int peer,
                                               int peer_post_id, Sampler& sampler) {
  RankState& s = st(rank);
  ensure_entries(s, sig);
  RequestRecord& peer_rec = st(peer).posts.at(static_cast<std::size_t>(peer_post_id));

  // Reply with this side's entry snapshot for the peer's wait.
  peer_rec.have_reply = true;
  peer_rec.reply_exec_time = s.path.exec_time;
  peer_rec.reply_path = s.path;
  if (propagate_counts()) peer_rec.reply_freqs = s.path_freq;
  control_messages_ += 1;

  const bool execute = needs_execution(s, sig) || peer_rec.needs_execution;
  if (peer_rec.exec_time > s.path.exec_time) {
    adopt(s, peer_rec.path, peer_rec.freqs);
  }
  double cost;
  if (execute) {
    cost = record_execution(s, sig, sampler);
  } else {
    cost = substituted_mean(s, sig);
    s.meta[sig].skipped += 1;
  }
  s.path.exec_time += cost;
  s.path.comm_time += cost;
  s.path_freq[sig] += 1;
  update_sticky(s, sig);
  return {execute, cost};
}

SideOutcome Coordinator::on_wait_p2p(int rank, int local_post_id, int peer, int peer_post_id,
                                     Sampler& sampler) {
  RankState& s = st(rank);
  RequestRecord& rec = s.posts.at(static_cast<std::size_t>(local_post_id));
  const KernelSignature& sig = rec.sig;

  double peer_time;
  const PathProfile* peer_path = nullptr;
  const std::map<KernelSignature, std::uint64_t>* peer_freqs = nullptr;
  if (peer_post_id >= 0) {
    const RequestRecord& prec = st(peer).posts.at(static_cast<std::size_t>(peer_post_id));
    peer_time = prec.exec_time;
    peer_path = &prec.path;
    peer_freqs = &prec.freqs;
  } else {
    if (!rec.have_reply) throw std::logic_error("wait resolved before the blocking peer");
    peer_time = rec.reply_exec_time;
    peer_path = &rec.reply_path;
    peer_freqs = &rec.reply_freqs;
  }

  const bool execute = rec.needs_execution;
  double cost;
  if (execute) {
    cost = record_execution(s, sig, sampler);
  } else {
    cost = substituted_mean(s, sig);
    s.meta[sig].skipped += 1;
  }

  // Transfer spans from the later post; it only moves the path when it
  // beats the local chain (overlap with intervening work).
  const double transfer_done = std::max(rec.exec_time, peer_time) + cost;
  if (transfer_done > s.path.exec_time) {
    const bool peer_dominates = peer_time > rec.exec_time;
    const PathProfile& base_path = peer_dominates ? *peer_path : rec.path;
    const auto& base_freqs = peer_dominates ? *peer_freqs : rec.freqs;
    adopt(s, base_path, base_freqs);
    s.path.exec_time = transfer_done;
    s.path.comm_time += cost;
    s.path_freq[sig] += 1;
  } else if (count_freq_always()) {
    s.path_freq[sig] += 1;
  }
  update_sticky(s, sig);
  return {execute, cost};
}

SideOutcome Coordinator::on_wait_collective(int rank, int local_post_id,
                                            std::span<const int> members,
                                            std::span<const int> member_post_ids,
                                            Sampler& sampler) {
  RankState& s = st(rank);
  RequestRecord& rec = s.posts.at(static_cast<std::size_t>(local_post_id));
  const KernelSignature& sig = rec.sig;

  // Reduction over every member's post-time snapshot (max time, argmax
  // state; lowest member id wins ties).
  double group_time = -1.0;
  int arg = -1;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const RequestRecord& prec =
        st(members[i]).posts.at(static_cast<std::size_t>(member_post_ids[i]));
    if (prec.exec_time > group_time) {
      group_time = prec.exec_time;
      arg = static_cast<int>(i);
    }
  }
  const RequestRecord& dom = st(members[arg]).posts.at(static_cast<std::size_t>(member_post_ids[arg]));

  const bool execute = rec.needs_execution;
  double cost;
  if (execute) {
    cost = record_execution(s, sig, sampler);
  } else {
    cost = substituted_mean(s, sig);
    s.meta[sig].skipped += 1;
  }

  const double transfer_done = group_time + cost;
  if (transfer_done > s.path.exec_time) {
    adopt(s, dom.path, dom.freqs);
    s.path.exec_time = transfer_done;
    s.path.comm_time += cost;
    s.path_freq[sig] += 1;
  } else if (count_freq_always()) {
    s.path_freq[sig] += 1;
  }
  update_sticky(s, sig);
  return {execute, cost};
}

SideOutcome Coordinator::on_blocking_collective(const Channel& channel,
                                                const KernelSignature& sig,
                                                std::span<const int> members, Sampler& sampler) {
  // Collect every member's internal message.
  std::vector<bool> needs(members.size());
  double group_time = -1.0;
  int arg = -1;
  int predictable_members = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    RankState& m = st(members[i]);
    ensure_entries(m, sig);
    needs[i] = needs_execution(m, sig);
    if (!needs[i]) ++predictable_members;
    if (m.path.exec_time > group_time) {
      group_time = m.path.exec_time;
      arg = static_cast<int>(i);
    }
  }
  control_messages_ += members.size();

  // Skip only when enough members agree the kernel is predictable.
  const int quorum = static_cast<int>(
      std::ceil(options_.collective_skip_quorum * static_cast<double>(members.size())));
  const bool execute = predictable_members < quorum;

  // Everyone except the lowest-id member at the maximum adopts its state.
  const PathProfile dom_path = st(members[arg]).path;
  const auto dom_freqs = st(members[arg]).path_freq;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (static_cast<int>(i) == arg) continue;
    adopt(st(members[i]), dom_path, dom_freqs);
  }

  double cost;
  if (execute) {
    cost = sampler.sample(sig);
    for (int r : members) {
      RankState& m = st(r);
      record_sample(m.local[sig], cost);
      m.meta[sig].executed += 1;
      m.meta[sig].seen_this_iteration = true;
    }
  } else {
    cost = substituted_mean(st(members[0]), sig);
    for (int r : members) st(r).meta[sig].skipped += 1;
  }
  for (int r : members) {
    RankState& m = st(r);
    m.path.exec_time += cost;
    m.path.comm_time += cost;
    m.path_freq[sig] += 1;
    update_sticky(m, sig);
  }

  if (options_.policy == PolicyKind::eager && !options_.force_full) {
    // Piggyback every kernel whose local statistics are confident and for
    // which this channel extends the propagated set toward a grid basis.
    std::set<KernelSignature> batch;
    for (int r : members) {
      RankState& m = st(r);
      for (const auto& [key, profile] : m.local) {
        const KernelMeta& km = m.meta[key];
        if (km.is_predictable) continue;
        PathKernelRecord rec;
        rec.key = key;
        rec.freq = m.path_freq.count(key) && m.path_freq[key] > 0 ? m.path_freq[key] : 1;
        if (!(relative_ci(profile, rec.freq, options_.confidence) <=
              options_.confidence.tolerance)) {
          continue;
        }
        rec.propagated_channels = km.propagated_channels;
        if (!is_propagation_admissible(rec, channel, m.registry)) continue;
        batch.insert(key);
      }
    }
    for (const auto& key : batch) propagate_statistics(key, channel, members);
  }
  return {execute, cost};
}

void Coordinator::propagate_statistics(const KernelSignature& sig, const Channel& channel,
                                       std::span<const int> members) {
  KernelProfile merged;
  for (int r : members) {
    RankState& m = st(r);
    ensure_entries(m, sig);
    merged = merge_profiles(merged, m.local[sig]);
  }
  control_messages_ += members.size();
  bool maximal = false;
  for (int r : members) {
    RankState& m = st(r);
    m.local[sig] = merged;
    m.meta[sig].propagated_channels.insert(channel.hash);
    const AggregateChannel* agg = m.registry.find(accumulated_hash(m.record_view(sig)));
    if (agg && agg->is_maximal) maximal = true;
  }
  if (maximal) {
    // Policy agreement reached across the whole grid: switch off everywhere.
    for (auto& s : states_) {
      ensure_entries(s, sig);
      s.local[sig] = merged;
      s.meta[sig].is_predictable = true;
    }
  }
}

void Coordinator::on_comm_split(const Channel& channel, std::span<const int> members) {
  double group_time = -1.0;
  int arg = -1;
  for (std::size_t i = 0; i < members.size(); ++i) {
    RankState& m = st(members[i]);
    m.registry.register_split(channel);
    if (m.path.exec_time > group_time) {
      group_time = m.path.exec_time;
      arg = static_cast<int>(i);
    }
  }
  control_messages_ += members.size();
  const PathProfile dom_path = st(members[arg]).path;
  const auto dom_freqs = st(members[arg]).path_freq;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (static_cast<int>(i) == arg) continue;
    adopt(st(members[i]), dom_path, dom_freqs);
  }
}

double Coordinator::predicted_time() const {
  double best = 0.0;
  for (const auto& s : states_) best = std::max(best, s.path.exec_time);
  return best;
}

int Coordinator::slowest_rank() const {
  int best = 0;
  for (int r = 1; r < world_size(); ++r) {
    if (states_[static_cast<std::size_t>(r)].path.exec_time >
        states_[static_cast<std::size_t>(best)].path.exec_time) {
      best = r;
    }
  }
  return best;
}

std::map<KernelSignature, std::uint64_t> Coordinator::critical_freqs() const {
  std::map<KernelSignature, std::uint64_t> out;
  const RankState& s = states_[static_cast<std::size_t>(slowest_rank())];
  for (const auto& [sig, f] : s.path_freq) {
    if (f > 0) out[sig] = f;
  }
  return out;
}

std::vector<Coordinator::KernelRow> Coordinator::kernel_table() const {
  std::map<KernelSignature, KernelProfile> merged;
  std::map<KernelSignature, std::pair<std::uint64_t, std::uint64_t>> counters;
  for (const auto& s : states_) {
    for (const auto& [sig, profile] : s.local) {
      merged[sig] = merge_profiles(merged[sig], profile);
    }
    for (const auto& [sig, m] : s.meta) {
      counters[sig].first += m.executed;
      counters[sig].second += m.skipped;
    }
  }
  const auto freqs = critical_freqs();
  std::vector<KernelRow> out;
  out.reserve(merged.size());
  for (const auto& [sig, profile] : merged) {
    KernelRow row;
    row.sig = sig;
    row.count = profile.count;
    row.mean = profile.mean;
    row.variance = profile.variance();
    if (auto it = freqs.find(sig); it != freqs.end()) row.freq = it->second;
    if (auto it = counters.find(sig); it != counters.end()) {
      row.executed = it->second.first;
      row.skipped = it->second.second;
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::map<KernelSignature, std::uint64_t> apriori_counts(const Program& program,
                                                        const GroundTruthModel& model) {
  CoordinatorOptions options;
  options.policy = PolicyKind::online;
  options.force_full = true;
  Coordinator full(options);
  RunResult res = run(program, model, full);
  auto cp = brute_force_critical_path(res.dag, CostMetric::exec_time);
  return cp.signature_counts;
}

}  // namespace pathtune
