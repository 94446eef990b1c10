#include "pathtune/engine.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

#include "pathtune/errors.hpp"

namespace pathtune {

namespace {

struct P2pSide {
  bool arrived = false;
  bool nonblocking = false;
  bool resolved = false;
  double ref_wall = 0.0;          // post wall (nonblocking) or entry wall (blocking)
  std::int64_t ref_vertex = -1;   // post vertex or entry prev vertex
  int post_id = -1;
};

struct P2pSlot {
  P2pSide send;
  P2pSide recv;
};

struct P2pQueue {
  std::vector<P2pSlot> slots;
  std::size_t send_claimed = 0;
  std::size_t recv_claimed = 0;

  P2pSlot& slot(std::size_t i) {
    if (i >= slots.size()) slots.resize(i + 1);
    return slots[i];
  }
};

struct CollSlot {
  bool initialized = false;
  EventKind kind = EventKind::bcast;
  int root = -1;
  std::int64_t bytes = 0;
  int arrived = 0;
  bool resolved = false;
  std::vector<char> member_arrived;
  std::vector<double> post_wall;
  std::vector<std::int64_t> post_vertex;
  std::vector<int> post_id;
};

struct EnginePost {
  bool collective = false;
  std::pair<int, int> p2p_key{-1, -1};  // (sender, receiver)
  int slot_index = -1;
  bool is_send_side = false;
  int channel = -1;
  double wall = 0.0;
  std::int64_t vertex = -1;
  KernelSignature sig;
  bool waited = false;
};

struct Claim {
  bool active = false;
};

class NullInterceptor final : public Interceptor {
 public:
  void begin_run(const Program&) override {}
  SideOutcome on_compute(int, const KernelSignature&, Sampler&) override { return {}; }
  PairOutcome on_blocking_p2p(int, const KernelSignature&, int, const KernelSignature&, Sampler&,
                              Sampler&) override {
    return {};
  }
  void on_nonblocking_start(int, const KernelSignature&, int, int, const Channel*) override {}
  SideOutcome on_blocking_with_post(int, const KernelSignature&, int, int, Sampler&) override {
    return {};
  }
  SideOutcome on_wait_p2p(int, int, int, int, Sampler&) override { return {}; }
  SideOutcome on_wait_collective(int, int, std::span<const int>, std::span<const int>,
                                 Sampler&) override {
    return {};
  }
  SideOutcome on_blocking_collective(const Channel&, const KernelSignature&,
                                     std::span<const int>, Sampler&) override {
    return {};
  }
  void on_comm_split(const Channel&, std::span<const int>) override {}
};

class EngineCore {
 public:
  EngineCore(const Program& program, const GroundTruthModel& model, Interceptor& interceptor)
      : program_(program), interceptor_(interceptor) {
    const int p = program.world_size;
    cursor_.assign(p, 0);
    clock_.assign(p, 0.0);
    prev_.assign(p, -1);
    claim_.assign(p, Claim{});
    posts_.resize(p);
    live_requests_.resize(p);
    rank_channel_seq_.resize(p);
    samplers_.reserve(p);
    for (int r = 0; r < p; ++r) samplers_.emplace_back(model, r);
    for (std::size_t c = 0; c < program.channels.size(); ++c) {
      member_pos_.emplace_back();
      auto members = program.channels[c].members();
      channel_members_.push_back(members);
      for (std::size_t i = 0; i < members.size(); ++i) {
        member_pos_.back()[members[i]] = static_cast<int>(i);
      }
    }
  }

  // Runs to completion; returns false (with detail_) on stall.
  bool execute() {
    interceptor_.begin_run(program_);
    bool progress = true;
    while (progress) {
      progress = false;
      for (int r = 0; r < program_.world_size; ++r) progress |= advance(r);
    }
    for (int r = 0; r < program_.world_size; ++r) {
      if (cursor_[r] < program_.script[r].size()) {
        std::ostringstream os;
        os << "no progress: rank " << r << " blocked at event " << cursor_[r] << " ("
           << to_string(program_.script[r][cursor_[r]].kind) << ")";
        detail_ = os.str();
        return false;
      }
    }
    interceptor_.end_run();
    return true;
  }

  RunResult take_result() {
    RunResult out;
    out.dag = std::move(dag_);
    out.wall_clock = clock_;
    out.makespan = clock_.empty() ? 0.0 : *std::max_element(clock_.begin(), clock_.end());
    out.total_instances = total_instances_;
    out.executed_instances = executed_instances_;
    return out;
  }

  const std::string& detail() const { return detail_; }
  bool mismatch() const { return mismatch_; }

 private:
  const ProgramEvent& event_at(int r) const { return program_.script[r][cursor_[r]]; }

  std::uint32_t add_vertex(int rank, VertexRole role, std::optional<KernelSignature> sig,
                           double cost, bool executed, std::int64_t bytes, double flops,
                           bool collective_member, std::vector<std::uint32_t> preds) {
    TraceVertex v;
    v.rank = rank;
    v.role = role;
    v.sig = std::move(sig);
    v.cost = cost;
    v.executed = executed;
    v.bytes = bytes;
    v.flops = flops;
    v.collective_member = collective_member;
    v.preds = std::move(preds);
    return dag_.add_vertex(std::move(v));
  }

  std::vector<std::uint32_t> chain_pred(int rank) const {
    if (prev_[rank] < 0) return {};
    return {static_cast<std::uint32_t>(prev_[rank])};
  }

  void count_instance(bool executed) {
    total_instances_ += 1;
    if (executed) executed_instances_ += 1;
  }

  void fail_mismatch(const std::string& what) {
    mismatch_ = true;
    if (detail_.empty()) detail_ = what;
  }

  bool advance(int rank) {
    bool any = false;
    auto& script = program_.script[rank];
    while (!mismatch_ && cursor_[rank] < script.size()) {
      const ProgramEvent& ev = script[cursor_[rank]];
      switch (ev.kind) {
        case EventKind::compute: {
          const KernelSignature sig = ev.signature(program_.channels);
          SideOutcome oc = interceptor_.on_compute(rank, sig, samplers_[rank]);
          if (!oc.executed) samplers_[rank].advance(sig);
          count_instance(oc.executed);
          clock_[rank] += oc.executed ? oc.cost : 0.0;
          prev_[rank] = add_vertex(rank, VertexRole::compute, sig, oc.cost, oc.executed, 0,
                                   flops_for(sig), false, chain_pred(rank));
          ++cursor_[rank];
          any = true;
          break;
        }
        case EventKind::region_begin:
        case EventKind::region_end: {
          prev_[rank] = add_vertex(rank, VertexRole::control, std::nullopt, 0.0, true, 0, 0.0,
                                   false, chain_pred(rank));
          ++cursor_[rank];
          any = true;
          break;
        }
        case EventKind::isend:
        case EventKind::irecv: {
          post_p2p(rank, ev);
          ++cursor_[rank];
          any = true;
          break;
        }
        case EventKind::iscatter: {
          post_collective(rank, ev);
          ++cursor_[rank];
          any = true;
          break;
        }
        case EventKind::send:
        case EventKind::recv: {
          if (!try_blocking_p2p(rank, ev)) return any;
          any = true;
          break;
        }
        case EventKind::wait: {
          if (!try_wait(rank, ev)) return any;
          any = true;
          break;
        }
        default: {  // blocking collectives and comm_split
          if (!try_blocking_collective(rank, ev)) return any;
          any = true;
          break;
        }
      }
    }
    return any;
  }

  void post_p2p(int rank, const ProgramEvent& ev) {
    const bool sending = ev.kind == EventKind::isend;
    const std::pair<int, int> key = sending ? std::make_pair(rank, ev.peer)
                                            : std::make_pair(ev.peer, rank);
    P2pQueue& q = p2p_[key];
    const std::size_t idx = sending ? q.send_claimed++ : q.recv_claimed++;
    P2pSlot& slot = q.slot(idx);
    P2pSide& side = sending ? slot.send : slot.recv;

    const KernelSignature sig = ev.signature(program_.channels);
    const std::uint32_t post_v = add_vertex(rank, VertexRole::post, std::nullopt, 0.0, true,
                                            ev.bytes, 0.0, false, chain_pred(rank));
    prev_[rank] = post_v;

    EnginePost post;
    post.collective = false;
    post.p2p_key = key;
    post.slot_index = static_cast<int>(idx);
    post.is_send_side = sending;
    post.wall = clock_[rank];
    post.vertex = post_v;
    post.sig = sig;
    const int post_id = static_cast<int>(posts_[rank].size());
    posts_[rank].push_back(post);
    live_requests_[rank][ev.request] = post_id;

    side.arrived = true;
    side.nonblocking = true;
    side.ref_wall = clock_[rank];
    side.ref_vertex = post_v;
    side.post_id = post_id;

    interceptor_.on_nonblocking_start(rank, sig, post_id, ev.peer, nullptr);
  }

  void post_collective(int rank, const ProgramEvent& ev) {
    CollSlot& slot = claim_collective(rank, ev);
    if (mismatch_) return;
    const int pos = member_pos_[ev.channel].at(rank);
    const KernelSignature sig = ev.signature(program_.channels);
    const std::uint32_t post_v = add_vertex(rank, VertexRole::post, std::nullopt, 0.0, true,
                                            ev.bytes, 0.0, false, chain_pred(rank));
    prev_[rank] = post_v;

    EnginePost post;
    post.collective = true;
    post.channel = ev.channel;
    post.slot_index = claimed_coll_index_[rank];
    post.wall = clock_[rank];
    post.vertex = post_v;
    post.sig = sig;
    const int post_id = static_cast<int>(posts_[rank].size());
    posts_[rank].push_back(post);
    live_requests_[rank][ev.request] = post_id;

    slot.member_arrived[pos] = 1;
    slot.post_wall[pos] = clock_[rank];
    slot.post_vertex[pos] = post_v;
    slot.post_id[pos] = post_id;
    slot.arrived += 1;
    release_coll_claim(rank, ev.channel);

    interceptor_.on_nonblocking_start(rank, sig, post_id, -1,
                                      &program_.channels[static_cast<std::size_t>(ev.channel)]);
  }

  // Claims this rank's next slot index on the event's channel and checks
  // group agreement.
  CollSlot& claim_collective(int rank, const ProgramEvent& ev) {
    auto& seq = rank_channel_seq_[rank];
    auto it = seq.find(ev.channel);
    int idx;
    if (it != seq.end() && it->second < 0) {
      idx = -it->second - 1;  // already claimed, blocked retry
    } else {
      idx = it == seq.end() ? 0 : it->second;
      seq[ev.channel] = -idx - 1;  // mark claimed
    }
    claimed_coll_index_[rank] = idx;
    auto& slots = coll_slots_[ev.channel];
    if (static_cast<std::size_t>(idx) >= slots.size()) slots.resize(idx + 1);
    CollSlot& slot = slots[idx];
    const std::size_t nmembers = channel_members_[ev.channel].size();
    if (!slot.initialized) {
      slot.initialized = true;
      slot.kind = ev.kind;
      slot.root = ev.root;
      slot.bytes = ev.bytes;
      slot.member_arrived.assign(nmembers, 0);
      slot.post_wall.assign(nmembers, 0.0);
      slot.post_vertex.assign(nmembers, -1);
      slot.post_id.assign(nmembers, -1);
    } else if (slot.kind != ev.kind || slot.root != ev.root || slot.bytes != ev.bytes) {
      std::ostringstream os;
      os << "collective mismatch on channel "
         << program_.channels[static_cast<std::size_t>(ev.channel)].name << " instance " << idx
         << ": rank " << rank << " issued " << to_string(ev.kind);
      fail_mismatch(os.str());
    }
    return slot;
  }

  void release_coll_claim(int rank, int channel) {
    auto& seq = rank_channel_seq_[rank];
    const int idx = -seq[channel] - 1;
    seq[channel] = idx + 1;
  }

  bool try_blocking_p2p(int rank, const ProgramEvent& ev) {
    const bool sending = ev.kind == EventKind::send;
    const std::pair<int, int> key = sending ? std::make_pair(rank, ev.peer)
                                            : std::make_pair(ev.peer, rank);
    P2pQueue& q = p2p_[key];
    std::size_t idx;
    if (claim_[rank].active) {
      idx = claimed_p2p_index_[rank];
    } else {
      idx = sending ? q.send_claimed++ : q.recv_claimed++;
      claim_[rank].active = true;
      claimed_p2p_index_[rank] = idx;
      P2pSide& mine = sending ? q.slot(idx).send : q.slot(idx).recv;
      mine.arrived = true;
      mine.nonblocking = false;
    }
    P2pSlot& slot = q.slot(idx);
    P2pSide& mine = sending ? slot.send : slot.recv;
    P2pSide& theirs = sending ? slot.recv : slot.send;
    if (!theirs.arrived) return false;

    const KernelSignature sig = ev.signature(program_.channels);
    if (theirs.nonblocking) {
      // Peer posted; resolve this side alone against the post.
      mine.ref_wall = clock_[rank];
      mine.ref_vertex = prev_[rank];
      SideOutcome oc = interceptor_.on_blocking_with_post(rank, sig, ev.peer, theirs.post_id,
                                                          samplers_[rank]);
      if (!oc.executed) samplers_[rank].advance(sig);
      count_instance(oc.executed);
      std::vector<std::uint32_t> preds = chain_pred(rank);
      if (theirs.ref_vertex >= 0) preds.push_back(static_cast<std::uint32_t>(theirs.ref_vertex));
      clock_[rank] = std::max(clock_[rank], theirs.ref_wall) + (oc.executed ? oc.cost : 0.0);
      prev_[rank] = add_vertex(rank, VertexRole::p2p, sig, oc.cost, oc.executed, ev.bytes, 0.0,
                               false, std::move(preds));
      mine.resolved = true;
      claim_[rank].active = false;
      ++cursor_[rank];
      return true;
    }

    // Both sides blocking: resolve jointly. This rank is the later arriver.
    const int sender = key.first;
    const int receiver = key.second;
    const ProgramEvent& sev = program_.script[sender][cursor_[sender]];
    const ProgramEvent& rev = program_.script[receiver][cursor_[receiver]];
    const KernelSignature ssig = sev.signature(program_.channels);
    const KernelSignature rsig = rev.signature(program_.channels);
    PairOutcome oc = interceptor_.on_blocking_p2p(sender, ssig, receiver, rsig,
                                                  samplers_[sender], samplers_[receiver]);
    if (!oc.send.executed) samplers_[sender].advance(ssig);
    if (!oc.recv.executed) samplers_[receiver].advance(rsig);
    count_instance(oc.send.executed);
    count_instance(oc.recv.executed);
    std::vector<std::uint32_t> preds;
    if (prev_[sender] >= 0) preds.push_back(static_cast<std::uint32_t>(prev_[sender]));
    if (prev_[receiver] >= 0) preds.push_back(static_cast<std::uint32_t>(prev_[receiver]));
    const double entry = std::max(clock_[sender], clock_[receiver]);
    const std::uint32_t sv = add_vertex(sender, VertexRole::p2p, ssig, oc.send.cost,
                                        oc.send.executed, sev.bytes, 0.0, false, preds);
    const std::uint32_t rv = add_vertex(receiver, VertexRole::p2p, rsig, oc.recv.cost,
                                        oc.recv.executed, rev.bytes, 0.0, false, preds);
    clock_[sender] = entry + (oc.send.executed ? oc.send.cost : 0.0);
    clock_[receiver] = entry + (oc.recv.executed ? oc.recv.cost : 0.0);
    prev_[sender] = sv;
    prev_[receiver] = rv;
    slot.send.resolved = true;
    slot.recv.resolved = true;
    claim_[sender].active = false;
    claim_[receiver].active = false;
    ++cursor_[sender];
    ++cursor_[receiver];
    return true;
  }

  bool try_wait(int rank, const ProgramEvent& ev) {
    auto& live = live_requests_[rank];
    auto it = live.find(ev.request);
    if (it == live.end()) {
      fail_mismatch("wait on unknown request " + ev.request);
      return false;
    }
    const int post_id = it->second;
    EnginePost& post = posts_[rank][post_id];

    if (!post.collective) {
      P2pQueue& q = p2p_[post.p2p_key];
      P2pSlot& slot = q.slot(static_cast<std::size_t>(post.slot_index));
      const P2pSide& theirs = post.is_send_side ? slot.recv : slot.send;
      const bool peer_ready = theirs.nonblocking ? theirs.arrived : theirs.resolved;
      if (!peer_ready) return false;

      const int peer = post.is_send_side ? post.p2p_key.second : post.p2p_key.first;
      const int peer_post_id = theirs.nonblocking ? theirs.post_id : -1;
      SideOutcome oc =
          interceptor_.on_wait_p2p(rank, post_id, peer, peer_post_id, samplers_[rank]);
      if (!oc.executed) samplers_[rank].advance(post.sig);
      count_instance(oc.executed);

      const double rendezvous = std::max(post.wall, theirs.ref_wall);
      std::vector<std::uint32_t> tpreds{static_cast<std::uint32_t>(post.vertex)};
      if (theirs.ref_vertex >= 0) tpreds.push_back(static_cast<std::uint32_t>(theirs.ref_vertex));
      const std::uint32_t tv = add_vertex(rank, VertexRole::transfer, post.sig, oc.cost,
                                          oc.executed, 0, 0.0, false, std::move(tpreds));
      std::vector<std::uint32_t> jpreds = chain_pred(rank);
      jpreds.push_back(tv);
      prev_[rank] = add_vertex(rank, VertexRole::join, std::nullopt, 0.0, true, 0, 0.0, false,
                               std::move(jpreds));
      clock_[rank] = std::max(clock_[rank], rendezvous + (oc.executed ? oc.cost : 0.0));
      post.waited = true;
      live.erase(it);
      ++cursor_[rank];
      return true;
    }

    // Nonblocking collective: every member must have posted.
    auto& slots = coll_slots_[post.channel];
    CollSlot& slot = slots[static_cast<std::size_t>(post.slot_index)];
    const auto& members = channel_members_[post.channel];
    if (slot.arrived < static_cast<int>(members.size())) return false;

    SideOutcome oc = interceptor_.on_wait_collective(
        rank, post_id, members, std::span<const int>(slot.post_id), samplers_[rank]);
    if (!oc.executed) samplers_[rank].advance(post.sig);
    count_instance(oc.executed);

    double rendezvous = 0.0;
    std::vector<std::uint32_t> tpreds;
    for (std::size_t i = 0; i < members.size(); ++i) {
      rendezvous = std::max(rendezvous, slot.post_wall[i]);
      if (slot.post_vertex[i] >= 0) tpreds.push_back(static_cast<std::uint32_t>(slot.post_vertex[i]));
    }
    const std::uint32_t tv = add_vertex(rank, VertexRole::transfer, post.sig, oc.cost,
                                        oc.executed, slot.bytes, 0.0, true, std::move(tpreds));
    std::vector<std::uint32_t> jpreds = chain_pred(rank);
    jpreds.push_back(tv);
    prev_[rank] = add_vertex(rank, VertexRole::join, std::nullopt, 0.0, true, 0, 0.0, false,
                             std::move(jpreds));
    clock_[rank] = std::max(clock_[rank], rendezvous + (oc.executed ? oc.cost : 0.0));
    post.waited = true;
    live.erase(it);
    ++cursor_[rank];
    return true;
  }

  bool try_blocking_collective(int rank, const ProgramEvent& ev) {
    CollSlot& slot = claim_collective(rank, ev);
    if (mismatch_) return false;
    const auto& members = channel_members_[ev.channel];
    const int pos = member_pos_[ev.channel].at(rank);
    if (!slot.member_arrived[pos]) {
      slot.member_arrived[pos] = 1;
      slot.arrived += 1;
    }
    if (slot.arrived < static_cast<int>(members.size())) return false;

    const Channel& channel = program_.channels[static_cast<std::size_t>(ev.channel)];
    std::vector<std::uint32_t> entry_preds;
    double entry = 0.0;
    for (int m : members) {
      if (prev_[m] >= 0) entry_preds.push_back(static_cast<std::uint32_t>(prev_[m]));
      entry = std::max(entry, clock_[m]);
    }

    if (ev.kind == EventKind::comm_split) {
      interceptor_.on_comm_split(channel, members);
      for (int m : members) {
        prev_[m] = add_vertex(m, VertexRole::control, std::nullopt, 0.0, true, 0, 0.0, false,
                              entry_preds);
        clock_[m] = entry;
        release_coll_claim(m, ev.channel);
        ++cursor_[m];
      }
      slot.resolved = true;
      return true;
    }

    const KernelSignature sig = ev.signature(program_.channels);
    SideOutcome oc =
        interceptor_.on_blocking_collective(channel, sig, members, samplers_[members.front()]);
    if (!oc.executed) samplers_[members.front()].advance(sig);
    const double wall = oc.executed ? oc.cost : 0.0;
    for (int m : members) {
      count_instance(oc.executed);
      prev_[m] = add_vertex(m, VertexRole::collective, sig, oc.cost, oc.executed, ev.bytes, 0.0,
                            true, entry_preds);
      clock_[m] = entry + wall;
      release_coll_claim(m, ev.channel);
      ++cursor_[m];
    }
    slot.resolved = true;
    return true;
  }

  const Program& program_;
  Interceptor& interceptor_;
  TraceDag dag_;
  std::vector<std::size_t> cursor_;
  std::vector<double> clock_;
  std::vector<std::int64_t> prev_;
  std::vector<Claim> claim_;
  std::vector<Sampler> samplers_;
  std::map<std::pair<int, int>, P2pQueue> p2p_;
  std::map<int, std::vector<CollSlot>> coll_slots_;
  std::vector<std::map<int, int>> rank_channel_seq_;  // >=0 next index; <0 claimed marker
  std::map<int, std::size_t> claimed_p2p_index_;
  std::map<int, int> claimed_coll_index_;
  std::vector<std::vector<EnginePost>> posts_;
  std::vector<std::map<std::string, int>> live_requests_;
  std::vector<std::vector<int>> channel_members_;
  std::vector<std::map<int, int>> member_pos_;
  std::uint64_t total_instances_ = 0;
  std::uint64_t executed_instances_ = 0;
  bool mismatch_ = false;
  std::string detail_;
};

// Per-rank static pairing of nonblocking requests with their waits.
ValidationResult check_requests(const Program& program) {
  for (int r = 0; r < program.world_size; ++r) {
    std::map<std::string, EventKind> live;
    for (const auto& ev : program.script[r]) {
      const bool posts = ev.kind == EventKind::isend || ev.kind == EventKind::irecv ||
                         ev.kind == EventKind::iscatter;
      if (posts) {
        if (ev.request.empty() || live.count(ev.request)) {
          return {ValidationStatus::unmatched_request,
                  "rank " + std::to_string(r) + ": duplicate or empty live request '" +
                      ev.request + "'"};
        }
        live[ev.request] = ev.kind;
      } else if (ev.kind == EventKind::wait) {
        if (!live.count(ev.request)) {
          return {ValidationStatus::unmatched_request,
                  "rank " + std::to_string(r) + ": wait on unknown request '" + ev.request + "'"};
        }
        live.erase(ev.request);
      }
    }
    if (!live.empty()) {
      return {ValidationStatus::unmatched_request,
              "rank " + std::to_string(r) + ": request '" + live.begin()->first +
                  "' never completed by a wait"};
    }
  }
  return {};
}

ValidationResult check_structure(const Program& program) {
  const int p = program.world_size;
  for (int r = 0; r < p; ++r) {
    for (const auto& ev : program.script[r]) {
      if (ev.kind == EventKind::send || ev.kind == EventKind::recv ||
          ev.kind == EventKind::isend || ev.kind == EventKind::irecv) {
        if (ev.peer < 0 || ev.peer >= p || ev.peer == r) {
          return {ValidationStatus::deadlock_risk,
                  "rank " + std::to_string(r) + ": invalid peer"};
        }
      }
      if (is_collective_event(ev.kind) || ev.kind == EventKind::comm_split) {
        if (ev.channel < 0 || ev.channel >= static_cast<int>(program.channels.size())) {
          return {ValidationStatus::deadlock_risk,
                  "rank " + std::to_string(r) + ": invalid channel index"};
        }
        auto members = program.channels[static_cast<std::size_t>(ev.channel)].members();
        if (!std::binary_search(members.begin(), members.end(), r)) {
          return {ValidationStatus::deadlock_risk,
                  "rank " + std::to_string(r) + ": collective on channel it is not a member of"};
        }
        if (is_collective_event(ev.kind) && ev.root >= 0 &&
            !std::binary_search(members.begin(), members.end(), ev.root)) {
          return {ValidationStatus::deadlock_risk,
                  "rank " + std::to_string(r) + ": collective root outside channel"};
        }
      }
    }
  }
  return {};
}

}  // namespace

ValidationResult validate(const Program& program) {
  if (program.world_size < 1 ||
      program.script.size() != static_cast<std::size_t>(program.world_size)) {
    return {ValidationStatus::deadlock_risk, "malformed program"};
  }
  if (auto res = check_structure(program); !res) return res;
  if (auto res = check_requests(program); !res) return res;

  NullInterceptor null;
  GroundTruthModel model;  // never sampled by the null interceptor
  EngineCore core(program, model, null);
  if (!core.execute()) {
    return {ValidationStatus::deadlock_risk, core.detail()};
  }
  return {};
}

RunResult run(const Program& program, const GroundTruthModel& model, Interceptor& interceptor) {
  if (auto res = validate(program); !res) {
    throw ConfigError("program failed validation: " + res.detail);
  }
  EngineCore core(program, model, interceptor);
  if (!core.execute()) {
    throw ConfigError("execution stalled: " + core.detail());
  }
  return core.take_result();
}

}  // namespace pathtune
