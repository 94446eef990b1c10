#pragma once

// Test-only helpers: randomized valid programs with continuous signature
// costs, so equal-cost path ties can only come from identical signature
// multisets (which leave path counts unchanged).

#include <random>
#include <string>
#include <vector>

#include "pathtune/cost_model.hpp"
#include "pathtune/program.hpp"

namespace pathtune::testing {

struct RandomProgramOptions {
  int max_ranks = 8;
  int max_global_ops = 50;
  bool use_nonblocking = true;
  bool use_collectives = true;
  bool use_splits = true;
};

// Builds a program by appending globally-ordered operations, which keeps it
// deadlock-free and fully matched by construction.
inline Program random_program(std::mt19937_64& rng, const RandomProgramOptions& opt = {}) {
  const int p = 2 + static_cast<int>(rng() % static_cast<unsigned>(opt.max_ranks - 1));
  Program prog = Program::empty(p);

  std::vector<int> halves;  // channel indices usable for collectives
  std::vector<int> channels{0};
  if (opt.use_collectives && p >= 4 && p % 2 == 0) {
    std::vector<int> lo(static_cast<std::size_t>(p / 2));
    std::vector<int> hi(static_cast<std::size_t>(p / 2));
    std::vector<int> even;
    for (int r = 0; r < p / 2; ++r) lo[static_cast<std::size_t>(r)] = r;
    for (int r = p / 2; r < p; ++r) hi[static_cast<std::size_t>(r - p / 2)] = r;
    for (int r = 0; r < p; r += 2) even.push_back(r);
    Channel a = infer_channel(lo);
    a.name = "lo";
    Channel b = infer_channel(hi);
    b.name = "hi";
    Channel c = infer_channel(even);
    c.name = "even";
    channels.push_back(prog.add_channel(std::move(a)));
    channels.push_back(prog.add_channel(std::move(b)));
    channels.push_back(prog.add_channel(std::move(c)));
  }

  // small signature pools so kernels recur
  const std::vector<RoutineTag> compute_tags{RoutineTag::gemm, RoutineTag::potrf,
                                             RoutineTag::custom, RoutineTag::syrk};
  const std::vector<std::int64_t> byte_pool{64, 256, 1024};

  auto compute_on = [&](int r) {
    ProgramEvent e;
    e.kind = EventKind::compute;
    e.tag = compute_tags[rng() % compute_tags.size()];
    const std::int64_t d = 2 + static_cast<std::int64_t>(rng() % 3);
    e.params = e.tag == RoutineTag::gemm ? std::vector<std::int64_t>{d, d, d}
                                         : std::vector<std::int64_t>{d, d};
    prog.script[static_cast<std::size_t>(r)].push_back(std::move(e));
  };

  int next_request = 0;
  const int ops = 5 + static_cast<int>(rng() % static_cast<unsigned>(opt.max_global_ops - 4));
  for (int op = 0; op < ops; ++op) {
    switch (rng() % 6) {
      case 0:
      case 1:
        compute_on(static_cast<int>(rng() % static_cast<unsigned>(p)));
        break;
      case 2: {  // blocking pair
        const int s = static_cast<int>(rng() % static_cast<unsigned>(p));
        int r = static_cast<int>(rng() % static_cast<unsigned>(p));
        if (r == s) r = (r + 1) % p;
        const std::int64_t bytes = byte_pool[rng() % byte_pool.size()];
        ProgramEvent send;
        send.kind = EventKind::send;
        send.tag = RoutineTag::send;
        send.peer = r;
        send.bytes = bytes;
        ProgramEvent recv;
        recv.kind = EventKind::recv;
        recv.tag = RoutineTag::recv;
        recv.peer = s;
        recv.bytes = bytes;
        prog.script[static_cast<std::size_t>(s)].push_back(std::move(send));
        prog.script[static_cast<std::size_t>(r)].push_back(std::move(recv));
        break;
      }
      case 3: {  // collective
        if (!opt.use_collectives) {
          compute_on(static_cast<int>(rng() % static_cast<unsigned>(p)));
          break;
        }
        const int ch = channels[rng() % channels.size()];
        const Channel& channel = prog.channels[static_cast<std::size_t>(ch)];
        const auto members = channel.members();
        const EventKind kinds[] = {EventKind::bcast, EventKind::allreduce, EventKind::reduce,
                                   EventKind::allgather};
        const EventKind kind = kinds[rng() % 4];
        const std::int64_t bytes = byte_pool[rng() % byte_pool.size()];
        const int root =
            kind == EventKind::bcast || kind == EventKind::reduce ? members.front() : -1;
        for (int m : members) {
          ProgramEvent e;
          e.kind = kind;
          e.tag = kind == EventKind::bcast      ? RoutineTag::bcast
                  : kind == EventKind::allreduce ? RoutineTag::allreduce
                  : kind == EventKind::reduce    ? RoutineTag::reduce
                                                 : RoutineTag::allgather;
          e.channel = ch;
          e.root = root;
          e.bytes = bytes;
          prog.script[static_cast<std::size_t>(m)].push_back(std::move(e));
        }
        break;
      }
      case 4: {  // nonblocking p2p, matched by recv or irecv+wait
        if (!opt.use_nonblocking) {
          compute_on(static_cast<int>(rng() % static_cast<unsigned>(p)));
          break;
        }
        const int s = static_cast<int>(rng() % static_cast<unsigned>(p));
        int r = static_cast<int>(rng() % static_cast<unsigned>(p));
        if (r == s) r = (r + 1) % p;
        const std::int64_t bytes = byte_pool[rng() % byte_pool.size()];
        const std::string req = "q" + std::to_string(next_request++);
        ProgramEvent isend;
        isend.kind = EventKind::isend;
        isend.tag = RoutineTag::isend;
        isend.peer = r;
        isend.bytes = bytes;
        isend.request = req;
        prog.script[static_cast<std::size_t>(s)].push_back(std::move(isend));
        const int overlap = static_cast<int>(rng() % 3);
        for (int i = 0; i < overlap; ++i) compute_on(s);
        ProgramEvent wait;
        wait.kind = EventKind::wait;
        wait.request = req;
        prog.script[static_cast<std::size_t>(s)].push_back(std::move(wait));

        if (rng() % 2 == 0) {
          ProgramEvent recv;
          recv.kind = EventKind::recv;
          recv.tag = RoutineTag::recv;
          recv.peer = s;
          recv.bytes = bytes;
          prog.script[static_cast<std::size_t>(r)].push_back(std::move(recv));
        } else {
          const std::string rreq = "q" + std::to_string(next_request++);
          ProgramEvent irecv;
          irecv.kind = EventKind::irecv;
          irecv.tag = RoutineTag::irecv;
          irecv.peer = s;
          irecv.bytes = bytes;
          irecv.request = rreq;
          prog.script[static_cast<std::size_t>(r)].push_back(std::move(irecv));
          if (rng() % 2 == 0) compute_on(r);
          ProgramEvent rwait;
          rwait.kind = EventKind::wait;
          rwait.request = rreq;
          prog.script[static_cast<std::size_t>(r)].push_back(std::move(rwait));
        }
        break;
      }
      case 5: {  // split
        if (!opt.use_splits || channels.size() < 2) {
          compute_on(static_cast<int>(rng() % static_cast<unsigned>(p)));
          break;
        }
        const int ch = channels[1 + rng() % (channels.size() - 1)];
        for (int m : prog.channels[static_cast<std::size_t>(ch)].members()) {
          ProgramEvent e;
          e.kind = EventKind::comm_split;
          e.channel = ch;
          prog.script[static_cast<std::size_t>(m)].push_back(std::move(e));
        }
        break;
      }
    }
  }
  return prog;
}

// Continuous deterministic mean per distinct signature: path-sum ties
// between different signature multisets have probability ~0.
inline GroundTruthModel continuous_cost_model(const Program& prog, std::uint64_t seed) {
  GroundTruthModel model;
  model.noise = NoiseKind::none;
  model.seed = seed;
  for (const auto& script : prog.script) {
    for (const auto& ev : script) {
      if (ev.kind == EventKind::wait || ev.kind == EventKind::comm_split ||
          ev.kind == EventKind::region_begin || ev.kind == EventKind::region_end) {
        continue;
      }
      const KernelSignature sig = ev.signature(prog.channels);
      if (model.mu_override.count(sig)) continue;
      std::uint64_t h = hash_mix(seed, sig.hash());
      std::mt19937_64 r(h);
      model.mu_override[sig] = 0.25 + 2.0 * uniform01(r);
    }
  }
  return model;
}

}  // namespace pathtune::testing
