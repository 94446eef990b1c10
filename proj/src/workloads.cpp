#include "pathtune/workloads.hpp"

#include <bit>
#include <fstream>
#include <map>
#include <sstream>

#include "pathtune/engine.hpp"
#include "pathtune/errors.hpp"
#include "pathtune/propagation.hpp"
#include "pathtune/trace.hpp"

namespace pathtune {

BaseCaseStrategy base_case_strategy_from_string(const std::string& name) {
  if (name == "gather_scatter") return BaseCaseStrategy::gather_scatter;
  if (name == "allgather_redundant") return BaseCaseStrategy::allgather_redundant;
  if (name == "allgather_bcast") return BaseCaseStrategy::allgather_bcast;
  throw ConfigError("unknown base case strategy: " + name);
}

const char* to_string(BaseCaseStrategy s) {
  switch (s) {
    case BaseCaseStrategy::gather_scatter: return "gather_scatter";
    case BaseCaseStrategy::allgather_redundant: return "allgather_redundant";
    case BaseCaseStrategy::allgather_bcast: return "allgather_bcast";
  }
  return "?";
}

namespace {

bool power_of_two(std::int64_t v) { return v > 0 && std::has_single_bit(static_cast<std::uint64_t>(v)); }

ProgramEvent compute_event(RoutineTag tag, std::vector<std::int64_t> params) {
  ProgramEvent e;
  e.kind = EventKind::compute;
  e.tag = tag;
  e.params = std::move(params);
  return e;
}

ProgramEvent collective_event(EventKind kind, int channel, int root, std::int64_t bytes,
                              std::string request = {}) {
  ProgramEvent e;
  e.kind = kind;
  e.tag = [kind] {
    switch (kind) {
      case EventKind::bcast: return RoutineTag::bcast;
      case EventKind::reduce: return RoutineTag::reduce;
      case EventKind::allreduce: return RoutineTag::allreduce;
      case EventKind::allgather: return RoutineTag::allgather;
      case EventKind::scatter: return RoutineTag::scatter;
      case EventKind::gather: return RoutineTag::gather;
      case EventKind::iscatter: return RoutineTag::iscatter;
      default: throw ConfigError("not a collective kind");
    }
  }();
  e.channel = channel;
  e.root = root;
  e.bytes = bytes;
  e.request = std::move(request);
  return e;
}

ProgramEvent split_event(int channel) {
  ProgramEvent e;
  e.kind = EventKind::comm_split;
  e.channel = channel;
  return e;
}

// 3D grid addressing: rank = x + y*g0 + z*g0*g1.
struct Grid3 {
  std::array<int, 3> g;
  int rank_of(int x, int y, int z) const { return x + y * g[0] + z * g[0] * g[1]; }
};

}  // namespace

Program gen_cholesky(const CholeskyConfig& config) {
  const std::int64_t n = config.n;
  const std::int64_t b = config.b;
  if (n <= 0 || b <= 0 || n % b != 0 || !power_of_two(n / b)) {
    throw ConfigError("cholesky: n must be a power-of-two multiple of b");
  }
  const Grid3 grid{config.grid};
  const int p = config.grid[0] * config.grid[1] * config.grid[2];
  if (p <= 0) throw ConfigError("cholesky: empty grid");

  Program prog = Program::empty(p);

  // Fiber channels along each grid dimension, plus layer slices for the
  // base cases. Size-1 fibers are skipped throughout.
  const std::array<std::int64_t, 3> stride = {1, config.grid[0],
                                              static_cast<std::int64_t>(config.grid[0]) *
                                                  config.grid[1]};
  std::map<std::string, int> channel_index;
  auto fiber_channel = [&](int dim, int x, int y, int z) -> int {
    std::array<int, 3> c{x, y, z};
    c[static_cast<std::size_t>(dim)] = 0;
    std::ostringstream name;
    name << 'd' << dim << '_' << c[0] << '_' << c[1] << '_' << c[2];
    auto it = channel_index.find(name.str());
    if (it != channel_index.end()) return it->second;
    const std::int64_t offset = grid.rank_of(c[0], c[1], c[2]);
    Channel ch = make_channel(name.str(), offset,
                              {ChannelDim{stride[static_cast<std::size_t>(dim)],
                                          config.grid[static_cast<std::size_t>(dim)]}});
    const int idx = prog.add_channel(std::move(ch));
    channel_index[name.str()] = idx;
    return idx;
  };
  auto layer_channel = [&](int z) -> int {
    std::ostringstream name;
    name << "layer" << z;
    auto it = channel_index.find(name.str());
    if (it != channel_index.end()) return it->second;
    std::vector<ChannelDim> dims;
    if (config.grid[0] > 1) dims.push_back({1, config.grid[0]});
    if (config.grid[1] > 1) dims.push_back({config.grid[0], config.grid[1]});
    Channel ch = make_channel(name.str(), grid.rank_of(0, 0, z), std::move(dims));
    const int idx = prog.add_channel(std::move(ch));
    channel_index[name.str()] = idx;
    return idx;
  };

  const std::int64_t gmax = std::max({config.grid[0], config.grid[1], config.grid[2]});
  for (int z = 0; z < config.grid[2]; ++z) {
    for (int y = 0; y < config.grid[1]; ++y) {
      for (int x = 0; x < config.grid[0]; ++x) {
        const int r = grid.rank_of(x, y, z);
        auto& script = prog.script[static_cast<std::size_t>(r)];
        const std::array<int, 3> coord{x, y, z};

        for (int dim = 0; dim < 3; ++dim) {
          if (config.grid[static_cast<std::size_t>(dim)] > 1) {
            script.push_back(split_event(fiber_channel(dim, x, y, z)));
          }
        }

        // One 3D matmul: broadcasts along two dimensions, local product,
        // reduction along the third.
        auto matmul3d = [&](RoutineTag tag, std::int64_t h) {
          const std::int64_t t0 = std::max<std::int64_t>(1, h / config.grid[0]);
          const std::int64_t t1 = std::max<std::int64_t>(1, h / config.grid[1]);
          const std::int64_t tile_bytes = 8 * t0 * t1;
          const std::int64_t tk = std::max<std::int64_t>(1, h / gmax);
          for (int dim = 0; dim < 2; ++dim) {
            if (config.grid[static_cast<std::size_t>(dim)] > 1) {
              const int ch = fiber_channel(dim, x, y, z);
              script.push_back(collective_event(
                  EventKind::bcast, ch,
                  static_cast<int>(prog.channels[static_cast<std::size_t>(ch)].offset),
                  tile_bytes));
            }
          }
          if (tag == RoutineTag::gemm) {
            script.push_back(compute_event(tag, {t0, t1, tk}));
          } else {
            script.push_back(compute_event(tag, {t0, t1}));
          }
          if (config.grid[2] > 1) {
            const int ch = fiber_channel(2, x, y, z);
            script.push_back(collective_event(
                EventKind::reduce, ch,
                static_cast<int>(prog.channels[static_cast<std::size_t>(ch)].offset),
                tile_bytes));
          }
        };

        auto base_case = [&] {
          const std::int64_t bytes_b = 8 * b * b;
          const bool in_layer0 = coord[2] == 0;
          const int layer = layer_channel(coord[2]);
          const int layer0 = layer_channel(0);
          const bool layer_nontrivial = config.grid[0] * config.grid[1] > 1;
          switch (config.strategy) {
            case BaseCaseStrategy::gather_scatter: {
              const int root = static_cast<int>(
                  prog.channels[static_cast<std::size_t>(layer0)].offset);
              if (in_layer0) {
                if (layer_nontrivial) {
                  script.push_back(collective_event(EventKind::gather, layer0, root, bytes_b));
                }
                if (r == root) {
                  script.push_back(compute_event(RoutineTag::potrf, {b}));
                  script.push_back(compute_event(RoutineTag::trtri, {b}));
                }
                if (layer_nontrivial) {
                  script.push_back(collective_event(EventKind::scatter, layer0, root, bytes_b));
                }
              }
              if (config.grid[2] > 1) {
                const int ch = fiber_channel(2, x, y, z);
                script.push_back(collective_event(
                    EventKind::bcast, ch,
                    static_cast<int>(prog.channels[static_cast<std::size_t>(ch)].offset),
                    bytes_b));
              }
              break;
            }
            case BaseCaseStrategy::allgather_redundant: {
              if (layer_nontrivial) {
                script.push_back(collective_event(EventKind::allgather, layer, -1, bytes_b));
              }
              script.push_back(compute_event(RoutineTag::potrf, {b}));
              script.push_back(compute_event(RoutineTag::trtri, {b}));
              break;
            }
            case BaseCaseStrategy::allgather_bcast: {
              if (in_layer0) {
                if (layer_nontrivial) {
                  script.push_back(collective_event(EventKind::allgather, layer0, -1, bytes_b));
                }
                script.push_back(compute_event(RoutineTag::potrf, {b}));
                script.push_back(compute_event(RoutineTag::trtri, {b}));
              }
              if (config.grid[2] > 1) {
                const int ch = fiber_channel(2, x, y, z);
                script.push_back(collective_event(
                    EventKind::bcast, ch,
                    static_cast<int>(prog.channels[static_cast<std::size_t>(ch)].offset),
                    bytes_b));
              }
              break;
            }
          }
        };

        // Recursion: factor the leading half, update the trailing half,
        // factor it, then form the inverse block (two more products).
        auto recurse = [&](auto&& self, std::int64_t m) -> void {
          if (m == b) {
            base_case();
            return;
          }
          const std::int64_t h = m / 2;
          self(self, h);
          matmul3d(RoutineTag::trmm, h);
          matmul3d(RoutineTag::syrk, h);
          self(self, h);
          matmul3d(RoutineTag::trmm, h);
          matmul3d(RoutineTag::gemm, h);
        };
        recurse(recurse, n);
      }
    }
  }
  return prog;
}

Program gen_qr(const QrConfig& config) {
  const std::int64_t m = config.m;
  const std::int64_t n = config.n;
  const std::int64_t b = config.b;
  const int pr = config.pr;
  const int pc = config.pc;
  if (pr <= 0 || pc <= 0) throw ConfigError("qr: grid dims must be positive");
  if (m < n || n <= 0) throw ConfigError("qr: need m >= n > 0");
  if (n % b != 0) throw ConfigError("qr: n must be divisible by b");
  if (b > std::min(m / pr, n / pc)) {
    throw ConfigError("qr: block size must satisfy b <= min(m/pr, n/pc)");
  }
  const int p = pr * pc;

  // rank = i + j*pr: columns are contiguous stride-1 fibers.
  Program prog = Program::empty(p);
  std::vector<int> col_channel(static_cast<std::size_t>(pc), -1);
  std::vector<int> row_channel(static_cast<std::size_t>(pr), -1);
  for (int j = 0; j < pc; ++j) {
    if (pr > 1) {
      col_channel[static_cast<std::size_t>(j)] = prog.add_channel(
          make_channel("col" + std::to_string(j), static_cast<std::int64_t>(j) * pr,
                       {ChannelDim{1, pr}}));
    }
  }
  for (int i = 0; i < pr; ++i) {
    if (pc > 1) {
      row_channel[static_cast<std::size_t>(i)] =
          prog.add_channel(make_channel("row" + std::to_string(i), i, {ChannelDim{pr, pc}}));
    }
  }

  const std::int64_t panels = n / b;
  const int tsqr_stages = pr > 1 ? std::bit_width(static_cast<unsigned>(pr - 1)) : 0;
  for (int j = 0; j < pc; ++j) {
    for (int i = 0; i < pr; ++i) {
      const int r = i + j * pr;
      auto& script = prog.script[static_cast<std::size_t>(r)];
      if (pr > 1) script.push_back(split_event(col_channel[static_cast<std::size_t>(j)]));
      if (pc > 1) script.push_back(split_event(row_channel[static_cast<std::size_t>(i)]));

      for (std::int64_t k = 0; k < panels; ++k) {
        const int owner = static_cast<int>(k % pc);
        const std::int64_t mk = m - k * b;
        const std::int64_t rows_local = std::max<std::int64_t>(1, mk / pr);
        const std::int64_t trailing = n - (k + 1) * b;
        const std::int64_t cols_local = std::max<std::int64_t>(1, trailing / pc);

        if (j == owner) {
          // panel factorization on the owning grid column
          script.push_back(compute_event(RoutineTag::geqrf, {rows_local, b}));
          for (int s = 0; s < tsqr_stages; ++s) {
            script.push_back(compute_event(RoutineTag::tpqrt, {b, b}));
          }
          if (pr > 1) {
            script.push_back(collective_event(
                EventKind::allreduce, col_channel[static_cast<std::size_t>(j)], -1, 8 * b * b));
          }
          // Householder reconstruction
          script.push_back(compute_event(RoutineTag::trtri, {b}));
          script.push_back(compute_event(RoutineTag::trsm, {b, rows_local}));
        }

        // Panel broadcast along the row, nonblocking so it overlaps the
        // trailing update (look-ahead pipelining).
        const std::string req = "y" + std::to_string(k);
        const bool have_row = pc > 1;
        if (have_row) {
          const int rooti = i + owner * pr;
          script.push_back(collective_event(EventKind::iscatter,
                                            row_channel[static_cast<std::size_t>(i)], rooti,
                                            8 * rows_local * b, req));
        }
        if (trailing > 0) {
          script.push_back(compute_event(RoutineTag::gemm, {rows_local, cols_local, b}));
          script.push_back(compute_event(RoutineTag::tpmqrt, {rows_local, cols_local, b}));
        }
        if (have_row) {
          ProgramEvent w;
          w.kind = EventKind::wait;
          w.request = req;
          script.push_back(w);
          script.push_back(collective_event(
              EventKind::allreduce, row_channel[static_cast<std::size_t>(i)], -1, 8 * b * b));
        }
      }
    }
  }
  return prog;
}

Program gen_micro(const MicroConfig& config) {
  if (config.ranks < 1 || config.repeats < 1) throw ConfigError("micro: need ranks/repeats >= 1");
  const int p = config.ranks;
  Program prog = Program::empty(p);
  for (int r = 0; r < p; ++r) {
    auto& script = prog.script[static_cast<std::size_t>(r)];
    for (int t = 0; t < config.repeats; ++t) {
      script.push_back(compute_event(RoutineTag::gemm, {config.dim, config.dim, config.dim}));
      if (p > 1) {
        script.push_back(collective_event(EventKind::allreduce, 0, -1, config.bytes));
        const std::string req = "x" + std::to_string(t);
        if (r % 2 == 0 && r + 1 < p) {
          ProgramEvent w;
          w.kind = EventKind::wait;
          w.request = req;
          ProgramEvent e;
          e.kind = EventKind::isend;
          e.tag = RoutineTag::isend;
          e.peer = r + 1;
          e.bytes = config.bytes;
          e.request = req;
          script.push_back(e);
          script.push_back(compute_event(RoutineTag::custom, {config.dim, config.dim}));
          script.push_back(w);
        } else if (r % 2 == 1) {
          ProgramEvent e;
          e.kind = EventKind::recv;
          e.tag = RoutineTag::recv;
          e.peer = r - 1;
          e.bytes = config.bytes;
          script.push_back(e);
          script.push_back(compute_event(RoutineTag::custom, {config.dim, config.dim}));
        } else {
          script.push_back(compute_event(RoutineTag::custom, {config.dim, config.dim}));
        }
      }
    }
  }
  return prog;
}

BspCounters bsp_costs(const Program& program) {
  CoordinatorOptions options;
  options.force_full = true;
  Coordinator full(options);
  GroundTruthModel model;  // structure only; metric weights ignore the costs
  RunResult res = run(program, model, full);
  BspCounters out;
  out.synch = brute_force_critical_path(res.dag, CostMetric::supersteps).cost;
  out.comm_words = brute_force_critical_path(res.dag, CostMetric::comm_words).cost;
  out.comp_flops = brute_force_critical_path(res.dag, CostMetric::comp_flops).cost;
  return out;
}

Program WorkloadConfig::generate() const {
  return std::visit(
      [](const auto& c) -> Program {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CholeskyConfig>) return gen_cholesky(c);
        if constexpr (std::is_same_v<T, QrConfig>) return gen_qr(c);
        if constexpr (std::is_same_v<T, MicroConfig>) return gen_micro(c);
      },
      config);
}

int WorkloadConfig::world_size() const {
  return std::visit(
      [](const auto& c) -> int {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CholeskyConfig>) {
          return c.grid[0] * c.grid[1] * c.grid[2];
        }
        if constexpr (std::is_same_v<T, QrConfig>) return c.pr * c.pc;
        if constexpr (std::is_same_v<T, MicroConfig>) return c.ranks;
      },
      config);
}

namespace {

std::map<std::string, std::string> parse_kv(std::istringstream& ls) {
  std::map<std::string, std::string> kv;
  std::string tok;
  while (ls >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got: " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

std::int64_t kv_int(const std::map<std::string, std::string>& kv, const std::string& key,
                    std::int64_t fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  return std::stoll(it->second);
}

}  // namespace

WorkloadConfig parse_workload_line(const std::string& line) {
  std::istringstream ls(line);
  std::string kind;
  if (!(ls >> kind)) throw ConfigError("empty workload line");
  auto kv = parse_kv(ls);
  WorkloadConfig out;
  out.label = line;
  if (kind == "cholesky") {
    CholeskyConfig c;
    c.n = kv_int(kv, "n", c.n);
    c.b = kv_int(kv, "b", c.b);
    if (auto it = kv.find("grid"); it != kv.end()) {
      std::array<int, 3> g{1, 1, 1};
      if (std::sscanf(it->second.c_str(), "%dx%dx%d", &g[0], &g[1], &g[2]) != 3) {
        throw ConfigError("cholesky grid must look like 2x2x2");
      }
      c.grid = g;
    }
    if (auto it = kv.find("strategy"); it != kv.end()) {
      c.strategy = base_case_strategy_from_string(it->second);
    }
    out.config = c;
  } else if (kind == "qr") {
    QrConfig c;
    c.m = kv_int(kv, "m", c.m);
    c.n = kv_int(kv, "n", c.n);
    c.b = kv_int(kv, "b", c.b);
    c.pr = static_cast<int>(kv_int(kv, "pr", c.pr));
    c.pc = static_cast<int>(kv_int(kv, "pc", c.pc));
    out.config = c;
  } else if (kind == "micro") {
    MicroConfig c;
    c.ranks = static_cast<int>(kv_int(kv, "ranks", c.ranks));
    c.repeats = static_cast<int>(kv_int(kv, "repeats", c.repeats));
    c.bytes = kv_int(kv, "bytes", c.bytes);
    c.dim = kv_int(kv, "dim", c.dim);
    out.config = c;
  } else {
    throw ConfigError("unknown workload kind: " + kind);
  }
  return out;
}

std::vector<WorkloadConfig> parse_space_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open space file: " + path);
  std::vector<WorkloadConfig> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream probe(line);
    std::string word;
    if (!(probe >> word)) continue;
    out.push_back(parse_workload_line(line));
  }
  if (out.empty()) throw ConfigError("space file has no configurations: " + path);
  return out;
}

}  // namespace pathtune
