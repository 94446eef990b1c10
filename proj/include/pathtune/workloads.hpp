#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pathtune/program.hpp"

namespace pathtune {

enum class BaseCaseStrategy { gather_scatter, allgather_redundant, allgather_bcast };

BaseCaseStrategy base_case_strategy_from_string(const std::string& name);
const char* to_string(BaseCaseStrategy s);

// Recursive 3D-grid Cholesky schedule: per level, triangular and symmetric
// updates as grid matmuls (broadcasts along two grid dimensions, a
// reduction along the third), base cases per strategy at block size b.
struct CholeskyConfig {
  std::int64_t n = 1024;
  std::int64_t b = 128;
  std::array<int, 3> grid{2, 2, 2};
  BaseCaseStrategy strategy = BaseCaseStrategy::allgather_redundant;
};

// Panel-iterative 2D-grid QR schedule: per panel, a column factorization,
// Householder reconstruction, a nonblocking panel broadcast straddling the
// trailing update, and a row allreduce.
struct QrConfig {
  std::int64_t m = 4096;
  std::int64_t n = 1024;
  std::int64_t b = 128;
  int pr = 4;
  int pc = 2;
};

// Small smoke workload: recurring compute + allreduce + a pairwise
// isend/recv exchange.
struct MicroConfig {
  int ranks = 4;
  int repeats = 8;
  std::int64_t bytes = 4096;
  std::int64_t dim = 64;
};

Program gen_cholesky(const CholeskyConfig& config);  // throws ConfigError
Program gen_qr(const QrConfig& config);              // throws ConfigError
Program gen_micro(const MicroConfig& config);        // throws ConfigError

struct BspCounters {
  double synch = 0.0;       // collective events along the critical path
  double comm_words = 0.0;  // 8-byte words moved along the critical path
  double comp_flops = 0.0;  // flops along the critical path
};

// Critical-path counters under the superstep / word / flop metrics.
BspCounters bsp_costs(const Program& program);

// One workload point of a sweep.
struct WorkloadConfig {
  std::string label;
  std::variant<CholeskyConfig, QrConfig, MicroConfig> config;

  Program generate() const;
  int world_size() const;
};

// One config per line:
//   cholesky n=1024 b=64 grid=2x2x2 strategy=allgather_redundant
//   qr m=4096 n=1024 b=128 pr=4 pc=2
//   micro ranks=4 repeats=8 bytes=4096 dim=64
WorkloadConfig parse_workload_line(const std::string& line);        // throws ConfigError
std::vector<WorkloadConfig> parse_space_file(const std::string& path);

}  // namespace pathtune
