#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pathtune {

// Routine names a kernel can carry. Computation tags are parameterized on
// matrix dimensions, communication tags on message size and communicator
// geometry. Point-to-point is treated as a size-2 stride-1 communicator.
enum class RoutineTag : std::uint8_t {
  // computation
  gemm,
  trmm,
  trsm,
  syrk,
  potrf,
  trtri,
  geqrf,
  ormqr,
  tpqrt,
  tpmqrt,
  custom,
  // point-to-point
  send,
  recv,
  isend,
  irecv,
  // collectives
  bcast,
  reduce,
  allreduce,
  allgather,
  scatter,
  gather,
  iscatter,
};

bool is_compute_tag(RoutineTag t);
bool is_p2p_tag(RoutineTag t);
bool is_collective_tag(RoutineTag t);
bool is_comm_tag(RoutineTag t);
bool is_nonblocking_tag(RoutineTag t);

const char* to_string(RoutineTag t);
RoutineTag routine_tag_from_string(const std::string& name);  // throws UnknownKernelError

// Identity of a kernel: routine plus integer parameterization. Two
// invocations with equal (tag, params) pool their statistics.
struct KernelSignature {
  RoutineTag tag = RoutineTag::custom;
  std::vector<std::int64_t> params;

  friend bool operator==(const KernelSignature&, const KernelSignature&) = default;
  friend auto operator<=>(const KernelSignature&, const KernelSignature&) = default;

  std::uint64_t hash() const;
  std::string str() const;  // e.g. "gemm(64,64,64)"
};

}  // namespace pathtune
