#include "pathtune/signature.hpp"

#include <array>
#include <cstring>
#include <sstream>

#include "pathtune/errors.hpp"

namespace pathtune {

namespace {

struct TagName {
  RoutineTag tag;
  const char* name;
};

constexpr std::array<TagName, 22> kTagNames = {{
    {RoutineTag::gemm, "gemm"},
    {RoutineTag::trmm, "trmm"},
    {RoutineTag::trsm, "trsm"},
    {RoutineTag::syrk, "syrk"},
    {RoutineTag::potrf, "potrf"},
    {RoutineTag::trtri, "trtri"},
    {RoutineTag::geqrf, "geqrf"},
    {RoutineTag::ormqr, "ormqr"},
    {RoutineTag::tpqrt, "tpqrt"},
    {RoutineTag::tpmqrt, "tpmqrt"},
    {RoutineTag::custom, "custom"},
    {RoutineTag::send, "send"},
    {RoutineTag::recv, "recv"},
    {RoutineTag::isend, "isend"},
    {RoutineTag::irecv, "irecv"},
    {RoutineTag::bcast, "bcast"},
    {RoutineTag::reduce, "reduce"},
    {RoutineTag::allreduce, "allreduce"},
    {RoutineTag::allgather, "allgather"},
    {RoutineTag::scatter, "scatter"},
    {RoutineTag::gather, "gather"},
    {RoutineTag::iscatter, "iscatter"},
}};

}  // namespace

bool is_compute_tag(RoutineTag t) {
  return t <= RoutineTag::custom;
}

bool is_p2p_tag(RoutineTag t) {
  return t == RoutineTag::send || t == RoutineTag::recv || t == RoutineTag::isend ||
         t == RoutineTag::irecv;
}

bool is_collective_tag(RoutineTag t) {
  return t >= RoutineTag::bcast;
}

bool is_comm_tag(RoutineTag t) {
  return is_p2p_tag(t) || is_collective_tag(t);
}

bool is_nonblocking_tag(RoutineTag t) {
  return t == RoutineTag::isend || t == RoutineTag::irecv || t == RoutineTag::iscatter;
}

const char* to_string(RoutineTag t) {
  for (const auto& e : kTagNames) {
    if (e.tag == t) return e.name;
  }
  return "?";
}

RoutineTag routine_tag_from_string(const std::string& name) {
  for (const auto& e : kTagNames) {
    if (name == e.name) return e.tag;
  }
  throw UnknownKernelError("unknown routine tag: " + name);
}

std::uint64_t KernelSignature::hash() const {
  // FNV-1a over the tag byte and the little-endian parameter bytes.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  h ^= static_cast<std::uint64_t>(tag);
  h *= 1099511628211ull;
  for (std::int64_t p : params) mix(static_cast<std::uint64_t>(p));
  return h;
}

std::string KernelSignature::str() const {
  std::ostringstream os;
  os << to_string(tag) << '(';
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) os << ',';
    os << params[i];
  }
  os << ')';
  return os.str();
}

}  // namespace pathtune
