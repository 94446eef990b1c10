#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pathtune/channels.hpp"
#include "pathtune/signature.hpp"

namespace pathtune {

enum class EventKind {
  compute,
  send,
  recv,
  isend,
  irecv,
  wait,
  bcast,
  reduce,
  allreduce,
  allgather,
  scatter,
  gather,
  iscatter,
  comm_split,
  region_begin,
  region_end,
};

bool is_blocking_collective(EventKind k);
bool is_collective_event(EventKind k);  // includes iscatter
const char* to_string(EventKind k);

// One scripted step of a rank. Communication events reference a channel by
// index into Program::channels; nonblocking events pair with the wait that
// carries the same request name on the same rank.
struct ProgramEvent {
  EventKind kind = EventKind::compute;
  RoutineTag tag = RoutineTag::custom;   // compute routine or comm routine
  std::vector<std::int64_t> params;      // compute parameterization
  std::int64_t bytes = 0;                // message payload for comm kinds
  int peer = -1;                         // p2p partner
  int root = -1;                         // collective root where meaningful
  int channel = -1;                      // index into Program::channels
  std::string request;                   // nonblocking request name
  std::string label;                     // region name

  KernelSignature signature(const std::vector<Channel>& channels) const;
};

struct Program {
  int world_size = 0;
  std::vector<Channel> channels;             // index 0 is always the world channel
  std::vector<std::vector<ProgramEvent>> script;  // one event list per rank

  static Program empty(int world_size);
  int add_channel(Channel ch);               // returns channel index
  int find_channel(const std::string& name) const;  // -1 when absent
};

// Line-oriented script format:
//   world <p>
//   channel <name> ranks <r0> <r1> ...
//   rank <r>: compute <tag> <p0> <p1> ...
//   rank <r>: send <peer> <bytes>            (also recv)
//   rank <r>: isend <peer> <bytes> <req>     (also irecv)
//   rank <r>: wait <req>
//   rank <r>: bcast <root> <bytes> <channel> (also reduce/allreduce/...)
//   rank <r>: iscatter <root> <bytes> <channel> <req>
//   rank <r>: split <channel>
//   rank <r>: region_begin <label>           (also region_end)
Program parse_script(std::istream& in);
Program parse_script_file(const std::string& path);
std::string serialize_script(const Program& p);

enum class ValidationStatus { ok, deadlock_risk, unmatched_request };

struct ValidationResult {
  ValidationStatus status = ValidationStatus::ok;
  std::string detail;
  explicit operator bool() const { return status == ValidationStatus::ok; }
};

// Static matching of sends/recvs/collectives/waits via a costless dry run
// of the blocking semantics. Rejects scripts that stall or leave requests
// outstanding.
ValidationResult validate(const Program& program);

}  // namespace pathtune
