#include "pathtune/program.hpp"

#include <fstream>
#include <sstream>

#include "pathtune/errors.hpp"

namespace pathtune {

bool is_blocking_collective(EventKind k) {
  switch (k) {
    case EventKind::bcast:
    case EventKind::reduce:
    case EventKind::allreduce:
    case EventKind::allgather:
    case EventKind::scatter:
    case EventKind::gather:
      return true;
    default:
      return false;
  }
}

bool is_collective_event(EventKind k) {
  return is_blocking_collective(k) || k == EventKind::iscatter;
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::compute: return "compute";
    case EventKind::send: return "send";
    case EventKind::recv: return "recv";
    case EventKind::isend: return "isend";
    case EventKind::irecv: return "irecv";
    case EventKind::wait: return "wait";
    case EventKind::bcast: return "bcast";
    case EventKind::reduce: return "reduce";
    case EventKind::allreduce: return "allreduce";
    case EventKind::allgather: return "allgather";
    case EventKind::scatter: return "scatter";
    case EventKind::gather: return "gather";
    case EventKind::iscatter: return "iscatter";
    case EventKind::comm_split: return "split";
    case EventKind::region_begin: return "region_begin";
    case EventKind::region_end: return "region_end";
  }
  return "?";
}

KernelSignature ProgramEvent::signature(const std::vector<Channel>& channels) const {
  KernelSignature sig;
  sig.tag = tag;
  if (kind == EventKind::compute) {
    sig.params = params;
    return sig;
  }
  sig.params.push_back(bytes);
  if (is_collective_event(kind)) {
    // Geometry (stride,size) pairs; offsets excluded so translated fibers pool.
    const Channel& ch = channels.at(static_cast<std::size_t>(channel));
    if (ch.cartesian) {
      for (const auto& d : ch.dims) {
        sig.params.push_back(d.stride);
        sig.params.push_back(d.size);
      }
    } else {
      sig.params.push_back(0);
      sig.params.push_back(ch.member_count());
    }
  } else {
    // Point-to-point: canonical size-2 stride-1 sub-communicator.
    sig.params.push_back(1);
    sig.params.push_back(2);
  }
  return sig;
}

Program Program::empty(int world_size) {
  Program p;
  p.world_size = world_size;
  Channel world;
  world.name = "world";
  world.offset = 0;
  if (world_size >= 2) world.dims = {ChannelDim{1, world_size}};
  world.hash = channel_hash(world.dims);
  world.is_maximal = true;
  p.channels.push_back(std::move(world));
  p.script.resize(static_cast<std::size_t>(world_size));
  return p;
}

int Program::add_channel(Channel ch) {
  channels.push_back(std::move(ch));
  return static_cast<int>(channels.size()) - 1;
}

int Program::find_channel(const std::string& name) const {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

EventKind comm_kind_from_word(const std::string& w) {
  if (w == "send") return EventKind::send;
  if (w == "recv") return EventKind::recv;
  if (w == "isend") return EventKind::isend;
  if (w == "irecv") return EventKind::irecv;
  if (w == "bcast") return EventKind::bcast;
  if (w == "reduce") return EventKind::reduce;
  if (w == "allreduce") return EventKind::allreduce;
  if (w == "allgather") return EventKind::allgather;
  if (w == "scatter") return EventKind::scatter;
  if (w == "gather") return EventKind::gather;
  if (w == "iscatter") return EventKind::iscatter;
  throw ParseError("unknown event: " + w);
}

RoutineTag comm_tag_for(EventKind k) {
  switch (k) {
    case EventKind::send: return RoutineTag::send;
    case EventKind::recv: return RoutineTag::recv;
    case EventKind::isend: return RoutineTag::isend;
    case EventKind::irecv: return RoutineTag::irecv;
    case EventKind::bcast: return RoutineTag::bcast;
    case EventKind::reduce: return RoutineTag::reduce;
    case EventKind::allreduce: return RoutineTag::allreduce;
    case EventKind::allgather: return RoutineTag::allgather;
    case EventKind::scatter: return RoutineTag::scatter;
    case EventKind::gather: return RoutineTag::gather;
    case EventKind::iscatter: return RoutineTag::iscatter;
    default: throw ParseError("not a comm kind");
  }
}

}  // namespace

Program parse_script(std::istream& in) {
  Program p;
  bool have_world = false;
  std::string line;
  int lineno = 0;
  auto fail = [&lineno](const std::string& msg) {
    throw ParseError("script line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;

    if (word == "world") {
      int ws = 0;
      if (!(ls >> ws) || ws < 1) fail("world size must be a positive integer");
      p = Program::empty(ws);
      have_world = true;
      continue;
    }
    if (!have_world) fail("script must open with a world directive");

    if (word == "channel") {
      std::string name, kw;
      if (!(ls >> name >> kw) || kw != "ranks") fail("expected: channel <name> ranks <r...>");
      std::vector<int> ranks;
      int r;
      while (ls >> r) ranks.push_back(r);
      if (ranks.size() < 2) fail("channel needs at least 2 ranks");
      for (int m : ranks) {
        if (m < 0 || m >= p.world_size) fail("channel rank out of range");
      }
      Channel ch;
      try {
        ch = infer_channel(ranks);
      } catch (const NonCartesianError&) {
        ch.cartesian = false;
        ch.raw_members = ranks;
        ch.offset = ranks.front();
        KernelSignature id;
        id.tag = RoutineTag::custom;
        id.params.assign(ranks.begin(), ranks.end());
        ch.hash = id.hash();
      }
      ch.name = name;
      if (p.find_channel(name) >= 0) fail("duplicate channel name: " + name);
      p.add_channel(std::move(ch));
      continue;
    }

    if (word != "rank") fail("expected rank/channel/world directive");
    int rank = -1;
    std::string colon;
    if (!(ls >> rank >> colon) || colon != ":") fail("expected: rank <r>: <event>");
    if (rank < 0 || rank >= p.world_size) fail("rank out of range");
    std::string ev;
    if (!(ls >> ev)) fail("missing event");

    ProgramEvent e;
    if (ev == "compute") {
      std::string tag;
      if (!(ls >> tag)) fail("compute needs a routine tag");
      e.kind = EventKind::compute;
      e.tag = routine_tag_from_string(tag);
      if (!is_compute_tag(e.tag)) fail(tag + " is not a computation routine");
      std::int64_t v;
      while (ls >> v) e.params.push_back(v);
    } else if (ev == "wait") {
      e.kind = EventKind::wait;
      if (!(ls >> e.request)) fail("wait needs a request name");
    } else if (ev == "split") {
      e.kind = EventKind::comm_split;
      std::string name;
      if (!(ls >> name)) fail("split needs a channel name");
      e.channel = p.find_channel(name);
      if (e.channel < 0) fail("split of undeclared channel " + name);
    } else if (ev == "region_begin" || ev == "region_end") {
      e.kind = ev == "region_begin" ? EventKind::region_begin : EventKind::region_end;
      if (!(ls >> e.label)) fail(ev + " needs a label");
    } else {
      e.kind = comm_kind_from_word(ev);
      e.tag = comm_tag_for(e.kind);
      if (is_collective_event(e.kind)) {
        std::string chname;
        if (!(ls >> e.root >> e.bytes >> chname)) {
          fail(ev + " needs: <root> <bytes> <channel>");
        }
        e.channel = p.find_channel(chname);
        if (e.channel < 0) fail("undeclared channel " + chname);
        if (e.kind == EventKind::iscatter && !(ls >> e.request)) {
          fail("iscatter needs a request name");
        }
      } else {
        if (!(ls >> e.peer >> e.bytes)) fail(ev + " needs: <peer> <bytes>");
        if (e.peer < 0 || e.peer >= p.world_size || e.peer == rank) fail("bad peer");
        if (e.kind == EventKind::isend || e.kind == EventKind::irecv) {
          if (!(ls >> e.request)) fail(ev + " needs a request name");
        }
      }
      if (e.bytes < 0) fail("bytes must be nonnegative");
    }
    p.script[static_cast<std::size_t>(rank)].push_back(std::move(e));
  }
  if (!have_world) throw ParseError("empty script");
  return p;
}

Program parse_script_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open script file: " + path);
  return parse_script(in);
}

std::string serialize_script(const Program& p) {
  std::ostringstream os;
  os << "world " << p.world_size << "\n";
  for (std::size_t i = 1; i < p.channels.size(); ++i) {
    os << "channel " << p.channels[i].name << " ranks";
    for (int m : p.channels[i].members()) os << ' ' << m;
    os << "\n";
  }
  for (int r = 0; r < p.world_size; ++r) {
    for (const auto& e : p.script[static_cast<std::size_t>(r)]) {
      os << "rank " << r << " : ";
      switch (e.kind) {
        case EventKind::compute:
          os << "compute " << to_string(e.tag);
          for (auto v : e.params) os << ' ' << v;
          break;
        case EventKind::wait:
          os << "wait " << e.request;
          break;
        case EventKind::comm_split:
          os << "split " << p.channels[static_cast<std::size_t>(e.channel)].name;
          break;
        case EventKind::region_begin:
        case EventKind::region_end:
          os << to_string(e.kind) << ' ' << e.label;
          break;
        default:
          os << to_string(e.kind) << ' ';
          if (is_collective_event(e.kind)) {
            os << e.root << ' ' << e.bytes << ' '
               << p.channels[static_cast<std::size_t>(e.channel)].name;
            if (e.kind == EventKind::iscatter) os << ' ' << e.request;
          } else {
            os << e.peer << ' ' << e.bytes;
            if (!e.request.empty()) os << ' ' << e.request;
          }
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace pathtune
