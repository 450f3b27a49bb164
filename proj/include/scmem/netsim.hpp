#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "scmem/history.hpp"
#include "scmem/replica.hpp"
#include "scmem/types.hpp"

namespace scmem {

enum class EventKind { Invoke, Respond, Deliver, Propose, Crash };

inline const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::Invoke: return "INVOKE";
    case EventKind::Respond: return "RESPOND";
    case EventKind::Deliver: return "DELIVER";
    case EventKind::Propose: return "PROPOSE";
    case EventKind::Crash: return "CRASH";
  }
  return "?";
}

struct ScheduledOp {
  VirtualTime time = 0;
  ProcessId process = 0;
  OpKind kind = OpKind::Write;
  Value value = 0;  // written value, or target register for reads
};

struct ScheduledCrash {
  VirtualTime time = 0;
  ProcessId process = 0;
  int cut = -1;  // >= 0: truncate a broadcast in progress after this many sends
};

struct SimConfig {
  int n = 3;
  int max_crashes = 0;
  std::uint64_t seed = 0;
  VirtualTime delay_min = 1;
  VirtualTime delay_max = 10;
  std::vector<ScheduledOp> ops;
  std::vector<ScheduledCrash> crashes;
  // Fixed per-channel delays used by crafted scenarios; any channel not
  // listed falls back to the seeded draw.
  std::map<std::pair<ProcessId, ProcessId>, VirtualTime> channel_delay;
  std::uint64_t event_cap = 1'000'000;
  bool assert_liveness = true;
  bool monitor = true;
};

inline void validate_config(const SimConfig& c) {
  if (c.n < 1) throw ConfigError("n must be at least 1");
  if (c.delay_min <= 0 || c.delay_min > c.delay_max)
    throw ConfigError("delay range must satisfy 0 < min <= max");
  if (c.assert_liveness && 2 * c.max_crashes >= c.n)
    throw ConfigError("liveness requires fewer than n/2 crashes (got t=" +
                      std::to_string(c.max_crashes) + ", n=" + std::to_string(c.n) + ")");
  if (static_cast<int>(c.crashes.size()) > c.max_crashes)
    throw ConfigError("crash schedule exceeds the configured fault budget");
  for (const auto& op : c.ops)
    if (op.process < 0 || op.process >= c.n) throw ConfigError("scheduled op: process out of range");
  for (const auto& cr : c.crashes) {
    if (cr.process < 0 || cr.process >= c.n) throw ConfigError("crash: process out of range");
    if (cr.cut > c.n) throw ConfigError("crash: cut index out of range");
  }
}

/// Protocol-independent rendering of a message for the trace.
struct MessageFields {
  ProcessId writer = -1;
  Stamp writer_stamp = 0;
  Stamp sender_stamp = 0;
  Value value = 0;
};

struct TraceEvent {
  VirtualTime time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Deliver;
  ProcessId sender = -1;
  ProcessId receiver = -1;
  MessageFields msg;
  int op_id = -1;
  std::vector<Stamp> digest;  // acting process's stamp vector after the transition
};

/// The deterministic record of one run: every event in processing order,
/// plus per-operation causal-depth annotations.
struct Trace {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
  std::map<int, int> op_depth;
};

/// How each node type plugs into the simulator. The default works for any
/// node exposing Replica's surface; AbdReplica specializes it.
template <class Node>
struct SimTraits {
  static std::vector<Stamp> digest(const Node& node) { return node.validated_stamps(); }
  static MessageFields fields(const typename Node::Message& m) {
    return {m.writer, m.writer_stamp, m.sender_stamp, m.value};
  }
  // A proposal is the message that introduces a new update of the sender's own.
  static bool is_proposal(const typename Node::Message& m, ProcessId sender) {
    return m.writer == sender && m.writer_stamp == m.sender_stamp;
  }
  static int op_object(const ScheduledOp&) { return 0; }
  static void check_completion(const Node& node, OpKind kind) {
    if (kind == OpKind::Snapshot && !node.idle())
      throw InvariantViolation("snapshot completed while an own update was still pending");
  }
};

struct RunResult {
  Trace trace;
  History history;
  bool drained = false;      // event queue exhausted below the cap
  bool liveness_ok = false;  // drained and no live process stuck in an operation
  std::vector<int> stuck_ops;
  std::vector<bool> crashed;
};

/// Discrete-event simulation of n nodes over reliable asynchronous FIFO
/// channels with crash injection. Fully deterministic for a given config:
/// message delays come from the seeded generator and ties are broken by a
/// schedule-order counter.
template <class Node>
class Simulation {
public:
  using Message = typename Node::Message;
  using Traits = SimTraits<Node>;

  explicit Simulation(SimConfig config) : cfg_(std::move(config)), rng_(cfg_.seed) {
    validate_config(cfg_);
    for (ProcessId p = 0; p < cfg_.n; ++p) nodes_.push_back(std::make_unique<Node>(p, cfg_.n));
    dead_.assign(cfg_.n, false);
    open_op_.assign(cfg_.n, -1);
    window_.assign(cfg_.n, std::vector<int>(cfg_.n, 0));
    last_delivery_.assign(cfg_.n, std::vector<VirtualTime>(cfg_.n, 0));
    prev_digest_.resize(cfg_.n);
    backlog_.resize(cfg_.n);
    trace_.n = cfg_.n;
    trace_.seed = cfg_.seed;
    history_.num_processes = cfg_.n;
  }

  RunResult run() {
    for (std::size_t i = 0; i < cfg_.ops.size(); ++i)
      push({cfg_.ops[i].time, next_seq(), Item::Invoke, cfg_.ops[i], static_cast<int>(i), {}, -1});
    for (std::size_t i = 0; i < cfg_.crashes.size(); ++i)
      push({cfg_.crashes[i].time, next_seq(), Item::Crash, {}, -1, {}, static_cast<int>(i)});

    std::uint64_t pops = 0;
    bool drained = true;
    while (!queue_.empty()) {
      if (++pops > cfg_.event_cap) {
        drained = false;
        break;
      }
      Item item = queue_.top();
      queue_.pop();
      now_ = item.time;
      switch (item.type) {
        case Item::Invoke: handle_invoke(item); break;
        case Item::Deliver: handle_deliver(item); break;
        case Item::Crash: handle_crash(item.crash_index); break;
      }
    }

    RunResult result;
    result.drained = drained;
    result.liveness_ok = drained;
    for (ProcessId p = 0; p < cfg_.n; ++p)
      if (open_op_[p] >= 0 && !dead_[p]) {
        result.liveness_ok = false;
        result.stuck_ops.push_back(open_op_[p]);
      }
    result.trace = trace_;
    result.history = history_;
    result.crashed.assign(dead_.begin(), dead_.end());
    return result;
  }

  const Node& node(ProcessId p) const { return *nodes_[p]; }
  const SimConfig& config() const { return cfg_; }
  bool crashed(ProcessId p) const { return dead_[p]; }

private:
  struct Envelope {
    ProcessId from = -1;
    ProcessId to = -1;
    Message msg;
    std::vector<int> hops;    // per pending-op owner, sender's window depth at send
    std::vector<int> hop_op;  // the op those hops were measured against, -1 if none
  };

  struct Item {
    VirtualTime time = 0;
    std::uint64_t seq = 0;
    enum Type { Invoke, Deliver, Crash } type = Deliver;
    ScheduledOp op;
    int op_id = -1;
    Envelope env;
    int crash_index = -1;

    bool operator>(const Item& other) const {
      return std::tie(time, seq) > std::tie(other.time, other.seq);
    }
  };

  std::uint64_t next_seq() { return seq_counter_++; }

  void push(Item item) { queue_.push(std::move(item)); }

  VirtualTime draw_delay(ProcessId from, ProcessId to) {
    auto it = cfg_.channel_delay.find({from, to});
    if (it != cfg_.channel_delay.end()) return it->second;
    auto span = static_cast<std::uint64_t>(cfg_.delay_max - cfg_.delay_min + 1);
    return cfg_.delay_min + static_cast<VirtualTime>(rng_() % span);
  }

  void handle_crash(int index) {
    ProcessId p = cfg_.crashes[index].process;
    if (dead_[p]) return;  // already applied through a broadcast cut
    dead_[p] = true;
    record({now_, next_seq(), EventKind::Crash, p, -1, {}, -1, {}});
  }

  void handle_invoke(const Item& item) {
    ProcessId p = item.op.process;
    if (dead_[p]) return;
    if (open_op_[p] >= 0) {  // processes are sequential; wait for the open op
      backlog_[p].push_back(item);
      return;
    }
    open_op_[p] = item.op_id;
    window_[p].assign(cfg_.n, 0);

    OperationRecord rec;
    rec.op_id = item.op_id;
    rec.process = p;
    rec.object = Traits::op_object(item.op);
    rec.kind = item.op.kind;
    rec.arg = item.op.value;
    rec.invoke_index = static_cast<std::int64_t>(trace_.events.size());
    history_.ops.push_back(rec);

    auto step = nodes_[p]->on_invoke({item.op_id, item.op.kind, item.op.value});
    TraceEvent ev{now_, item.seq, EventKind::Invoke, p, -1, {}, item.op_id, Traits::digest(*nodes_[p])};
    ev.msg.value = item.op.value;
    process_transition(p, ev, std::move(step));
  }

  void handle_deliver(const Item& item) {
    const Envelope& env = item.env;
    if (dead_[env.to]) return;
    // Extend causal chains: a message sent before an operation's invocation
    // starts a fresh chain inside that operation's window.
    for (ProcessId o = 0; o < cfg_.n; ++o) {
      if (open_op_[o] < 0) continue;
      int base = (env.hop_op[o] == open_op_[o]) ? env.hops[o] : 0;
      window_[o][env.to] = std::max(window_[o][env.to], base + 1);
    }

    auto step = nodes_[env.to]->on_deliver(env.from, env.msg);
    TraceEvent ev{now_,       item.seq, EventKind::Deliver,
                  env.from,   env.to,   Traits::fields(env.msg),
                  -1,         Traits::digest(*nodes_[env.to])};
    process_transition(env.to, ev, std::move(step));
  }

  void process_transition(ProcessId p, TraceEvent trigger, StepResult<Message> step) {
    // A crash scheduled at exactly this instant with a cut index interrupts
    // the transition: the first broadcast is truncated after `cut` sends
    // (counted over receivers in ascending id order, self included) and
    // everything after it, responses included, is lost with the process.
    int cut = -1;
    for (std::size_t i = 0; i < cfg_.crashes.size(); ++i) {
      const auto& cr = cfg_.crashes[i];
      if (cr.process == p && cr.time == now_ && cr.cut >= 0 && !dead_[p]) {
        cut = cr.cut;
        dead_[p] = true;
        break;
      }
    }
    if (cut >= 0) {
      if (step.broadcasts.size() > 1) step.broadcasts.resize(1);
      step.sends.clear();
      step.completions.clear();
    }

    record(trigger);

    std::vector<Stamp> digest = trigger.digest;
    for (std::size_t b = 0; b < step.broadcasts.size(); ++b) {
      const Message& m = step.broadcasts[b];
      bool truncated = (cut >= 0 && b == 0);
      bool any_external = false;
      for (ProcessId to = 0; to < cfg_.n; ++to) {
        if (truncated && to >= cut) break;
        if (to == p) continue;  // self copy was consumed inside the transition
        any_external = true;
        schedule_send(p, to, m);
      }
      bool self_kept = !truncated || p < cut;
      if (Traits::is_proposal(m, p) && (any_external || self_kept))
        record({now_, next_seq(), EventKind::Propose, p, -1, Traits::fields(m), -1, digest});
      if (self_kept)
        record({now_, next_seq(), EventKind::Deliver, p, p, Traits::fields(m), -1, digest});
    }
    for (const auto& [to, m] : step.sends) {
      if (to == p)  // already applied internally; account for the hop-free delivery
        record({now_, next_seq(), EventKind::Deliver, p, p, Traits::fields(m), -1, digest});
      else
        schedule_send(p, to, m);
    }

    for (const OpCompletion& c : step.completions) {
      auto* rec = find_record(c.op_id);
      if (!rec) throw InvariantViolation("completion for unknown operation");
      rec->respond_index = static_cast<std::int64_t>(trace_.events.size());
      rec->result = c.result;
      record({now_, next_seq(), EventKind::Respond, p, -1, {}, c.op_id, digest});
      trace_.op_depth[c.op_id] = window_[p][p];
      if (cfg_.monitor) {
        Traits::check_completion(*nodes_[p], rec->kind);
        if (rec->kind == OpKind::Write && rec->respond_index <= rec->invoke_index)
          throw InvariantViolation("write responded before its invocation");
      }
      if (open_op_[p] == c.op_id) {
        open_op_[p] = -1;
        if (!backlog_[p].empty() && !dead_[p]) {
          Item next = backlog_[p].front();
          backlog_[p].pop_front();
          next.time = now_;
          next.seq = next_seq();
          push(std::move(next));
        }
      }
    }

    if (cut >= 0) record({now_, next_seq(), EventKind::Crash, p, -1, {}, -1, {}});
  }

  void schedule_send(ProcessId from, ProcessId to, const Message& m) {
    Envelope env;
    env.from = from;
    env.to = to;
    env.msg = m;
    env.hops.assign(cfg_.n, 0);
    env.hop_op.assign(cfg_.n, -1);
    for (ProcessId o = 0; o < cfg_.n; ++o)
      if (open_op_[o] >= 0) {
        env.hops[o] = window_[o][from];
        env.hop_op[o] = open_op_[o];
      }
    VirtualTime at = now_ + draw_delay(from, to);
    at = std::max(at, last_delivery_[from][to]);  // per-channel FIFO
    last_delivery_[from][to] = at;
    push({at, next_seq(), Item::Deliver, {}, -1, std::move(env), -1});
  }

  void record(TraceEvent ev) {
    ProcessId actor = (ev.kind == EventKind::Deliver) ? ev.receiver : ev.sender;
    if (cfg_.monitor && !ev.digest.empty() && actor >= 0) {
      auto& prev = prev_digest_[actor];
      if (!prev.empty())
        for (int k = 0; k < cfg_.n; ++k)
          if (ev.digest[k] < prev[k])
            throw InvariantViolation("validated stamps decreased at process " +
                                     std::to_string(actor));
      prev = ev.digest;
    }
    trace_.events.push_back(std::move(ev));
  }

  OperationRecord* find_record(int op_id) {
    for (auto it = history_.ops.rbegin(); it != history_.ops.rend(); ++it)
      if (it->op_id == op_id) return &*it;
    return nullptr;
  }

  SimConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<bool> dead_;
  std::vector<int> open_op_;
  std::vector<std::vector<int>> window_;  // window_[owner][process]: causal hops since owner's invoke
  std::vector<std::vector<VirtualTime>> last_delivery_;
  std::vector<std::vector<Stamp>> prev_digest_;
  std::vector<std::deque<Item>> backlog_;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue_;
  std::uint64_t seq_counter_ = 0;
  VirtualTime now_ = 0;
  Trace trace_;
  History history_;
};

inline RunResult run_snapshot_sim(const SimConfig& cfg) { return Simulation<Replica>(cfg).run(); }

// ---------------------------------------------------------------------------
// Trace serialization: one event per line, fields
//   time seq kind sender receiver writer wstamp sstamp value digest
// with the acting process's stamp vector as a comma list (or '-').

inline std::string serialize_trace(const Trace& t) {
  std::ostringstream out;
  out << "# trace v1\n";
  out << "# n=" << t.n << " seed=" << t.seed << "\n";
  for (const auto& e : t.events) {
    out << e.time << ' ' << e.seq << ' ' << event_name(e.kind) << ' ' << e.sender << ' '
        << e.receiver << ' ' << e.msg.writer << ' ' << e.msg.writer_stamp << ' '
        << e.msg.sender_stamp << ' ';
    if (e.kind == EventKind::Invoke || e.kind == EventKind::Respond)
      out << e.op_id;
    else
      out << e.msg.value;
    out << ' ';
    if (e.digest.empty()) {
      out << '-';
    } else {
      for (std::size_t i = 0; i < e.digest.size(); ++i) out << (i ? "," : "") << e.digest[i];
    }
    out << "\n";
  }
  for (const auto& [op, depth] : t.op_depth) out << "depth " << op << ' ' << depth << "\n";
  return out.str();
}

inline EventKind event_from_name(const std::string& s) {
  if (s == "INVOKE") return EventKind::Invoke;
  if (s == "RESPOND") return EventKind::Respond;
  if (s == "DELIVER") return EventKind::Deliver;
  if (s == "PROPOSE") return EventKind::Propose;
  if (s == "CRASH") return EventKind::Crash;
  throw ConfigError("unknown trace event kind '" + s + "'");
}

inline Trace parse_trace(const std::string& text) {
  Trace t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto npos = line.find("n=");
      auto spos = line.find("seed=");
      if (npos != std::string::npos) t.n = std::stoi(line.substr(npos + 2));
      if (spos != std::string::npos) t.seed = std::stoull(line.substr(spos + 5));
      continue;
    }
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "depth") {
      int op = 0, d = 0;
      ls >> op >> d;
      t.op_depth[op] = d;
      continue;
    }
    TraceEvent e;
    std::string kind, digest;
    std::int64_t value_or_op = 0;
    e.time = std::stoll(first);
    ls >> e.seq >> kind >> e.sender >> e.receiver >> e.msg.writer >> e.msg.writer_stamp >>
        e.msg.sender_stamp >> value_or_op >> digest;
    if (!ls) throw ConfigError("malformed trace line: " + line);
    e.kind = event_from_name(kind);
    if (e.kind == EventKind::Invoke || e.kind == EventKind::Respond)
      e.op_id = static_cast<int>(value_or_op);
    else
      e.msg.value = value_or_op;
    if (digest != "-") {
      std::istringstream ds(digest);
      std::string item;
      while (std::getline(ds, item, ',')) e.digest.push_back(std::stoull(item));
    }
    t.events.push_back(std::move(e));
  }
  return t;
}

}  // namespace scmem
