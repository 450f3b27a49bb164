#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scmem/netsim.hpp"
#include "scmem/types.hpp"

namespace scmem {

// Majority-quorum emulation of an array of SWMR registers, used as the
// latency/message-count baseline. Writes are a single round (the writer owns
// the timestamp of its register); reads query a majority and write the
// freshest pair back before returning.

enum class AbdKind : int {
  Update = 1,
  UpdateAck,
  Query,
  QueryReply,
  WriteBack,
  WriteBackAck,
};

struct AbdMessage {
  AbdKind kind = AbdKind::Update;
  ProcessId origin = -1;       // process running the operation
  std::uint64_t op_seq = 0;    // per-origin operation counter
  int reg = 0;
  Stamp ts = 0;
  Value value = 0;
};

class AbdReplica {
public:
  using Message = AbdMessage;

  AbdReplica(ProcessId self, int n) : self_(self), n_(n) {
    if (n < 1 || self < 0 || self >= n) throw ConfigError("replica id out of range");
    ts_.assign(n, 0);
    val_.assign(n, 0);
  }

  StepResult<Message> on_invoke(const OpRequest& op) {
    StepResult<Message> out;
    if (pending_) throw InvariantViolation("operation invoked while another is in progress");
    ++op_seq_;
    switch (op.kind) {
      case OpKind::Write: {
        pending_ = Pending{op.op_id, OpKind::Write, self_, op_seq_};
        Message m{AbdKind::Update, self_, op_seq_, self_, ts_[self_] + 1, op.value};
        out.broadcasts.push_back(m);
        consume_own(m, out);
        break;
      }
      case OpKind::Read: {
        int reg = static_cast<int>(op.value);
        if (reg < 0 || reg >= n_) throw ConfigError("read target out of range");
        pending_ = Pending{op.op_id, OpKind::Read, reg, op_seq_};
        Message m{AbdKind::Query, self_, op_seq_, reg, 0, 0};
        out.broadcasts.push_back(m);
        consume_own(m, out);
        break;
      }
      default:
        throw ConfigError("the register baseline supports write and read only");
    }
    return out;
  }

  StepResult<Message> on_deliver(ProcessId from, const Message& m) {
    StepResult<Message> out;
    handle(from, m, out);
    return out;
  }

  const std::vector<Stamp>& stamps() const { return ts_; }
  const std::vector<Value>& values() const { return val_; }
  bool busy() const { return pending_.has_value(); }

private:
  struct Pending {
    int op_id = -1;
    OpKind kind = OpKind::Write;
    int reg = 0;
    std::uint64_t seq = 0;
    int phase = 1;
    int acks = 0;
    Stamp best_ts = 0;
    Value best_val = 0;
  };

  // The emitter receives its own broadcast instantly and replies to itself;
  // the reply shows up in `sends` so the driver can account for it.
  void consume_own(const Message& m, StepResult<Message>& out) {
    handle(self_, m, out);
  }

  void handle(ProcessId from, const Message& m, StepResult<Message>& out) {
    switch (m.kind) {
      case AbdKind::Update:
      case AbdKind::WriteBack: {
        apply(m.reg, m.ts, m.value);
        AbdKind ack = (m.kind == AbdKind::Update) ? AbdKind::UpdateAck : AbdKind::WriteBackAck;
        Message reply{ack, m.origin, m.op_seq, m.reg, m.ts, 0};
        if (from == self_) {
          out.sends.emplace_back(self_, reply);
          handle(self_, reply, out);
        } else {
          out.sends.emplace_back(from, reply);
        }
        break;
      }
      case AbdKind::Query: {
        Message reply{AbdKind::QueryReply, m.origin, m.op_seq, m.reg, ts_[m.reg], val_[m.reg]};
        if (from == self_) {
          out.sends.emplace_back(self_, reply);
          handle(self_, reply, out);
        } else {
          out.sends.emplace_back(from, reply);
        }
        break;
      }
      case AbdKind::UpdateAck: {
        if (!matches(m, OpKind::Write, 1)) break;
        if (++pending_->acks * 2 > n_) {
          out.completions.push_back({pending_->op_id, {}});
          pending_.reset();
        }
        break;
      }
      case AbdKind::QueryReply: {
        if (!matches(m, OpKind::Read, 1)) break;
        if (m.ts > pending_->best_ts) {
          pending_->best_ts = m.ts;
          pending_->best_val = m.value;
        }
        if (++pending_->acks * 2 > n_) {
          pending_->phase = 2;
          pending_->acks = 0;
          Message wb{AbdKind::WriteBack, self_, pending_->seq, pending_->reg, pending_->best_ts,
                     pending_->best_val};
          out.broadcasts.push_back(wb);
          consume_own(wb, out);
        }
        break;
      }
      case AbdKind::WriteBackAck: {
        if (!matches(m, OpKind::Read, 2)) break;
        if (++pending_->acks * 2 > n_) {
          out.completions.push_back({pending_->op_id, {pending_->best_val}});
          pending_.reset();
        }
        break;
      }
    }
  }

  bool matches(const Message& m, OpKind kind, int phase) const {
    return pending_ && pending_->kind == kind && pending_->seq == m.op_seq &&
           pending_->phase == phase && m.origin == self_;
  }

  void apply(int reg, Stamp ts, Value v) {
    if (ts > ts_[reg]) {
      ts_[reg] = ts;
      val_[reg] = v;
    }
  }

  ProcessId self_;
  int n_;
  std::vector<Stamp> ts_;
  std::vector<Value> val_;
  std::uint64_t op_seq_ = 0;
  std::optional<Pending> pending_;
};

template <>
struct SimTraits<AbdReplica> {
  static std::vector<Stamp> digest(const AbdReplica& node) { return node.stamps(); }
  static MessageFields fields(const AbdMessage& m) {
    return {m.origin, m.op_seq, static_cast<Stamp>(m.kind), m.value};
  }
  static bool is_proposal(const AbdMessage& m, ProcessId sender) {
    return m.kind == AbdKind::Update && m.origin == sender;
  }
  static int op_object(const ScheduledOp& op) {
    return op.kind == OpKind::Read ? static_cast<int>(op.value) : op.process;
  }
  static void check_completion(const AbdReplica&, OpKind) {}
};

inline RunResult run_abd_sim(const SimConfig& cfg) { return Simulation<AbdReplica>(cfg).run(); }

}  // namespace scmem
