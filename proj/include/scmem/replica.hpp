#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "scmem/types.hpp"

namespace scmem {

struct ValidationSplit {
  std::vector<PendingUpdate> validated;
  std::vector<PendingUpdate> remaining;
};

/// Splits a pending set into the updates that can be incorporated now and
/// those that must keep waiting. A candidate needs stamps from a strict
/// majority, and it is demoted whenever some non-candidate update is not
/// known to have been seen after it by a strict majority; demotions cascade
/// until a fixpoint.
inline ValidationSplit validate_step(std::vector<PendingUpdate> pending, int n) {
  std::vector<bool> candidate(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i)
    candidate[i] = 2 * pending[i].known_count() > n;

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (!candidate[i]) continue;
      for (std::size_t j = 0; j < pending.size(); ++j) {
        if (candidate[j]) continue;
        int seen_first = 0;  // processes known to have stamped i before j
        for (int l = 0; l < n; ++l)
          if (slot_before(pending[i].stamps[l], pending[j].stamps[l])) ++seen_first;
        if (2 * seen_first <= n) {
          candidate[i] = false;
          changed = true;
          break;
        }
      }
    }
  }

  ValidationSplit split;
  for (std::size_t i = 0; i < pending.size(); ++i)
    (candidate[i] ? split.validated : split.remaining).push_back(std::move(pending[i]));
  return split;
}

/// State of one replica of the sequentially consistent snapshot memory.
///
/// The replica is a pure event-driven state machine: each public call is one
/// synchronous transition from (state, input) to (state, outputs). There is
/// no internal concurrency and no wall-clock dependence, so a driver can
/// replay any input sequence and obtain the identical outputs.
class Replica {
public:
  using Message = ProtocolMessage;

  Replica(ProcessId self, int n) : self_(self), n_(n) {
    if (n < 1 || self < 0 || self >= n)
      throw ConfigError("replica id " + std::to_string(self) + " out of range for n=" +
                        std::to_string(n));
    values_.assign(n, 0);
    validated_stamps_.assign(n, 0);
  }

  StepResult<Message> on_invoke(const OpRequest& op) {
    StepResult<Message> out;
    switch (op.kind) {
      case OpKind::Write:
        if (!has_own_pending() && !deferred_) {
          propose(op.value, out);
          drain(out);
        } else {
          deferred_ = op.value;  // overwrites any previously deferred value
        }
        out.completions.push_back({op.op_id, {}});  // writes return at once
        break;
      case OpKind::Snapshot:
        waiting_snapshots_.push_back(op.op_id);
        break;
      default:
        throw ConfigError("snapshot memory supports write and snapshot only");
    }
    finish_ready_snapshots(out);
    return out;
  }

  StepResult<Message> on_deliver(ProcessId from, const Message& m) {
    StepResult<Message> out;
    handle(from, m, out);
    drain(out);
    finish_ready_snapshots(out);
    return out;
  }

  // Accessors used by monitors and tests.
  ProcessId id() const { return self_; }
  int size() const { return n_; }
  const std::vector<Value>& values() const { return values_; }
  const std::vector<Stamp>& validated_stamps() const { return validated_stamps_; }
  Stamp send_clock() const { return send_clock_; }
  const std::vector<PendingUpdate>& pending() const { return pending_; }
  const std::optional<Value>& deferred() const { return deferred_; }
  bool has_own_pending() const {
    return std::any_of(pending_.begin(), pending_.end(),
                       [&](const PendingUpdate& g) { return g.writer == self_; });
  }
  /// The gate a snapshot must pass: no deferred value and no own update
  /// still awaiting validation.
  bool idle() const { return !deferred_ && !has_own_pending(); }

private:
  void propose(Value v, StepResult<Message>& out) {
    ++send_clock_;
    queue_broadcast({v, self_, send_clock_, send_clock_}, out);
  }

  void queue_broadcast(const Message& m, StepResult<Message>& out) {
    out.broadcasts.push_back(m);
    self_queue_.push_back(m);
  }

  void drain(StepResult<Message>& out) {
    while (!self_queue_.empty()) {
      Message m = self_queue_.front();
      self_queue_.pop_front();
      handle(self_, m, out);
    }
  }

  void handle(ProcessId from, const Message& m, StepResult<Message>& out) {
    if (from < 0 || from >= n_ || m.writer < 0 || m.writer >= n_)
      throw ProtocolError("message with process id out of range");
    if (m.writer_stamp == 0 || m.sender_stamp == 0)
      throw ProtocolError("message with zero stamp");
    if (from == m.writer && m.sender_stamp != m.writer_stamp)
      throw ProtocolError("writer forwarded its own update with a foreign stamp");

    if (m.writer_stamp > validated_stamps_[m.writer]) {
      auto it = std::find_if(pending_.begin(), pending_.end(), [&](const PendingUpdate& g) {
        return g.update() == m.update();
      });
      if (it != pending_.end()) {
        if (it->stamps[from].known())
          throw InvariantViolation("second message for update " + to_string(m.update()) +
                                   " from process " + std::to_string(from));
        it->stamps[from] = StampSlot(m.sender_stamp);
      } else {
        if (m.writer != self_) {
          ++send_clock_;
          queue_broadcast({m.value, m.writer, m.writer_stamp, send_clock_}, out);
        }
        PendingUpdate g{m.value, m.writer, m.writer_stamp, StampVector(n_)};
        g.stamps[from] = StampSlot(m.sender_stamp);
        pending_.push_back(std::move(g));
      }
    }

    run_validation(out);
  }

  void run_validation(StepResult<Message>& out) {
    ValidationSplit split = validate_step(std::move(pending_), n_);
    pending_ = std::move(split.remaining);
    for (const PendingUpdate& g : split.validated) {
      if (validated_stamps_[g.writer] < g.writer_stamp) {
        validated_stamps_[g.writer] = g.writer_stamp;
        values_[g.writer] = g.value;
      }
    }
    if (deferred_ && !has_own_pending()) {
      Value v = *deferred_;
      deferred_.reset();
      propose(v, out);
    }
  }

  void finish_ready_snapshots(StepResult<Message>& out) {
    if (waiting_snapshots_.empty() || !idle()) return;
    for (int op_id : waiting_snapshots_)
      out.completions.push_back({op_id, values_});
    waiting_snapshots_.clear();
  }

  ProcessId self_;
  int n_;
  std::vector<Value> values_;            // latest validated value per writer
  std::vector<Stamp> validated_stamps_;  // stamp of that value, per writer
  Stamp send_clock_ = 0;                 // stamps every message this replica sends
  std::vector<PendingUpdate> pending_;
  std::optional<Value> deferred_;        // write buffered behind an unvalidated own update
  std::deque<int> waiting_snapshots_;
  std::deque<Message> self_queue_;
};

/// Removes the given updates from the pending set and folds them into the
/// validated view, keeping only the newest stamp per writer. Iteration order
/// does not matter because of the stamp guard.
inline void apply_validated(std::vector<Value>& values, std::vector<Stamp>& stamps,
                            std::vector<PendingUpdate>& pending,
                            const std::vector<PendingUpdate>& validated) {
  for (const PendingUpdate& g : validated) {
    pending.erase(std::remove_if(pending.begin(), pending.end(),
                                 [&](const PendingUpdate& p) { return p.update() == g.update(); }),
                  pending.end());
    if (stamps[g.writer] < g.writer_stamp) {
      stamps[g.writer] = g.writer_stamp;
      values[g.writer] = g.value;
    }
  }
}

}  // namespace scmem
