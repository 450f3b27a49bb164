#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scmem {

using ProcessId = int;
using Stamp = std::uint64_t;   // logical clock tick; 0 means "nothing yet"
using Value = std::int64_t;
using VirtualTime = std::int64_t;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Globally unique identity of a proposed update: the writer together with
/// the stamp the writer itself put on it.
struct UpdateId {
  ProcessId writer = -1;
  Stamp stamp = 0;

  friend bool operator==(const UpdateId&, const UpdateId&) = default;
  friend auto operator<=>(const UpdateId&, const UpdateId&) = default;
};

/// One slot of a stamp vector: some process's stamp for an update, or
/// unknown. Unknown orders after every finite stamp, so a slot only
/// decreases (in the ordering sense) when the actual stamp is learned.
class StampSlot {
public:
  constexpr StampSlot() = default;
  constexpr explicit StampSlot(Stamp s) : stamp_(s) {}

  constexpr bool known() const { return stamp_.has_value(); }
  constexpr Stamp value() const { return *stamp_; }

  friend constexpr bool slot_before(StampSlot a, StampSlot b) {
    if (!a.known()) return false;   // unknown is never before anything
    if (!b.known()) return true;    // finite is before unknown
    return a.value() < b.value();
  }

  friend bool operator==(const StampSlot&, const StampSlot&) = default;

private:
  std::optional<Stamp> stamp_{};
};

using StampVector = std::vector<StampSlot>;

/// Wire tuple of the protocol: the written value, the identity of the
/// update, and the stamp the sending process attached when it broadcast
/// this copy. The transport carries the sender id separately.
struct ProtocolMessage {
  Value value = 0;
  ProcessId writer = -1;
  Stamp writer_stamp = 0;
  Stamp sender_stamp = 0;

  UpdateId update() const { return {writer, writer_stamp}; }

  friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

/// Bookkeeping for a proposed but not yet validated update: the payload
/// plus, per process, the stamp that process attached (unknown until a
/// message from it arrives).
struct PendingUpdate {
  Value value = 0;
  ProcessId writer = -1;
  Stamp writer_stamp = 0;
  StampVector stamps;

  UpdateId update() const { return {writer, writer_stamp}; }

  int known_count() const {
    int c = 0;
    for (const auto& s : stamps)
      if (s.known()) ++c;
    return c;
  }
};

inline std::string to_string(const UpdateId& u) {
  return "(" + std::to_string(u.writer) + "," + std::to_string(u.stamp) + ")";
}

enum class OpKind { Write, Snapshot, Read };

/// A local operation request handed to a replica by its driver.
struct OpRequest {
  int op_id = -1;
  OpKind kind = OpKind::Write;
  Value value = 0;  // written value, or target register for Read
};

struct OpCompletion {
  int op_id = -1;
  std::vector<Value> result;  // empty for writes
};

/// Everything a single replica transition produced. Broadcasts target all
/// processes including the emitter, but the emitter consumes its own copy
/// synchronously before the transition returns; the driver must route each
/// broadcast to the remaining processes and account for the self-delivery.
/// The same contract applies to point-to-point sends addressed to self.
template <typename Msg>
struct StepResult {
  std::vector<Msg> broadcasts;
  std::vector<std::pair<ProcessId, Msg>> sends;
  std::vector<OpCompletion> completions;
};

}  // namespace scmem
