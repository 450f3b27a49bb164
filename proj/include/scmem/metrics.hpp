#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scmem/history.hpp"
#include "scmem/netsim.hpp"
#include "scmem/types.hpp"

namespace scmem {

/// Delivered protocol messages grouped by the update they carry. Applies to
/// both protocols; the grouping key is (writer, writer_stamp) for the
/// snapshot memory and (origin, op_seq) for the register baseline.
inline std::map<UpdateId, int> per_update_deliveries(const Trace& t) {
  std::map<UpdateId, int> counts;
  for (const auto& e : t.events)
    if (e.kind == EventKind::Deliver) ++counts[{e.msg.writer, e.msg.writer_stamp}];
  return counts;
}

inline int total_deliveries(const Trace& t) {
  int total = 0;
  for (const auto& e : t.events)
    if (e.kind == EventKind::Deliver) ++total;
  return total;
}

/// The stamp of the first own-update proposal a process sent at or after the
/// given trace position; this is the message that carries (a descendant of)
/// a write invoked there.
inline std::optional<Stamp> first_proposal_at_or_after(const Trace& t, ProcessId process,
                                                       std::int64_t index) {
  for (std::size_t i = index < 0 ? 0 : static_cast<std::size_t>(index); i < t.events.size(); ++i) {
    const auto& e = t.events[i];
    if (e.kind == EventKind::Propose && e.sender == process) return e.msg.writer_stamp;
  }
  return std::nullopt;
}

/// Longest chain of causally related message deliveries between an
/// operation's invocation and response, as annotated by the simulator.
inline int causal_depth(const Trace& t, int op_id) {
  auto it = t.op_depth.find(op_id);
  if (it == t.op_depth.end())
    throw ConfigError("operation " + std::to_string(op_id) + " did not complete in this trace");
  return it->second;
}

/// Messages attributed per operation for the snapshot protocol: a write owns
/// the traffic of the update that carried its value (a write overwritten
/// before proposal generated none), snapshots own nothing.
inline std::map<int, int> snapshot_op_messages(const Trace& t, const History& h) {
  auto per_update = per_update_deliveries(t);
  std::map<UpdateId, int> carrier;  // update -> op that actually travelled
  std::map<int, int> result;
  for (const auto& op : h.ops) {
    result[op.op_id] = 0;
    if (op.kind != OpKind::Write) continue;
    auto stamp = first_proposal_at_or_after(t, op.process, op.invoke_index);
    if (!stamp) continue;
    UpdateId tag{op.process, *stamp};
    auto it = carrier.find(tag);
    if (it == carrier.end() || h.find(it->second)->invoke_index < op.invoke_index)
      carrier[tag] = op.op_id;
  }
  for (const auto& [tag, op_id] : carrier) {
    auto it = per_update.find(tag);
    result[op_id] = it == per_update.end() ? 0 : it->second;
  }
  return result;
}

inline std::vector<const OperationRecord*> ordered_by_invoke(const History& h) {
  std::vector<const OperationRecord*> ops;
  for (const auto& op : h.ops) ops.push_back(&op);
  std::sort(ops.begin(), ops.end(), [](const OperationRecord* a, const OperationRecord* b) {
    return a->invoke_index < b->invoke_index;
  });
  return ops;
}

/// Messages attributed per operation for the register baseline: the k-th
/// operation a process invokes uses its sequence number k+1 as the tag.
inline std::map<int, int> abd_op_messages(const Trace& t, const History& h) {
  auto per_update = per_update_deliveries(t);
  std::map<int, int> result;
  std::map<ProcessId, Stamp> ordinal;
  for (const auto* op : ordered_by_invoke(h)) {
    UpdateId tag{op->process, ++ordinal[op->process]};
    auto it = per_update.find(tag);
    result[op->op_id] = it == per_update.end() ? 0 : it->second;
  }
  return result;
}

}  // namespace scmem
