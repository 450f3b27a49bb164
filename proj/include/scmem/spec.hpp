#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scmem/history.hpp"
#include "scmem/types.hpp"

namespace scmem {

enum class SpecKind {
  SnapshotMemory,  // n single-writer cells; snapshot returns the whole array
  Register,        // one cell; read returns it
};

struct ObjectSpec {
  SpecKind kind = SpecKind::Register;
  int cells = 1;
};

using SpecSet = std::map<int, ObjectSpec>;

inline SpecSet snapshot_memory_spec(int n, int object = 0) {
  return {{object, {SpecKind::SnapshotMemory, n}}};
}

/// One register object per object id found in the history.
inline SpecSet registers_for(const History& h) {
  SpecSet s;
  for (const auto& op : h.ops) s[op.object] = {SpecKind::Register, 1};
  return s;
}

/// Abstract state of a composition of objects, replayed operation by
/// operation. Writes always apply; snapshots and reads are legal only if
/// their recorded result matches the current state.
class SpecState {
public:
  explicit SpecState(const SpecSet& specs) {
    for (const auto& [id, spec] : specs) regs_[id].assign(spec.cells, 0);
  }

  bool step(const OperationRecord& op) {
    auto it = regs_.find(op.object);
    if (it == regs_.end()) return false;
    std::vector<Value>& cells = it->second;
    switch (op.kind) {
      case OpKind::Write: {
        int idx = cells.size() > 1 ? op.process : 0;
        if (idx < 0 || idx >= static_cast<int>(cells.size())) return false;
        cells[idx] = op.arg;
        return true;
      }
      case OpKind::Snapshot:
        return op.result && *op.result == cells;
      case OpKind::Read:
        return op.result && op.result->size() == 1 && (*op.result)[0] == cells[0];
    }
    return false;
  }

  std::string key() const {
    std::string k;
    for (const auto& [id, cells] : regs_) {
      k += std::to_string(id);
      k += ':';
      for (Value v : cells) {
        k += std::to_string(v);
        k += ',';
      }
      k += ';';
    }
    return k;
  }

private:
  std::map<int, std::vector<Value>> regs_;
};

/// Checks that a serialization order covers exactly the given operations,
/// contains the process order, and replays legally. Returns an explanation
/// for the first problem found, or an empty string.
inline std::string verify_order(const std::vector<const OperationRecord*>& order,
                                const SpecSet& specs) {
  std::map<ProcessId, std::int64_t> last_invoke;
  SpecState state(specs);
  for (const OperationRecord* op : order) {
    auto it = last_invoke.find(op->process);
    if (it != last_invoke.end() && op->invoke_index < it->second)
      return "order breaks process order at op " + std::to_string(op->op_id);
    last_invoke[op->process] = op->invoke_index;
    if (!state.step(*op)) return "replay diverges at op " + std::to_string(op->op_id);
  }
  return {};
}

}  // namespace scmem
