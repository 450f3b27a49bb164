#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scmem/types.hpp"

namespace scmem {

/// One invocation/response pair as seen by the checkers. `respond_index`
/// is -1 when the process crashed before the operation returned.
struct OperationRecord {
  int op_id = -1;
  ProcessId process = -1;
  int object = 0;
  OpKind kind = OpKind::Write;
  Value arg = 0;  // written value, or target register for reads
  std::optional<std::vector<Value>> result;
  std::int64_t invoke_index = -1;
  std::int64_t respond_index = -1;

  bool responded() const { return respond_index >= 0; }
};

struct History {
  int num_processes = 0;
  std::vector<OperationRecord> ops;

  const OperationRecord* find(int op_id) const {
    for (const auto& op : ops)
      if (op.op_id == op_id) return &op;
    return nullptr;
  }

  /// Per-process operation lists ordered by invocation. Processes are
  /// sequential, so this order is total within a process.
  std::map<ProcessId, std::vector<const OperationRecord*>> by_process() const {
    std::map<ProcessId, std::vector<const OperationRecord*>> m;
    for (const auto& op : ops) m[op.process].push_back(&op);
    for (auto& [p, list] : m)
      std::sort(list.begin(), list.end(), [](const OperationRecord* a, const OperationRecord* b) {
        return a->invoke_index < b->invoke_index;
      });
    return m;
  }
};

inline char kind_code(OpKind k) {
  switch (k) {
    case OpKind::Write: return 'W';
    case OpKind::Snapshot: return 'S';
    case OpKind::Read: return 'R';
  }
  return '?';
}

inline OpKind kind_from_code(char c) {
  switch (c) {
    case 'W': return OpKind::Write;
    case 'S': return OpKind::Snapshot;
    case 'R': return OpKind::Read;
  }
  throw ConfigError(std::string("unknown operation code '") + c + "'");
}

// History files are line-delimited:
//   # comments and blank lines are skipped
//   procs <n>
//   op <id> <process> <object> <W|S|R> <arg> <result|-> <invoke> <respond|->
// where <result> is a comma-separated value list.

inline std::string serialize_history(const History& h) {
  std::ostringstream out;
  out << "procs " << h.num_processes << "\n";
  for (const auto& op : h.ops) {
    out << "op " << op.op_id << ' ' << op.process << ' ' << op.object << ' ' << kind_code(op.kind)
        << ' ' << op.arg << ' ';
    if (op.result) {
      if (op.result->empty()) out << "ok";
      for (std::size_t i = 0; i < op.result->size(); ++i)
        out << (i ? "," : "") << (*op.result)[i];
    } else {
      out << '-';
    }
    out << ' ' << op.invoke_index << ' ';
    if (op.responded())
      out << op.respond_index;
    else
      out << '-';
    out << "\n";
  }
  return out.str();
}

inline History parse_history(const std::string& text) {
  History h;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "procs") {
      ls >> h.num_processes;
    } else if (tag == "op") {
      OperationRecord op;
      std::string kind, result, respond;
      ls >> op.op_id >> op.process >> op.object >> kind >> op.arg >> result >> op.invoke_index >>
          respond;
      if (!ls || kind.size() != 1)
        throw ConfigError("history line " + std::to_string(line_no) + ": malformed record");
      op.kind = kind_from_code(kind[0]);
      if (result != "-") {
        std::vector<Value> vs;
        if (result != "ok") {
          std::istringstream rs(result);
          std::string item;
          while (std::getline(rs, item, ',')) vs.push_back(std::stoll(item));
        }
        op.result = std::move(vs);
      }
      op.respond_index = (respond == "-") ? -1 : std::stoll(respond);
      h.ops.push_back(std::move(op));
    } else {
      throw ConfigError("history line " + std::to_string(line_no) + ": unknown tag '" + tag + "'");
    }
  }
  for (const auto& op : h.ops)
    if (op.process < 0 || (h.num_processes > 0 && op.process >= h.num_processes))
      throw ConfigError("history op " + std::to_string(op.op_id) + ": process out of range");
  return h;
}

}  // namespace scmem
