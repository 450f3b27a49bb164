#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "scmem/history.hpp"
#include "scmem/spec.hpp"
#include "scmem/types.hpp"

namespace scmem {

enum class Verdict { Sat, Unsat, TooLarge };

struct Witness {
  std::vector<int> order;  // op ids in serialization order
  std::map<int, std::vector<Stamp>> clocks;
};

struct Certificate {
  std::uint64_t states_explored = 0;
  std::vector<int> deepest_prefix;  // longest serializable prefix reached
  std::string note;
};

struct CheckResult {
  Verdict verdict = Verdict::Unsat;
  Witness witness;
  Certificate certificate;
};

struct CheckOptions {
  std::size_t max_ops = 14;  // exhaustive search bound
};

namespace detail {

/// Exhaustive memoized search for a legal linear extension of the process
/// order. States that proved fruitless are remembered by (consumed counts,
/// abstract object state), which collapses interleavings that can no longer
/// be told apart by the specification.
class ExtensionSearch {
public:
  ExtensionSearch(std::vector<std::vector<const OperationRecord*>> per_process,
                  const SpecSet& specs, bool realtime)
      : per_process_(std::move(per_process)), specs_(specs), realtime_(realtime) {}

  bool run() {
    counts_.assign(per_process_.size(), 0);
    total_ = 0;
    for (const auto& list : per_process_) total_ += list.size();
    SpecState state(specs_);
    return dfs(state);
  }

  std::uint64_t explored() const { return explored_; }
  const std::vector<int>& chosen() const { return chosen_; }
  const std::vector<int>& deepest() const { return deepest_; }

private:
  bool dfs(const SpecState& state) {
    if (chosen_.size() == total_) return true;
    std::string key = memo_key(state);
    if (failed_.count(key)) return false;
    ++explored_;

    // Real-time rule: an operation may only be linearized next if no other
    // pending operation finished before it began.
    std::int64_t horizon = std::numeric_limits<std::int64_t>::max();
    if (realtime_) {
      for (std::size_t p = 0; p < per_process_.size(); ++p)
        if (counts_[p] < per_process_[p].size()) {
          const auto* op = per_process_[p][counts_[p]];
          if (op->responded()) horizon = std::min(horizon, op->respond_index);
        }
    }

    for (std::size_t p = 0; p < per_process_.size(); ++p) {
      if (counts_[p] == per_process_[p].size()) continue;
      const OperationRecord* op = per_process_[p][counts_[p]];
      if (realtime_ && op->invoke_index > horizon) continue;
      SpecState next = state;
      if (!next.step(*op)) continue;
      ++counts_[p];
      chosen_.push_back(op->op_id);
      if (chosen_.size() > deepest_.size()) deepest_ = chosen_;
      if (dfs(next)) return true;
      chosen_.pop_back();
      --counts_[p];
    }
    failed_.insert(std::move(key));
    return false;
  }

  std::string memo_key(const SpecState& state) const {
    std::string k;
    for (std::size_t c : counts_) {
      k += std::to_string(c);
      k += '.';
    }
    k += '|';
    k += state.key();
    return k;
  }

  std::vector<std::vector<const OperationRecord*>> per_process_;
  const SpecSet& specs_;
  bool realtime_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
  std::vector<int> chosen_;
  std::vector<int> deepest_;
  std::unordered_set<std::string> failed_;
  std::uint64_t explored_ = 0;
};

inline CheckResult check_extension(const History& h, const SpecSet& specs, bool realtime,
                                   const CheckOptions& opt) {
  // A process that crashes mid-operation may or may not have taken effect:
  // unacknowledged writes are tried both included and excluded, while
  // unacknowledged snapshots and reads returned nothing and are dropped.
  std::vector<const OperationRecord*> definite, optional_writes;
  for (const auto& op : h.ops) {
    if (op.responded())
      definite.push_back(&op);
    else if (op.kind == OpKind::Write)
      optional_writes.push_back(&op);
  }

  if (definite.size() + optional_writes.size() > opt.max_ops)
    return {Verdict::TooLarge,
            {},
            {0, {}, "history has more than " + std::to_string(opt.max_ops) +
                        " operations; use the witness checker"}};

  CheckResult result;
  result.verdict = Verdict::Unsat;
  std::uint64_t explored = 0;
  const std::size_t masks = std::size_t{1} << optional_writes.size();
  for (std::size_t mask = 0; mask < masks; ++mask) {
    std::map<ProcessId, std::vector<const OperationRecord*>> grouped;
    for (const auto* op : definite) grouped[op->process].push_back(op);
    for (std::size_t i = 0; i < optional_writes.size(); ++i)
      if (mask & (std::size_t{1} << i)) grouped[optional_writes[i]->process].push_back(optional_writes[i]);
    std::vector<std::vector<const OperationRecord*>> per_process;
    for (auto& [p, list] : grouped) {
      std::sort(list.begin(), list.end(), [](const OperationRecord* a, const OperationRecord* b) {
        return a->invoke_index < b->invoke_index;
      });
      per_process.push_back(std::move(list));
    }
    ExtensionSearch search(std::move(per_process), specs, realtime);
    bool sat = search.run();
    explored += search.explored();
    if (sat) {
      result.verdict = Verdict::Sat;
      result.witness.order = search.chosen();
      result.certificate.states_explored = explored;
      return result;
    }
    if (search.deepest().size() > result.certificate.deepest_prefix.size())
      result.certificate.deepest_prefix = search.deepest();
  }
  result.certificate.states_explored = explored;
  if (!optional_writes.empty())
    result.certificate.note =
        "tried " + std::to_string(masks) + " resolutions of unacknowledged writes";
  return result;
}

}  // namespace detail

/// Decides sequential consistency of a finite history by exhaustive search
/// over linear extensions of the process order.
inline CheckResult check_sc(const History& h, const SpecSet& specs, const CheckOptions& opt = {}) {
  return detail::check_extension(h, specs, false, opt);
}

/// Same search, additionally constrained by real-time precedence between
/// non-overlapping operations.
inline CheckResult check_linearizable(const History& h, const SpecSet& specs,
                                      const CheckOptions& opt = {}) {
  return detail::check_extension(h, specs, true, opt);
}

/// Union of histories over disjoint objects, keeping every process's own
/// order. Invocation indexes must come from a common position space.
inline History compose_histories(const std::vector<History>& parts) {
  History out;
  std::set<int> objects;
  std::set<int> op_ids;
  for (const auto& part : parts) {
    out.num_processes = std::max(out.num_processes, part.num_processes);
    std::set<int> part_objects;
    for (const auto& op : part.ops) part_objects.insert(op.object);
    for (int obj : part_objects)
      if (!objects.insert(obj).second)
        throw ConfigError("composed histories must use disjoint objects (object " +
                          std::to_string(obj) + " repeats)");
    for (const auto& op : part.ops) {
      if (!op_ids.insert(op.op_id).second)
        throw ConfigError("op id " + std::to_string(op.op_id) + " appears twice");
      out.ops.push_back(op);
    }
  }
  std::map<ProcessId, std::set<std::int64_t>> seen;
  for (const auto& op : out.ops)
    if (!seen[op.process].insert(op.invoke_index).second)
      throw ConfigError("conflicting process order: two ops of process " +
                        std::to_string(op.process) + " share invocation position " +
                        std::to_string(op.invoke_index));
  return out;
}

enum class RoundVerdict { Sat, PreconditionFail, Unsat };

struct RoundResult {
  RoundVerdict verdict = RoundVerdict::Unsat;
  Witness composed;
  std::string detail;
};

/// Composes per-round histories (one fresh object per round) by
/// concatenating their witnesses in round order. Requires the round-based
/// usage pattern: no process performs an operation of a later round before
/// one of an earlier round.
inline RoundResult check_round_composition(const std::vector<History>& rounds,
                                           const std::vector<Witness>& witnesses) {
  if (rounds.size() != witnesses.size())
    throw ConfigError("need one witness per round history");

  SpecSet composed_specs;
  std::vector<SpecSet> round_specs(rounds.size());
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    std::set<int> objects;
    for (const auto& op : rounds[r].ops) objects.insert(op.object);
    if (objects.size() > 1)
      return {RoundVerdict::Unsat, {}, "round " + std::to_string(r) + " uses several objects"};
    int obj = objects.empty() ? static_cast<int>(r) : *objects.begin();
    if (composed_specs.count(obj))
      return {RoundVerdict::Unsat, {}, "rounds share object " + std::to_string(obj)};
    ObjectSpec spec{SpecKind::SnapshotMemory, std::max(rounds[r].num_processes, 1)};
    composed_specs[obj] = spec;
    round_specs[r][obj] = spec;
  }

  // Round-order precondition over the process order.
  std::map<ProcessId, std::vector<std::pair<std::int64_t, std::pair<std::size_t, int>>>> per_proc;
  for (std::size_t r = 0; r < rounds.size(); ++r)
    for (const auto& op : rounds[r].ops)
      per_proc[op.process].push_back({op.invoke_index, {r, op.op_id}});
  for (auto& [p, list] : per_proc) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i].second.first < list[i - 1].second.first)
        return {RoundVerdict::PreconditionFail,
                {},
                "process " + std::to_string(p) + " ran op " + std::to_string(list[i].second.second) +
                    " (round " + std::to_string(list[i].second.first) + ") after op " +
                    std::to_string(list[i - 1].second.second) + " (round " +
                    std::to_string(list[i - 1].second.first) + ")"};
  }

  // Each per-round witness must itself be sound.
  Witness composed;
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    std::vector<const OperationRecord*> order;
    for (int id : witnesses[r].order) {
      const OperationRecord* op = rounds[r].find(id);
      if (!op)
        return {RoundVerdict::Unsat, {}, "witness for round " + std::to_string(r) +
                                             " names unknown op " + std::to_string(id)};
      order.push_back(op);
    }
    if (std::string err = verify_order(order, round_specs[r]); !err.empty())
      return {RoundVerdict::Unsat, {}, "round " + std::to_string(r) + ": " + err};
    for (int id : witnesses[r].order) composed.order.push_back(id);
  }

  // Replaying the concatenation against the composition re-checks the whole
  // construction end to end.
  History all = compose_histories(rounds);
  std::vector<const OperationRecord*> order;
  for (int id : composed.order) order.push_back(all.find(id));
  if (std::string err = verify_order(order, composed_specs); !err.empty())
    return {RoundVerdict::Unsat, {}, "composed order: " + err};
  return {RoundVerdict::Sat, std::move(composed), {}};
}

}  // namespace scmem
