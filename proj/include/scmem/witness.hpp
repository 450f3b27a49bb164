#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scmem/checker.hpp"
#include "scmem/history.hpp"
#include "scmem/metrics.hpp"
#include "scmem/netsim.hpp"
#include "scmem/spec.hpp"
#include "scmem/types.hpp"

namespace scmem {

enum class WitnessVerdict { Sat, Violation, ClockViolation };

struct WitnessResult {
  WitnessVerdict verdict = WitnessVerdict::Violation;
  Witness witness;
  std::string detail;
};

namespace detail {

inline bool pointwise_le(const std::vector<Stamp>& a, const std::vector<Stamp>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

inline std::string stamp_vec_str(const std::vector<Stamp>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

}  // namespace detail

/// Constructive sequential-consistency check that scales to long histories.
/// Every operation gets a clock drawn from the stamp vectors sampled in the
/// trace: a snapshot uses the vector at its response, an update the smallest
/// sampled vector that already covers its proposal. Ordering operations by
/// clock (updates before snapshots on ties, then by op id) must yield a
/// serialization that replays cleanly; the sampled vectors themselves must
/// form a chain, or the run already broke the protocol's core property.
inline WitnessResult check_sc_witness(const History& h, const Trace& trace) {
  const int n = trace.n;
  if (n <= 0) return {WitnessVerdict::Violation, {}, "trace carries no process count"};

  // Collect and order the sampled stamp vectors.
  std::vector<std::vector<Stamp>> samples;
  samples.emplace_back(n, 0);
  for (const auto& e : trace.events)
    if (!e.digest.empty()) samples.push_back(e.digest);
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    auto sa = std::accumulate(a.begin(), a.end(), Stamp{0});
    auto sb = std::accumulate(b.begin(), b.end(), Stamp{0});
    return sa != sb ? sa < sb : a < b;
  });
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!detail::pointwise_le(samples[i - 1], samples[i]))
      return {WitnessVerdict::ClockViolation, {},
              "sampled stamp vectors are incomparable: " + detail::stamp_vec_str(samples[i - 1]) +
                  " vs " + detail::stamp_vec_str(samples[i])};

  struct Placed {
    const OperationRecord* op;
    std::optional<std::vector<Stamp>> clock;  // nullopt orders after everything
  };
  std::vector<Placed> placed;
  int object = 0;
  for (const auto& op : h.ops) {
    object = op.object;
    if (op.kind == OpKind::Read)
      return {WitnessVerdict::Violation, {}, "snapshot-memory histories cannot contain reads"};
    if (op.kind == OpKind::Snapshot) {
      if (!op.responded()) continue;  // returned nothing observable
      if (op.respond_index >= static_cast<std::int64_t>(trace.events.size()))
        return {WitnessVerdict::Violation, {}, "respond index out of trace bounds"};
      placed.push_back({&op, trace.events[op.respond_index].digest});
      continue;
    }
    auto stamp = first_proposal_at_or_after(trace, op.process, op.invoke_index);
    std::optional<std::vector<Stamp>> clock;
    if (stamp) {
      for (const auto& s : samples)
        if (s[op.process] >= *stamp) {
          clock = s;
          break;
        }
    }
    if (!op.responded() && !clock) continue;  // never acknowledged, never seen
    placed.push_back({&op, std::move(clock)});
  }

  std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) {
    if (a.clock.has_value() != b.clock.has_value()) return a.clock.has_value();
    if (a.clock && *a.clock != *b.clock) return *a.clock < *b.clock;  // chain: lex == pointwise
    if (a.op->kind != b.op->kind) return a.op->kind == OpKind::Write;
    return a.op->op_id < b.op->op_id;
  });

  std::vector<const OperationRecord*> order;
  Witness witness;
  for (const auto& p : placed) {
    order.push_back(p.op);
    witness.order.push_back(p.op->op_id);
    if (p.clock) witness.clocks[p.op->op_id] = *p.clock;
  }
  if (std::string err = verify_order(order, snapshot_memory_spec(n, object)); !err.empty())
    return {WitnessVerdict::Violation, std::move(witness), err};
  return {WitnessVerdict::Sat, std::move(witness), {}};
}

}  // namespace scmem
