#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "scmem/metrics.hpp"
#include "scmem/netsim.hpp"
#include "scmem/types.hpp"

namespace scmem {

/// Post-run verification of the protocol's run-wide invariants, over the
/// recorded trace of a quiescent snapshot-memory run.
struct RunChecks {
  bool comparable = true;       // all sampled stamp vectors form a chain
  bool inclusion = true;        // validated-update sets are inclusion-ordered
  bool unique_broadcasts = true;
  bool all_forwarded = true;    // every correct process relayed each correct proposal
  bool all_validated = true;    // ... and eventually incorporated it
  bool budget_ok = true;        // deliveries per update never exceed n^2
  int max_per_update = 0;
  std::string detail;

  bool ok() const {
    return comparable && inclusion && unique_broadcasts && all_forwarded && all_validated &&
           budget_ok;
  }
};

inline RunChecks verify_snapshot_run(const RunResult& run) {
  RunChecks checks;
  const Trace& t = run.trace;
  const int n = t.n;

  // Sorting by total stamp count turns pairwise comparability into a chain
  // condition on neighbours: if any pair were incomparable, some adjacent
  // pair would be too.
  std::vector<std::vector<Stamp>> samples;
  samples.emplace_back(n, 0);
  for (const auto& e : t.events)
    if (!e.digest.empty()) samples.push_back(e.digest);
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    auto sa = std::accumulate(a.begin(), a.end(), Stamp{0});
    auto sb = std::accumulate(b.begin(), b.end(), Stamp{0});
    return sa != sb ? sa < sb : a < b;
  });
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  auto le = [n](const std::vector<Stamp>& a, const std::vector<Stamp>& b) {
    for (int k = 0; k < n; ++k)
      if (a[k] > b[k]) return false;
    return true;
  };
  for (std::size_t i = 0; i + 1 < samples.size(); ++i)
    if (!le(samples[i], samples[i + 1])) {
      checks.comparable = false;
      checks.detail = "incomparable stamp vectors sampled";
      break;
    }

  // Same property phrased over the sets of validated updates.
  if (checks.comparable) {
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      std::set<std::pair<int, Stamp>> a, b;
      for (int k = 0; k < n; ++k) {
        for (Stamp s = 1; s <= samples[i][k]; ++s) a.insert({k, s});
        for (Stamp s = 1; s <= samples[i + 1][k]; ++s) b.insert({k, s});
      }
      if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) {
        checks.inclusion = false;
        checks.detail = "validated-update sets are not inclusion-ordered";
        break;
      }
    }
  }

  // Each process relays a given update at most once, so any receiver sees at
  // most one copy per (sender, update) pair.
  std::map<std::pair<ProcessId, UpdateId>, std::set<ProcessId>> seen;
  for (const auto& e : t.events) {
    if (e.kind != EventKind::Deliver) continue;
    auto& receivers = seen[{e.sender, {e.msg.writer, e.msg.writer_stamp}}];
    if (!receivers.insert(e.receiver).second) {
      checks.unique_broadcasts = false;
      checks.detail = "duplicate delivery of one broadcast copy";
    }
  }

  // At quiescence every update proposed by a correct process must have been
  // relayed by and incorporated at every correct process.
  std::vector<std::vector<Stamp>> final_digest(n, std::vector<Stamp>(n, 0));
  for (const auto& e : t.events) {
    ProcessId actor = (e.kind == EventKind::Deliver) ? e.receiver : e.sender;
    if (actor >= 0 && !e.digest.empty()) final_digest[actor] = e.digest;
  }
  for (const auto& e : t.events) {
    if (e.kind != EventKind::Propose) continue;
    if (run.crashed.size() > static_cast<std::size_t>(e.sender) && run.crashed[e.sender]) continue;
    UpdateId u{e.msg.writer, e.msg.writer_stamp};
    for (ProcessId j = 0; j < n; ++j) {
      if (run.crashed.size() > static_cast<std::size_t>(j) && run.crashed[j]) continue;
      if (final_digest[j][u.writer] < u.stamp) {
        checks.all_validated = false;
        checks.detail = "update " + to_string(u) + " missing at process " + std::to_string(j);
      }
      if (!seen[{j, u}].count(j)) {
        checks.all_forwarded = false;
        checks.detail = "process " + std::to_string(j) + " never relayed " + to_string(u);
      }
    }
  }

  for (const auto& [u, count] : per_update_deliveries(t)) {
    checks.max_per_update = std::max(checks.max_per_update, count);
    if (count > n * n) {
      checks.budget_ok = false;
      checks.detail = "update " + to_string(u) + " used " + std::to_string(count) + " messages";
    }
  }
  return checks;
}

}  // namespace scmem
