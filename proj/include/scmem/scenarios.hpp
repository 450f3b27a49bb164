#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scmem/checker.hpp"
#include "scmem/history.hpp"
#include "scmem/netsim.hpp"
#include "scmem/types.hpp"

namespace scmem {

/// The classic two-process, two-register demonstration that per-object
/// serializability does not survive composition: each process writes one
/// register and then reads the other as still fresh.
struct CrossedRegisters {
  History x;  // object 0, written by process 1
  History y;  // object 1, written by process 0
  History composed;
};

inline CrossedRegisters crossed_register_histories() {
  auto rec = [](int id, ProcessId p, int obj, OpKind k, Value arg, std::vector<Value> res,
                std::int64_t inv, std::int64_t rsp) {
    OperationRecord op;
    op.op_id = id;
    op.process = p;
    op.object = obj;
    op.kind = k;
    op.arg = arg;
    op.result = std::move(res);
    op.invoke_index = inv;
    op.respond_index = rsp;
    return op;
  };
  CrossedRegisters h;
  h.x.num_processes = h.y.num_processes = 2;
  // process 1: write X, then read Y -> 0;  process 0: write Y, then read X -> 0
  h.x.ops.push_back(rec(0, 1, 0, OpKind::Write, 1, {}, 0, 1));
  h.y.ops.push_back(rec(1, 1, 1, OpKind::Read, 0, {0}, 2, 3));
  h.y.ops.push_back(rec(2, 0, 1, OpKind::Write, 1, {}, 4, 5));
  h.x.ops.push_back(rec(3, 0, 0, OpKind::Read, 0, {0}, 6, 7));
  h.composed.num_processes = 2;
  for (const auto& op : h.x.ops) h.composed.ops.push_back(op);
  for (const auto& op : h.y.ops) h.composed.ops.push_back(op);
  return h;
}

/// Five processes, two concurrent writers, channel delays arranged so that
/// process 2 gathers a majority for the second writer's update long before
/// it hears anything about the first. Its view must incorporate them in
/// that order.
inline SimConfig two_writer_scenario() {
  SimConfig cfg;
  cfg.n = 5;
  cfg.seed = 0;
  cfg.delay_min = cfg.delay_max = 100;
  cfg.channel_delay[{0, 1}] = 5;
  cfg.channel_delay[{0, 2}] = 10;
  cfg.channel_delay[{1, 2}] = 10;
  cfg.channel_delay[{4, 3}] = 5;
  cfg.ops = {
      {0, 4, OpKind::Write, 7},      // update a
      {0, 0, OpKind::Write, 3},      // update b, validated first at process 2
      {20, 2, OpKind::Snapshot, 0},  // sees b but not a
      {500, 2, OpKind::Snapshot, 0},
  };
  return cfg;
}

/// Two writers alternating faster than validation can keep up. Without the
/// deferred-write buffer their updates would chain dependencies forever;
/// with it, intermediate writes get overwritten and the run settles.
inline SimConfig alternating_writers_scenario() {
  SimConfig cfg;
  cfg.n = 4;
  cfg.seed = 0;
  cfg.delay_min = cfg.delay_max = 20;
  for (int i = 0; i < 4; ++i) {
    cfg.ops.push_back({2 * i, 3, OpKind::Write, 11 + 2 * i});
    cfg.ops.push_back({2 * i + 1, 0, OpKind::Write, 21 + 2 * i});
  }
  cfg.ops.push_back({400, 1, OpKind::Snapshot, 0});
  return cfg;
}

/// Worst case for a snapshot: invoked right behind two writes of the same
/// process, so it must wait for the first update to validate, the deferred
/// one to be proposed, and that one to validate too.
inline SimConfig back_to_back_scenario(int n = 3) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = 0;
  cfg.delay_min = cfg.delay_max = 5;
  cfg.ops = {
      {0, 0, OpKind::Write, 1},
      {0, 0, OpKind::Write, 2},
      {0, 0, OpKind::Snapshot, 0},
  };
  return cfg;
}

/// Snapshot long after the last write, then another right behind it: both
/// return without waiting.
inline SimConfig quiescent_snapshot_scenario(int n = 3) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = 0;
  cfg.delay_min = 1;
  cfg.delay_max = 10;
  cfg.ops = {
      {0, 0, OpKind::Write, 9},
      {1000, 0, OpKind::Snapshot, 0},
      {1001, 0, OpKind::Snapshot, 0},
  };
  return cfg;
}

struct CampaignParams {
  std::vector<int> n_values{3, 5, 7};
  int min_ops = 3;
  int max_ops = 14;
  int write_percent = 60;
  int crash_percent = 50;  // chance that each allowed fault slot is used
  VirtualTime horizon = 50;
  VirtualTime delay_min = 1;
  VirtualTime delay_max = 8;
  std::uint64_t seed_base = 1;
  bool with_cuts = true;
};

namespace detail {
inline std::uint64_t mix(std::uint64_t x) { return x * 0x9E3779B97F4A7C15ULL + 0xBF58476D1CE4E5B9ULL; }
}

/// Run `index` of a campaign: ops, crashes, and the simulator seed all
/// derive from seed_base + index, so any run can be replayed on its own.
inline SimConfig make_random_config(const CampaignParams& p, std::uint64_t index) {
  std::mt19937_64 gen(detail::mix(p.seed_base + index));
  SimConfig cfg;
  cfg.seed = p.seed_base + index;
  cfg.n = p.n_values[gen() % p.n_values.size()];
  cfg.delay_min = p.delay_min;
  cfg.delay_max = p.delay_max;
  int ops = p.min_ops + static_cast<int>(gen() % (p.max_ops - p.min_ops + 1));
  Value next_value = 1;
  for (int i = 0; i < ops; ++i) {
    ScheduledOp op;
    op.time = static_cast<VirtualTime>(gen() % p.horizon);
    op.process = static_cast<ProcessId>(gen() % cfg.n);
    bool write = static_cast<int>(gen() % 100) < p.write_percent;
    op.kind = write ? OpKind::Write : OpKind::Snapshot;
    op.value = write ? next_value++ : 0;
    cfg.ops.push_back(op);
  }
  int budget = (cfg.n - 1) / 2;
  std::vector<bool> used(cfg.n, false);
  for (int slot = 0; slot < budget; ++slot) {
    if (static_cast<int>(gen() % 100) >= p.crash_percent) continue;
    ProcessId victim = static_cast<ProcessId>(gen() % cfg.n);
    if (used[victim]) continue;
    used[victim] = true;
    ScheduledCrash cr;
    cr.time = static_cast<VirtualTime>(gen() % p.horizon);
    cr.process = victim;
    cr.cut = (p.with_cuts && gen() % 2 == 0) ? static_cast<int>(gen() % (cfg.n + 1)) : -1;
    cfg.crashes.push_back(cr);
  }
  cfg.max_crashes = static_cast<int>(cfg.crashes.size());
  return cfg;
}

/// Same generator shape for the register baseline: writes to the own
/// register mixed with reads of random registers.
inline SimConfig make_random_abd_config(const CampaignParams& p, std::uint64_t index) {
  std::mt19937_64 gen(detail::mix(detail::mix(p.seed_base + index)));
  SimConfig cfg;
  cfg.seed = p.seed_base + index;
  cfg.n = p.n_values[gen() % p.n_values.size()];
  cfg.delay_min = p.delay_min;
  cfg.delay_max = p.delay_max;
  int ops = p.min_ops + static_cast<int>(gen() % (p.max_ops - p.min_ops + 1));
  Value next_value = 1;
  for (int i = 0; i < ops; ++i) {
    ScheduledOp op;
    op.time = static_cast<VirtualTime>(gen() % p.horizon);
    op.process = static_cast<ProcessId>(gen() % cfg.n);
    bool write = static_cast<int>(gen() % 100) < p.write_percent;
    op.kind = write ? OpKind::Write : OpKind::Read;
    op.value = write ? next_value++ : static_cast<Value>(gen() % cfg.n);
    cfg.ops.push_back(op);
  }
  int budget = (cfg.n - 1) / 2;
  std::vector<bool> used(cfg.n, false);
  for (int slot = 0; slot < budget; ++slot) {
    if (static_cast<int>(gen() % 100) >= p.crash_percent) continue;
    ProcessId victim = static_cast<ProcessId>(gen() % cfg.n);
    if (used[victim]) continue;
    used[victim] = true;
    cfg.crashes.push_back({static_cast<VirtualTime>(gen() % p.horizon), victim, -1});
  }
  cfg.max_crashes = static_cast<int>(cfg.crashes.size());
  return cfg;
}

/// Deliberately breaks the round-usage precondition: the process runs its
/// second-round operation before its first-round one.
inline std::pair<std::vector<History>, std::vector<Witness>> round_order_violation_fixture() {
  std::vector<History> rounds(2);
  rounds[0].num_processes = 1;
  rounds[1].num_processes = 1;
  OperationRecord first;
  first.op_id = 0;
  first.process = 0;
  first.object = 0;
  first.kind = OpKind::Write;
  first.arg = 1;
  first.result = std::vector<Value>{};
  first.invoke_index = 10;
  first.respond_index = 11;
  OperationRecord second = first;
  second.op_id = 1;
  second.object = 1;
  second.arg = 2;
  second.invoke_index = 2;  // before its round-0 op
  second.respond_index = 3;
  rounds[0].ops.push_back(first);
  rounds[1].ops.push_back(second);
  std::vector<Witness> witnesses(2);
  witnesses[0].order = {0};
  witnesses[1].order = {1};
  return {rounds, witnesses};
}

}  // namespace scmem
