#pragma once

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scmem/abd.hpp"
#include "scmem/checker.hpp"
#include "scmem/history.hpp"
#include "scmem/metrics.hpp"
#include "scmem/monitors.hpp"
#include "scmem/netsim.hpp"
#include "scmem/scenarios.hpp"
#include "scmem/spec.hpp"
#include "scmem/witness.hpp"

namespace scmem {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitLiveness = 3;

struct RunSpec {
  SimConfig config;
  std::string protocol = "snapshot";  // snapshot | abd
  std::string check = "both";         // brute | witness | both | none
  std::string scenario;               // named fixture, overrides config.ops
  std::string out_prefix;             // write <prefix>.trace and <prefix>.history
};

// --- config documents: `key = value` lines plus op/crash entries ----------

inline SimConfig parse_config_text(const std::string& text, std::string* protocol = nullptr) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool faults_given = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    std::istringstream key_in(line.substr(0, eq));
    std::string key;
    key_in >> key;
    std::istringstream val(line.substr(eq + 1));
    if (key == "n") val >> cfg.n;
    else if (key == "faults") { val >> cfg.max_crashes; faults_given = true; }
    else if (key == "seed") val >> cfg.seed;
    else if (key == "delay_min") val >> cfg.delay_min;
    else if (key == "delay_max") val >> cfg.delay_max;
    else if (key == "event_cap") val >> cfg.event_cap;
    else if (key == "liveness") { std::string b; val >> b; cfg.assert_liveness = (b != "off" && b != "0" && b != "false"); }
    else if (key == "protocol") { std::string p; val >> p; if (protocol) *protocol = p; }
    else if (key == "op") {
      ScheduledOp op;
      std::string kind;
      val >> op.time >> op.process >> kind;
      if (kind == "write") { op.kind = OpKind::Write; val >> op.value; }
      else if (kind == "snapshot") op.kind = OpKind::Snapshot;
      else if (kind == "read") { op.kind = OpKind::Read; val >> op.value; }
      else throw ConfigError("config line " + std::to_string(line_no) + ": unknown op kind");
      if (!val && kind != "snapshot")
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed op");
      cfg.ops.push_back(op);
    } else if (key == "crash") {
      ScheduledCrash cr;
      val >> cr.time >> cr.process;
      if (!(val >> cr.cut)) cr.cut = -1;
      cfg.crashes.push_back(cr);
    } else if (key == "channel") {
      ProcessId from, to;
      VirtualTime d;
      val >> from >> to >> d;
      cfg.channel_delay[{from, to}] = d;
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!val && key != "crash")
      throw ConfigError("config line " + std::to_string(line_no) + ": malformed value");
  }
  if (!faults_given) cfg.max_crashes = static_cast<int>(cfg.crashes.size());
  return cfg;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

inline std::optional<SimConfig> named_scenario(const std::string& name) {
  if (name == "two-writers") return two_writer_scenario();
  if (name == "alternating-writers") return alternating_writers_scenario();
  if (name == "back-to-back") return back_to_back_scenario();
  if (name == "quiescent-snapshot") return quiescent_snapshot_scenario();
  return std::nullopt;
}

// --- checking a finished run ----------------------------------------------

struct RunVerdict {
  bool ok = true;
  std::string detail;
};

inline RunVerdict check_snapshot_run(const RunResult& run, const std::string& mode,
                                     std::ostream& out) {
  RunVerdict v;
  RunChecks checks = verify_snapshot_run(run);
  if (!checks.ok()) {
    v.ok = false;
    v.detail = checks.detail;
    out << "invariant check failed: " << checks.detail << "\n";
    return v;
  }
  auto specs = snapshot_memory_spec(run.trace.n);
  if (mode == "brute" || mode == "both") {
    CheckResult r = check_sc(run.history, specs);
    if (r.verdict == Verdict::Unsat) {
      out << "exhaustive check: history is not sequentially consistent\n";
      return {false, "exhaustive check found no legal serialization"};
    }
    if (r.verdict == Verdict::TooLarge && mode == "brute")
      out << "exhaustive check skipped: " << r.certificate.note << "\n";
    if (r.verdict == Verdict::Sat) out << "exhaustive check: consistent\n";
  }
  if (mode == "witness" || mode == "both") {
    WitnessResult r = check_sc_witness(run.history, run.trace);
    if (r.verdict != WitnessVerdict::Sat) {
      out << "witness check failed: " << r.detail << "\n";
      return {false, r.detail};
    }
    out << "witness check: consistent\n";
  }
  return v;
}

inline RunVerdict check_abd_run(const RunResult& run, const std::string& mode, std::ostream& out) {
  if (mode == "none") return {};
  CheckResult r = check_linearizable(run.history, registers_for(run.history));
  if (r.verdict == Verdict::Unsat) {
    out << "linearizability check failed\n";
    return {false, "register history is not linearizable"};
  }
  if (r.verdict == Verdict::TooLarge)
    out << "linearizability check skipped: " << r.certificate.note << "\n";
  else
    out << "linearizability check: consistent\n";
  return {};
}

// --- run command ------------------------------------------------------------

inline void print_run_metrics(const RunResult& run, bool abd, std::ostream& out) {
  auto per_op = abd ? abd_op_messages(run.trace, run.history)
                    : snapshot_op_messages(run.trace, run.history);
  out << "events " << run.trace.events.size() << ", protocol messages "
      << total_deliveries(run.trace) << "\n";
  out << std::left << std::setw(6) << "op" << std::setw(9) << "process" << std::setw(10) << "kind"
      << std::setw(10) << "messages" << "depth\n";
  for (const auto* op : ordered_by_invoke(run.history)) {
    out << std::left << std::setw(6) << op->op_id << std::setw(9) << op->process << std::setw(10);
    switch (op->kind) {
      case OpKind::Write: out << "write"; break;
      case OpKind::Snapshot: out << "snapshot"; break;
      case OpKind::Read: out << "read"; break;
    }
    out << std::setw(10) << per_op[op->op_id];
    if (op->responded())
      out << causal_depth(run.trace, op->op_id);
    else
      out << "-";
    out << "\n";
  }
}

inline int cmd_run(RunSpec spec, std::ostream& out) {
  if (!spec.scenario.empty()) {
    auto cfg = named_scenario(spec.scenario);
    if (!cfg) throw ConfigError("unknown scenario '" + spec.scenario + "'");
    auto seed = spec.config.seed;
    spec.config = *cfg;
    if (seed) spec.config.seed = seed;
  }
  bool abd = spec.protocol == "abd";
  if (!abd && spec.protocol != "snapshot")
    throw ConfigError("unknown protocol '" + spec.protocol + "'");

  RunResult run = abd ? run_abd_sim(spec.config) : run_snapshot_sim(spec.config);

  if (!spec.out_prefix.empty()) {
    write_file(spec.out_prefix + ".trace", serialize_trace(run.trace));
    write_file(spec.out_prefix + ".history", serialize_history(run.history));
    out << "wrote " << spec.out_prefix << ".trace and " << spec.out_prefix << ".history\n";
  }
  print_run_metrics(run, abd, out);

  if (!run.drained) {
    out << "liveness: event cap exceeded before quiescence\n";
    return kExitLiveness;
  }
  if (!run.liveness_ok && spec.config.assert_liveness) {
    out << "liveness: operations still pending at quiescence:";
    for (int id : run.stuck_ops) out << ' ' << id;
    out << "\n";
    return kExitLiveness;
  }
  if (spec.check != "none") {
    RunVerdict v = abd ? check_abd_run(run, spec.check, out)
                       : check_snapshot_run(run, spec.check, out);
    if (!v.ok) return kExitViolation;
  }
  return kExitOk;
}

// --- round-structured executions -------------------------------------------

struct RoundsParams {
  int n = 5;
  int rounds = 3;
  int ops_per_round = 5;
  int write_percent = 60;
  int crash_percent = 20;
  VirtualTime horizon = 40;
  VirtualTime delay_min = 1;
  VirtualTime delay_max = 8;
  std::uint64_t seed = 1;
};

struct RoundsOutcome {
  std::vector<History> histories;
  std::vector<Witness> witnesses;
  RoundResult composition;
  bool liveness_ok = true;
  std::string note;
};

/// Runs one fresh snapshot object per round over the same process set;
/// crashes persist across rounds. Each round is checked on its own and the
/// witnesses are composed in round order.
inline RoundsOutcome run_rounds(const RoundsParams& p) {
  constexpr std::int64_t kStride = 10'000'000;
  constexpr int kIdStride = 100'000;
  RoundsOutcome outcome;
  std::mt19937_64 gen(detail::mix(p.seed));
  std::vector<bool> crashed(p.n, false);
  int budget = (p.n - 1) / 2;

  for (int r = 0; r < p.rounds; ++r) {
    SimConfig cfg;
    cfg.n = p.n;
    cfg.seed = p.seed + 1000 * r;
    cfg.delay_min = p.delay_min;
    cfg.delay_max = p.delay_max;
    Value next_value = 1 + 100 * r;
    for (int i = 0; i < p.ops_per_round; ++i) {
      ProcessId proc = static_cast<ProcessId>(gen() % p.n);
      if (crashed[proc]) continue;
      bool write = static_cast<int>(gen() % 100) < p.write_percent;
      cfg.ops.push_back({static_cast<VirtualTime>(gen() % p.horizon), proc,
                         write ? OpKind::Write : OpKind::Snapshot,
                         write ? next_value++ : 0});
    }
    if (budget > 0 && static_cast<int>(gen() % 100) < p.crash_percent) {
      ProcessId victim = static_cast<ProcessId>(gen() % p.n);
      if (!crashed[victim]) {
        cfg.crashes.push_back({static_cast<VirtualTime>(gen() % p.horizon), victim,
                               gen() % 2 == 0 ? static_cast<int>(gen() % (p.n + 1)) : -1});
        --budget;
      }
    }
    cfg.max_crashes = static_cast<int>(cfg.crashes.size());
    cfg.assert_liveness = false;  // crashes accumulate across rounds; checked globally

    RunResult run = run_snapshot_sim(cfg);
    if (!run.drained) {
      outcome.liveness_ok = false;
      outcome.note = "round " + std::to_string(r) + " hit the event cap";
      return outcome;
    }
    for (ProcessId q = 0; q < p.n; ++q)
      if (run.crashed[q]) crashed[q] = true;

    Witness witness;
    if (run.history.ops.size() <= 14) {
      CheckResult c = check_sc(run.history, snapshot_memory_spec(p.n));
      if (c.verdict != Verdict::Sat) {
        outcome.note = "round " + std::to_string(r) + " history is not consistent";
        outcome.composition.verdict = RoundVerdict::Unsat;
        return outcome;
      }
      witness = c.witness;
    } else {
      WitnessResult w = check_sc_witness(run.history, run.trace);
      if (w.verdict != WitnessVerdict::Sat) {
        outcome.note = "round " + std::to_string(r) + ": " + w.detail;
        outcome.composition.verdict = RoundVerdict::Unsat;
        return outcome;
      }
      witness = w.witness;
    }

    // Relabel into the composed position space: object = round, ids and
    // indexes offset so later rounds follow earlier ones per process.
    History relabeled = run.history;
    for (auto& op : relabeled.ops) {
      op.object = r;
      op.op_id += r * kIdStride;
      op.invoke_index += r * kStride;
      if (op.respond_index >= 0) op.respond_index += r * kStride;
    }
    Witness shifted;
    for (int id : witness.order) shifted.order.push_back(id + r * kIdStride);
    outcome.histories.push_back(std::move(relabeled));
    outcome.witnesses.push_back(std::move(shifted));
  }

  outcome.composition = check_round_composition(outcome.histories, outcome.witnesses);
  return outcome;
}

// --- campaign command -------------------------------------------------------

struct CampaignSpec {
  CampaignParams params;
  int runs = 100;
  int rounds = 0;  // > 0: round-structured runs instead of flat ones
  std::string check = "both";
  std::string out_path;  // machine-readable summary
};

struct OpStats {
  int count = 0;
  int max_messages = 0;
  int max_depth = 0;
  long total_messages = 0;

  void add(int messages, int depth) {
    ++count;
    total_messages += messages;
    max_messages = std::max(max_messages, messages);
    max_depth = std::max(max_depth, depth);
  }
};

inline int cmd_campaign(const CampaignSpec& spec, std::ostream& out) {
  std::map<std::string, OpStats> stats;
  int passed = 0;

  if (spec.rounds > 0) {
    for (int i = 0; i < spec.runs; ++i) {
      RoundsParams rp;
      rp.rounds = spec.rounds;
      rp.seed = spec.params.seed_base + i;
      RoundsOutcome outcome = run_rounds(rp);
      if (!outcome.liveness_ok) {
        out << "round campaign: seed " << rp.seed << ": " << outcome.note << "\n";
        return kExitLiveness;
      }
      if (outcome.composition.verdict != RoundVerdict::Sat) {
        out << "round campaign: seed " << rp.seed << " failed: " << outcome.composition.detail
            << outcome.note << "\n";
        return kExitViolation;
      }
      ++passed;
    }
    out << "round composition: " << passed << "/" << spec.runs << " runs consistent\n";
    if (!spec.out_path.empty())
      write_file(spec.out_path, "rounds_passed=" + std::to_string(passed) + "/" +
                                    std::to_string(spec.runs) + "\n");
    return kExitOk;
  }

  for (int i = 0; i < spec.runs; ++i) {
    SimConfig cfg = make_random_config(spec.params, i);
    RunResult run = run_snapshot_sim(cfg);
    if (!run.drained || !run.liveness_ok) {
      out << "campaign: seed " << cfg.seed << " did not quiesce\n";
      return kExitLiveness;
    }
    std::ostringstream quiet;
    RunVerdict v = check_snapshot_run(run, spec.check, quiet);
    if (!v.ok) {
      out << "campaign: seed " << cfg.seed << " failed: " << v.detail << "\n";
      return kExitViolation;
    }
    ++passed;
    auto per_op = snapshot_op_messages(run.trace, run.history);
    for (const auto& op : run.history.ops) {
      if (!op.responded()) continue;
      auto& s = stats[op.kind == OpKind::Write ? "write" : "snapshot"];
      s.add(per_op[op.op_id], causal_depth(run.trace, op.op_id));
    }
  }

  // Baseline leg, uncontended mix, for the comparison rows.
  int abd_runs = std::max(10, spec.runs / 10);
  for (int i = 0; i < abd_runs; ++i) {
    CampaignParams ap = spec.params;
    ap.crash_percent = 0;
    SimConfig cfg = make_random_abd_config(ap, i);
    cfg.delay_min = 1;
    cfg.delay_max = 1;
    // spread ops out so each one runs alone
    VirtualTime at = 0;
    for (auto& op : cfg.ops) op.time = (at += 50);
    RunResult run = run_abd_sim(cfg);
    if (!run.drained || !run.liveness_ok) {
      out << "campaign: baseline seed " << cfg.seed << " did not quiesce\n";
      return kExitLiveness;
    }
    std::ostringstream quiet;
    RunVerdict v = check_abd_run(run, spec.check, quiet);
    if (!v.ok) {
      out << "campaign: baseline seed " << cfg.seed << " failed: " << v.detail << "\n";
      return kExitViolation;
    }
    auto per_op = abd_op_messages(run.trace, run.history);
    for (const auto& op : run.history.ops) {
      if (!op.responded()) continue;
      auto& s = stats[op.kind == OpKind::Write ? "abd write" : "abd read"];
      s.add(per_op[op.op_id], causal_depth(run.trace, op.op_id));
    }
  }

  out << "campaign: " << passed << "/" << spec.runs << " runs consistent\n";
  out << std::left << std::setw(12) << "operation" << std::right << std::setw(8) << "count"
      << std::setw(14) << "max msgs" << std::setw(12) << "max depth" << "\n";
  for (const auto& [kind, s] : stats)
    out << std::left << std::setw(12) << kind << std::right << std::setw(8) << s.count
        << std::setw(14) << s.max_messages << std::setw(12) << s.max_depth << "\n";

  if (!spec.out_path.empty()) {
    std::ostringstream m;
    m << "runs_passed=" << passed << "/" << spec.runs << "\n";
    for (const auto& [kind, s] : stats) {
      std::string key = kind;
      for (auto& c : key)
        if (c == ' ') c = '_';
      m << key << ".count=" << s.count << "\n";
      m << key << ".max_messages=" << s.max_messages << "\n";
      m << key << ".max_depth=" << s.max_depth << "\n";
    }
    write_file(spec.out_path, m.str());
  }
  return kExitOk;
}

// --- check command -----------------------------------------------------------

struct CheckSpec {
  std::string history_path;  // or a builtin name via `builtin`
  std::string builtin;       // crossed | crossed-x | crossed-y | round-violation
  std::string trace_path;    // enables witness mode
  std::string spec_name = "auto";  // snapshot | registers | auto
  std::string mode = "brute";      // brute | witness
};

inline int cmd_check(const CheckSpec& spec, std::ostream& out) {
  if (spec.builtin == "round-violation") {
    auto [rounds, witnesses] = round_order_violation_fixture();
    RoundResult r = check_round_composition(rounds, witnesses);
    if (r.verdict == RoundVerdict::PreconditionFail) {
      out << "round precondition violated: " << r.detail << "\n";
      return kExitViolation;
    }
    out << "unexpected verdict for the violation fixture\n";
    return kExitViolation;
  }

  History h;
  if (spec.builtin == "crossed")
    h = crossed_register_histories().composed;
  else if (spec.builtin == "crossed-x")
    h = crossed_register_histories().x;
  else if (spec.builtin == "crossed-y")
    h = crossed_register_histories().y;
  else if (!spec.builtin.empty())
    throw ConfigError("unknown builtin history '" + spec.builtin + "'");
  else
    h = parse_history(read_file(spec.history_path));

  if (spec.mode == "witness") {
    if (spec.trace_path.empty()) throw ConfigError("witness mode needs --trace");
    Trace t = parse_trace(read_file(spec.trace_path));
    WitnessResult r = check_sc_witness(h, t);
    if (r.verdict != WitnessVerdict::Sat) {
      out << "not consistent: " << r.detail << "\n";
      return kExitViolation;
    }
    out << "consistent; serialization:\n";
    for (int id : r.witness.order) out << id << "\n";
    return kExitOk;
  }

  SpecSet specs;
  bool has_read = false;
  for (const auto& op : h.ops) has_read |= op.kind == OpKind::Read;
  if (spec.spec_name == "registers" || (spec.spec_name == "auto" && has_read))
    specs = registers_for(h);
  else
    specs = snapshot_memory_spec(h.num_processes);

  CheckResult r = check_sc(h, specs);
  if (r.verdict == Verdict::TooLarge) {
    out << r.certificate.note << "\n";
    return kExitUsage;
  }
  if (r.verdict == Verdict::Unsat) {
    out << "not consistent; explored " << r.certificate.states_explored
        << " states, longest serializable prefix:";
    for (int id : r.certificate.deepest_prefix) out << ' ' << id;
    out << "\n";
    if (!r.certificate.note.empty()) out << r.certificate.note << "\n";
    return kExitViolation;
  }
  out << "consistent; serialization:\n";
  for (int id : r.witness.order) out << id << "\n";
  return kExitOk;
}

}  // namespace scmem
