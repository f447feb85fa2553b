// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "adi/adi.hpp"

using namespace adi;
using S = VehicleLevelState;

namespace {

// Pinned tolerances and budgets.
constexpr double kOracleTolerance = 0.05;
constexpr double kCampaignBudgetS = 60.0;
constexpr double kOracleBudgetS = 30.0;
constexpr std::int64_t kHeartbeatSteps = 3;  // k_miss
constexpr std::size_t kOracleGridPoints = 1000;

const std::vector<std::string> kBaseSuite = {"benign_cruise", "stopped_obstacle", "lead_hard_brake", "adjacent_cut_in",
                                             "degraded_platform"};
const std::string kSilentNc = "silent_nc_stopped_obstacle";

ScenarioConfig load(const std::string& name) { return load_scenario(std::string(ADI_SCENARIO_DIR) + "/" + name + ".json"); }

std::int64_t step_of(double t) { return std::llround(t / kStep); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string describe(const std::string& scenario, const std::optional<FaultSpec>& f) {
  if (!f) return scenario + "/control";
  char buf[64];
  std::snprintf(buf, sizeof buf, " t=%.1f d=%.0f", f->t_on, f->detectability);
  return scenario + "/" + fault_code(*f) + buf;
}

struct CampaignRun {
  std::string scenario;
  std::optional<FaultSpec> fault;
  RunSummary summary;
  std::optional<std::int64_t> first_report_step;
  std::optional<std::int64_t> takeover_step;
  bool directive = false;
  double max_risk_before_takeover = 0.0;
  bool fault_active = false;  // run lasted until activation
};

CampaignRun execute(const ScenarioConfig& base, const std::optional<FaultSpec>& f, const RunOptions& opt = {}) {
  ScenarioConfig cfg = base;
  cfg.faults.clear();
  if (f) cfg.faults.push_back(*f);
  Trace trace = run_scenario(cfg, opt);
  const Classification c = classify_trace(trace);
  CampaignRun r{base.name, f, summarize(trace, c), {}, {}, false, 0.0};
  for (const auto& rec : trace.records) {
    if (rec.nc_self_report_first) r.first_report_step = rec.step;
    if (rec.sw && rec.sw->watchdog_directive) r.directive = true;
  }
  if (trace.takeover) r.takeover_step = step_of(trace.takeover->t);
  r.max_risk_before_takeover = r.summary.max_true_risk_before_takeover;
  r.fault_active = f && !trace.records.empty() && trace.records.back().t >= f->t_on - kTimeEps;
  return r;
}

std::string jsonl(const Trace& t) {
  std::ostringstream os;
  write_trace_jsonl(os, t);
  return os.str();
}

std::string csv(const Trace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

std::string outcomes(const CampaignResult& r) {
  std::ostringstream os;
  write_outcomes_header(os);
  for (const auto& s : r.runs) write_outcome_row(os, s);
  return os.str();
}

bool contains_run(const std::vector<S>& seq, const std::vector<S>& want) {
  return std::search(seq.begin(), seq.end(), want.begin(), want.end()) != seq.end();
}

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::string list_some(const std::vector<std::string>& v, std::size_t max = 8) {
  std::string out;
  for (std::size_t i = 0; i < v.size() && i < max; ++i) out += (i ? "; " : "") + v[i];
  if (v.size() > max) out += "; +" + std::to_string(v.size() - max) + " more";
  return out;
}

}  // namespace

int main() {
  std::vector<Line> lines;
  std::vector<ScenarioConfig> suite;
  for (const auto& name : kBaseSuite) suite.push_back(load(name));
  const ScenarioConfig silent = load(kSilentNc);

  // Base single-fault campaign, sequential and timed.
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CampaignRun> runs;
  for (const auto& base : suite)
    for (const auto& f : single_fault_campaign(default_catalog(base.actor_ids()))) runs.push_back(execute(base, f));
  const double campaign_s = seconds_since(t0);

  // 1. single-fault safety
  {
    std::vector<std::string> bad;
    std::size_t crash = 0, arch = 0;
    for (const auto& r : runs) {
      if (r.summary.outcome == Outcome::Crash) ++crash;
      if (r.summary.outcome == Outcome::ArchitecturalFailure) ++arch;
      if (r.summary.outcome == Outcome::Crash || r.summary.outcome == Outcome::ArchitecturalFailure)
        bad.push_back(describe(r.scenario, r.fault) + " -> " + std::string(to_string(r.summary.outcome)));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "runs=%zu crash=%zu architectural_failure=%zu runtime=%.2fs (budget %.0fs)",
                  runs.size(), crash, arch, campaign_s, kCampaignBudgetS);
    std::string detail = buf;
    if (!bad.empty()) detail += " | " + list_some(bad);
    lines.push_back({1, "single-fault safety", crash == 0 && arch == 0 && campaign_s < kCampaignBudgetS, detail});
  }

  // 2. supervisor value demonstration
  {
    RunOptions off;
    off.no_supervisor = true;
    const Outcome without = run_scenario(silent, off).outcome;
    const Outcome with = run_scenario(silent).outcome;
    lines.push_back({2, "supervisor value", without == Outcome::Crash && with == Outcome::MinimalRiskCondition,
                     "no-supervisor=" + std::string(to_string(without)) + " supervisor=" + std::string(to_string(with))});
  }

  // 3. risk oracle equivalence
  {
    const auto t1 = std::chrono::steady_clock::now();
    const auto grid = oracle_grid(RiskParams{});
    const double s = seconds_since(t1);
    double worst = 0.0;
    for (const auto& pt : grid) worst = std::max(worst, std::abs(pt.estimate - pt.oracle));
    char buf[160];
    std::snprintf(buf, sizeof buf, "points=%zu max|diff|=%.4f (tol %.2f) runtime=%.2fs (budget %.0fs)", grid.size(),
                  worst, kOracleTolerance, s, kOracleBudgetS);
    lines.push_back({3, "risk oracle equivalence",
                     grid.size() == kOracleGridPoints && worst <= kOracleTolerance && s < kOracleBudgetS, buf});
  }

  // 4. direct takeover on self-report
  {
    std::size_t n = 0, inactive = 0;
    std::vector<std::string> bad;
    for (const auto& r : runs) {
      if (!r.fault || !has_detectability(r.fault->kind) || r.fault->detectability != 1.0) continue;
      if (!r.fault_active) {
        ++inactive;
        continue;
      }
      ++n;
      const bool ok = r.first_report_step && r.takeover_step && *r.takeover_step == *r.first_report_step &&
                      r.summary.takeover->cause == TakeoverCause::SelfDiagnosedError;
      if (!ok) bad.push_back(describe(r.scenario, r.fault));
    }
    lines.push_back({4, "direct takeover on self-report", n > 0 && bad.empty(),
                     "self-reporting runs=" + std::to_string(n) + " same-step takeovers=" + std::to_string(n - bad.size()) +
                         " never active (run ended first)=" + std::to_string(inactive) +
                         (bad.empty() ? "" : " | " + list_some(bad))});
  }

  // 5. heartbeat latency
  {
    std::vector<CampaignRun> silence;
    for (const auto& r : runs)
      if (r.fault && r.fault->kind == FaultKind::NcSilence) silence.push_back(r);
    silence.push_back(execute(silent, silent.faults.at(0)));
    std::vector<std::string> bad;
    std::size_t inactive = 0;
    for (const auto& r : silence) {
      if (!r.fault_active) {
        ++inactive;
        continue;
      }
      const bool ok = r.takeover_step && r.summary.takeover->cause == TakeoverCause::HeartbeatLost &&
                      *r.takeover_step - step_of(r.fault->t_on) == kHeartbeatSteps;
      if (!ok) bad.push_back(describe(r.scenario, r.fault));
    }
    lines.push_back({5, "heartbeat latency k_miss*dt", bad.empty(),
                     "NcSilence runs=" + std::to_string(silence.size()) + " exact 0.3 s=" +
                         std::to_string(silence.size() - inactive - bad.size()) +
                         " never active=" + std::to_string(inactive) + (bad.empty() ? "" : " | " + list_some(bad))});
  }

  // 6. ISC/ESC complementarity: latent Nc perception faults that create a hazard
  {
    std::size_t total = 0, applicable = 0, caught = 0;
    std::vector<std::string> bad;
    for (const auto& r : runs) {
      if (!r.fault || !is_nc_perception_fault(r.fault->kind) || r.fault->detectability != 0.0) continue;
      ++total;
      const bool manifested = r.summary.hazard_while_latent || r.summary.outcome == Outcome::Crash;
      if (!manifested) {
        if (r.summary.outcome == Outcome::Crash || r.summary.outcome == Outcome::ArchitecturalFailure)
          bad.push_back(describe(r.scenario, r.fault));
        continue;
      }
      ++applicable;
      const bool ok = r.summary.takeover && r.summary.takeover->cause == TakeoverCause::EscGraceExpired &&
                      r.max_risk_before_takeover < kUnavoidableRisk &&
                      r.summary.outcome == Outcome::MinimalRiskCondition;
      if (ok) ++caught;
      else bad.push_back(describe(r.scenario, r.fault) + " -> " + std::string(to_string(r.summary.outcome)));
    }
    lines.push_back({6, "ISC/ESC complementarity", bad.empty(),
                     "d=0 perception runs=" + std::to_string(total) + " hazard while latent=" + std::to_string(applicable) +
                         " caught by ESC before unavoidable=" + std::to_string(caught) +
                         (bad.empty() ? "" : " | " + list_some(bad))});
  }

  // 7. no false takeover; cut-in handled by the Nc
  {
    std::size_t takeovers = 0, false_takeovers = 0;
    bool cut_in_ok = false;
    std::string cut_in_seq;
    for (const auto& r : runs) {
      if (r.fault) continue;
      if (r.summary.takeover) ++takeovers;
      if (r.summary.false_takeover) ++false_takeovers;
      if (r.scenario == "adjacent_cut_in") {
        cut_in_ok = !r.summary.takeover &&
                    contains_run(r.summary.sequence, {S::NominalOperation, S::HazardousEventOperational,
                                                      S::SafetyManeuverNc, S::MinimalRiskCondition});
        for (auto s : r.summary.sequence) cut_in_seq += (cut_in_seq.empty() ? "" : ">") + std::string(to_string(s));
      }
    }
    lines.push_back({7, "no false takeover", takeovers == 0 && false_takeovers == 0 && cut_in_ok,
                     "fault-free takeovers=" + std::to_string(takeovers) + " cut-in: " + cut_in_seq});
  }

  // 8. supervisor failure handled
  {
    std::vector<std::string> bad;
    std::size_t n = 0, inactive = 0;
    RunOptions dup;
    dup.supervisor = SupervisorConfig::DuplicatedSc;
    for (const auto& base : suite) {
      const Outcome control_dup = execute(base, std::nullopt, dup).summary.outcome;
      for (double t_on : kCampaignActivationTimes) {
        FaultSpec f;
        f.kind = FaultKind::ScSilence;
        f.target = "sc";
        f.t_on = t_on;
        const CampaignRun simplex = execute(base, f);
        if (!simplex.fault_active) {
          ++inactive;
          continue;
        }
        const bool nc_maneuver =
            std::find(simplex.summary.sequence.begin(), simplex.summary.sequence.end(), S::SafetyManeuverNc) !=
            simplex.summary.sequence.end();
        if (!(simplex.directive && nc_maneuver && simplex.summary.outcome == Outcome::MinimalRiskCondition))
          bad.push_back("simplex " + describe(base.name, f) + " -> " + std::string(to_string(simplex.summary.outcome)));
        const CampaignRun d = execute(base, f, dup);
        const Outcome expected = control_dup == Outcome::MissionComplete ? Outcome::MissionComplete : control_dup;
        if (d.directive || d.summary.outcome != expected)
          bad.push_back("duplicated " + describe(base.name, f) + " -> " + std::string(to_string(d.summary.outcome)));
        n += 2;
      }
    }
    lines.push_back({8, "supervisor failure handled", bad.empty(),
                     "ScSilence runs=" + std::to_string(n) + " conforming=" + std::to_string(n - bad.size()) +
                         " never active=" + std::to_string(inactive) +
                         (bad.empty() ? "" : " | " + list_some(bad))});
  }

  // 9. state-machine conformance
  {
    std::size_t gaps = 0, illegal = 0;
    std::vector<std::string> bad;
    for (const auto& r : runs) {
      gaps += r.summary.rule_gaps;
      illegal += r.summary.legality_violations;
      if (r.summary.rule_gaps || r.summary.legality_violations) bad.push_back(describe(r.scenario, r.fault));
    }
    lines.push_back({9, "state-machine conformance", gaps == 0 && illegal == 0,
                     "traces=" + std::to_string(runs.size()) + " rule gaps=" + std::to_string(gaps) +
                         " illegal transitions=" + std::to_string(illegal) + (bad.empty() ? "" : " | " + list_some(bad))});
  }

  // 10. determinism
  {
    std::vector<std::string> bad;
    std::vector<ScenarioConfig> all = suite;
    all.push_back(silent);
    for (const auto& cfg : all) {
      const Trace a = run_scenario(cfg), b = run_scenario(cfg);
      if (jsonl(a) != jsonl(b) || csv(a) != csv(b)) bad.push_back("trace " + cfg.name);
      if (outcomes(run_campaign(cfg, 1)) != outcomes(run_campaign(cfg, 8))) bad.push_back("campaign " + cfg.name);
    }
    lines.push_back({10, "determinism", bad.empty(),
                     "scenarios=" + std::to_string(all.size()) + " byte-identical traces, parallelism {1, 8}" +
                         (bad.empty() ? "" : " | differs: " + list_some(bad))});
  }

  int passed = 0;
  for (const auto& l : lines) {
    std::cout << (l.pass ? "PASS" : "FAIL") << "  [" << l.id << "] " << l.name << ": " << l.detail << '\n';
    passed += l.pass;
  }
  std::cout << "acceptance: " << passed << "/" << lines.size() << " criteria pass\n";
  return passed == static_cast<int>(lines.size()) ? 0 : 1;
}
