// adi_cli: run, campaign, validate and oracle subcommands over the header-only core.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adi/adi.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kValidation = 1, kPropertyViolation = 2, kInternal = 3 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string format = "jsonl";
  unsigned parallel = 1;
  bool no_supervisor = false;
  std::string sc_config;
};

std::vector<adi::SupervisorConfig> parse_sc_config(const std::string& s, bool allow_both) {
  if (s.empty()) return {};
  if (s == "simplex" || s == "LiveSignalSimplex") return {adi::SupervisorConfig::LiveSignalSimplex};
  if (s == "duplicated" || s == "DuplicatedSc") return {adi::SupervisorConfig::DuplicatedSc};
  if (allow_both && s == "both")
    return {adi::SupervisorConfig::LiveSignalSimplex, adi::SupervisorConfig::DuplicatedSc};
  throw CLI::ValidationError("--sc-config", "unknown supervisor configuration '" + s + "'");
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Timestamps live here only, so data files stay byte-identical across invocations.
void write_manifest(const fs::path& dir, const std::string& subcommand, const std::vector<std::string>& args,
                    const std::optional<std::uint64_t>& seed, const std::vector<std::string>& outputs) {
  nlohmann::ordered_json m;
  m["tool"] = "adi_cli";
  m["subcommand"] = subcommand;
  m["args"] = args;
  m["seed_override"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
  m["created_utc"] = utc_now();
  m["outputs"] = outputs;
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

std::string join_sequence(const std::vector<adi::VehicleLevelState>& seq) {
  std::string s;
  for (auto v : seq) s += (s.empty() ? "" : ">") + std::string(adi::to_string(v));
  return s;
}

bool violates(const adi::RunSummary& s) {
  return s.outcome == adi::Outcome::Crash || s.outcome == adi::Outcome::ArchitecturalFailure || s.rule_gaps > 0 ||
         s.legality_violations > 0;
}

int cmd_run(const std::string& path, const Common& o, const std::vector<std::string>& argv) {
  adi::ScenarioConfig cfg = adi::load_scenario(path);
  adi::RunOptions opt;
  opt.no_supervisor = o.no_supervisor;
  opt.seed = o.seed;
  if (auto sc = parse_sc_config(o.sc_config, false); !sc.empty()) opt.supervisor = sc.front();

  adi::Trace trace = adi::run_scenario(cfg, opt);
  const adi::Classification c = adi::classify_trace(trace);
  const adi::RunSummary s = adi::summarize(trace, c);

  fs::create_directories(o.out);
  const std::string trace_name = cfg.name + ".trace." + o.format;
  {
    std::ofstream f(fs::path(o.out) / trace_name);
    if (o.format == "csv")
      adi::write_trace_csv(f, trace);
    else
      adi::write_trace_jsonl(f, trace);
  }
  const std::string states_name = cfg.name + ".transitions.csv";
  {
    std::ofstream f(fs::path(o.out) / states_name);
    f << "seed,t,from,to\n";
    for (const auto& tr : c.transitions)
      f << trace.seed << ',' << adi::format_double(tr.t) << ',' << adi::to_string(tr.from) << ','
        << adi::to_string(tr.to) << '\n';
  }
  write_manifest(o.out, "run", argv, o.seed, {trace_name, states_name});

  std::cout << cfg.name << " seed=" << trace.seed
            << " supervisor=" << (trace.supervisor_enabled ? std::string(adi::to_string(trace.supervisor)) : "none")
            << " outcome=" << adi::to_string(trace.outcome);
  if (trace.outcome == adi::Outcome::MinimalRiskCondition) std::cout << " mrc=" << adi::to_string(trace.mrc_grade);
  if (trace.takeover)
    std::cout << " takeover=" << adi::to_string(trace.takeover->cause) << "@" << adi::format_double(trace.takeover->t);
  std::cout << " states=" << join_sequence(s.sequence) << " gaps=" << s.rule_gaps
            << " illegal=" << s.legality_violations << '\n';

  const bool single_fault = trace.faults.size() <= 1;
  return (single_fault && violates(s)) || s.rule_gaps || s.legality_violations ? kPropertyViolation : kOk;
}

int cmd_campaign(const std::vector<std::string>& paths, const Common& o, const std::vector<std::string>& argv) {
  std::vector<adi::ScenarioConfig> bases;
  for (const auto& p : paths) bases.push_back(adi::load_scenario(p));
  std::vector<adi::SupervisorConfig> sweep = parse_sc_config(o.sc_config, true);

  fs::create_directories(o.out);
  std::ofstream outcomes(fs::path(o.out) / "outcomes.csv");
  std::ofstream summary(fs::path(o.out) / "summary.csv");
  adi::write_outcomes_header(outcomes);
  adi::write_summary_header(summary);

  std::size_t next_id = 0;
  std::size_t bad = 0;
  adi::Metrics total;
  for (const auto& base : bases) {
    std::vector<std::optional<adi::SupervisorConfig>> configs(sweep.begin(), sweep.end());
    if (configs.empty()) configs.push_back(std::nullopt);
    for (const auto& sc : configs) {
      adi::RunOptions opt;
      opt.no_supervisor = o.no_supervisor;
      opt.seed = o.seed;
      opt.supervisor = sc;
      const adi::CampaignResult r = adi::run_campaign(base, o.parallel, opt, next_id);
      next_id += r.runs.size();
      for (const auto& s : r.runs) {
        adi::write_outcome_row(outcomes, s);
        if (!violates(s)) continue;
        ++bad;
        std::cerr << "violation: run " << s.run_id << ' ' << base.name << ' '
                  << (s.fault ? adi::fault_code(*s.fault) + " t_on=" + adi::format_double(s.fault->t_on) +
                                    " d=" + adi::format_double(s.fault->detectability)
                              : std::string("control"))
                  << " -> " << adi::to_string(s.outcome) << " gaps=" << s.rule_gaps
                  << " illegal=" << s.legality_violations << '\n';
      }
      const std::string sup = o.no_supervisor ? "none" : std::string(adi::to_string(sc.value_or(base.supervisor)));
      adi::write_summary_row(summary, base.name, sup, r.metrics);
      total.merge(r.metrics);
    }
  }
  adi::write_summary_row(summary, "all", o.no_supervisor ? "none" : "mixed", total);
  write_manifest(o.out, "campaign", argv, o.seed, {"outcomes.csv", "summary.csv"});

  std::cout << "campaign runs=" << total.runs << " crash=" << total.crash_count << " mrc=" << total.mrc_count
            << " mission_complete=" << total.mission_complete_count
            << " architectural_failure=" << total.architectural_failure_count
            << " false_takeover=" << total.false_takeover_count
            << " mean_latency_s=" << adi::format_double(total.mean_latency())
            << " availability=" << adi::format_double(total.availability());
  if (o.seed) std::cout << " seed=" << *o.seed;
  std::cout << '\n';
  if (bad) std::cout << bad << " run(s) violate single-fault safety or classification, see stderr\n";
  return bad ? kPropertyViolation : kOk;
}

int cmd_validate(const std::vector<std::string>& paths) {
  int rc = kOk;
  for (const auto& p : paths) {
    try {
      adi::load_scenario(p);
      std::cout << p << ": ok\n";
    } catch (const adi::ScenarioError& e) {
      std::cout << p << ": invalid\n";
      for (const auto& err : e.errors()) std::cout << "  " << (err.path.empty() ? "<root>" : err.path) << ": " << err.message << '\n';
      rc = kValidation;
    }
  }
  return rc;
}

int cmd_oracle(const Common& o, double tolerance, bool write_csv, const std::vector<std::string>& argv) {
  const adi::RiskParams params;
  const auto grid = adi::oracle_grid(params);
  double worst = 0.0;
  std::size_t exceed = 0;
  const adi::OracleGridPoint* worst_pt = nullptr;
  for (const auto& pt : grid) {
    const double d = std::abs(pt.estimate - pt.oracle);
    if (d > tolerance) ++exceed;
    if (!worst_pt || d > worst) {
      worst = d;
      worst_pt = &pt;
    }
  }
  if (write_csv) {
    fs::create_directories(o.out);
    std::ofstream f(fs::path(o.out) / "oracle.csv");
    f << "ego_v,gap,obstacle_v,estimate,oracle,abs_diff\n";
    for (const auto& pt : grid)
      f << adi::format_double(pt.ego_v) << ',' << adi::format_double(pt.gap) << ',' << adi::format_double(pt.obstacle_v)
        << ',' << adi::format_double(pt.estimate) << ',' << adi::format_double(pt.oracle) << ','
        << adi::format_double(std::abs(pt.estimate - pt.oracle)) << '\n';
    write_manifest(o.out, "oracle", argv, std::nullopt, {"oracle.csv"});
  }
  std::cout << "oracle points=" << grid.size() << " max_abs_diff=" << adi::format_double(worst)
            << " tolerance=" << adi::format_double(tolerance) << " exceeding=" << exceed;
  if (worst_pt)
    std::cout << " worst_at=(ego_v=" << worst_pt->ego_v << ", gap=" << worst_pt->gap
              << ", obstacle_v=" << worst_pt->obstacle_v << ")";
  std::cout << '\n';
  return exceed ? kPropertyViolation : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-channel ADI runtime-assurance simulator"};
  app.require_subcommand(1);
  const std::vector<std::string> args(argv + 1, argv + argc);

  Common o;
  std::string run_path;
  std::vector<std::string> paths;
  double tolerance = 0.05;
  bool oracle_csv = false;

  auto add_common = [&](CLI::App* sub, const char* sc_help) {
    sub->add_option("--seed", o.seed, "Replace the scenario seed");
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_flag("--no-supervisor", o.no_supervisor, "Debug: run without any supervisor channel");
    sub->add_option("--sc-config", o.sc_config, sc_help);
  };

  auto* run = app.add_subcommand("run", "Run one scenario, write trace and classification");
  run->add_option("config", run_path, "Scenario file")->required();
  add_common(run, "Supervisor configuration: simplex | duplicated");
  run->add_option("--format", o.format, "Trace format")->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();

  auto* campaign = app.add_subcommand("campaign", "Single-fault campaign over one or more base scenarios");
  campaign->add_option("configs", paths, "Scenario files")->required();
  add_common(campaign, "Supervisor configuration: simplex | duplicated | both");
  campaign->add_option("--parallel", o.parallel, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Check scenario files; exit 1 on any error");
  validate->add_option("configs", paths, "Scenario files")->required();

  auto* oracle = app.add_subcommand("oracle", "Compare the risk estimate with the brute-force oracle");
  oracle->add_option("--tolerance", tolerance, "Maximum allowed |difference|")->capture_default_str();
  oracle->add_option("--out", o.out, "Output directory for oracle.csv");
  oracle->add_flag("--csv", oracle_csv, "Write the per-point report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(run_path, o, args);
    if (*campaign) return cmd_campaign(paths, o, args);
    if (*validate) return cmd_validate(paths);
    if (*oracle) return cmd_oracle(o, tolerance, oracle_csv, args);
  } catch (const adi::ScenarioError& e) {
    std::cerr << "invalid scenario:\n" << e.what() << '\n';
    return kValidation;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
