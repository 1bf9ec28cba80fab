#include "xsmr/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "xsmr/checks.hpp"
#include "xsmr/config.hpp"
#include "xsmr/sim.hpp"
#include "xsmr/suite.hpp"

namespace xsmr {

namespace {

using ojson = nlohmann::ordered_json;

struct Flags {
  std::string target;
  std::string out;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::size_t runs = 0;
  std::string replay;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig load(const std::string& path, const Flags& f) {
  ScenarioConfig cfg = parse_config(read_file(path));
  if (f.seed) cfg.seed = *f.seed;
  if (!f.mode.empty()) {
    if (f.mode != "pessimistic" && f.mode != "optimistic") {
      throw UsageError("--mode must be pessimistic or optimistic");
    }
    cfg.optimistic = f.mode == "optimistic";
    validate_config(cfg);
  }
  return cfg;
}

std::string trace_text(const std::vector<TraceEvent>& trace) {
  std::ostringstream ss;
  write_trace(ss, trace);
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

ojson summary(const ScenarioConfig& cfg, const RunResult& r) {
  ojson j;
  j["name"] = cfg.name;
  j["mode"] = cfg.optimistic ? "optimistic" : "pessimistic";
  j["seed"] = cfg.seed;
  j["completion_tick"] = r.completion ? ojson(*r.completion) : ojson(nullptr);
  j["end_tick"] = r.end_tick;
  j["cap_hit"] = r.cap_hit;
  ojson balances = ojson::object();
  for (const auto& [id, m] : r.final) {
    ojson b = ojson::object();
    for (const auto& [a, v] : m) {
      std::int64_t before = r.initial.at(id).count(a) ? r.initial.at(id).at(a) : 0;
      b[cfg.assets.at(a)] = {{"initial", before}, {"final", v}};
    }
    balances[std::to_string(id)] = b;
  }
  j["balances"] = balances;
  ojson utils = ojson::object();
  for (const auto& [id, u] : r.utils) utils[std::to_string(id)] = u;
  j["utils"] = utils;
  j["events"] = r.trace.size();
  j["invariant_checks"] = r.invariant_checks;
  return j;
}

ojson report(const std::string& name, const std::vector<Verdict>& verdicts,
             const std::vector<TraceEvent>& trace) {
  ojson j;
  j["config"] = name;
  bool ok = std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.ok(); });
  j["passed"] = ok;
  j["verdicts"] = ojson::parse(verdicts_json(verdicts));
  for (const auto& v : verdicts) {
    if (v.ok() || !v.witness || *v.witness >= trace.size()) continue;
    j["first_witness"] = {{"property", v.property},
                          {"index", *v.witness},
                          {"event", ojson::parse(to_json_line(trace[*v.witness]))}};
    break;
  }
  return j;
}

int cmd_validate(const Flags& f, std::ostream& out) {
  ScenarioConfig cfg = parse_config(read_file(f.target));
  out << config_to_json(cfg) << '\n';
  return kExitOk;
}

int cmd_run(const Flags& f, std::ostream& out) {
  ScenarioConfig cfg = load(f.target, f);
  RunResult r = run_scenario(cfg);
  if (!f.out.empty()) write_out(f.out, trace_text(r.trace));
  out << summary(cfg, r).dump(2) << '\n';
  return kExitOk;
}

int cmd_check(const Flags& f, std::ostream& out) {
  auto names = suite_names();
  if (std::find(names.begin(), names.end(), f.target) != names.end()) {
    SuiteReport rep = run_suite(f.target, f.runs ? f.runs : 1);
    out << report_json(rep) << '\n';
    return rep.ok() ? kExitOk : kExitViolation;
  }
  ScenarioConfig cfg = load(f.target, f);
  if (!f.replay.empty()) {
    std::istringstream in(read_file(f.replay));
    std::vector<TraceEvent> trace;
    try {
      trace = read_trace(in);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    auto verdicts = check_trace(trace, cfg);
    auto j = report(cfg.name, verdicts, trace);
    out << j.dump(2) << '\n';
    return j["passed"].get<bool>() ? kExitOk : kExitViolation;
  }
  ojson all = ojson::array();
  bool ok = true;
  const std::size_t runs = f.runs ? f.runs : 1;
  for (std::size_t s = 0; s < runs; ++s) {
    ScenarioConfig c = f.runs ? reseeded(cfg, s) : cfg;
    RunResult r = run_scenario(c);
    auto verdicts = check_trace(r.trace, c);
    if (f.runs == 0) verdicts.push_back(compare_optimistic(c));
    auto j = report(c.name, verdicts, r.trace);
    j["seed"] = c.seed;
    if (!j["passed"].get<bool>()) {
      ok = false;
      all.push_back(j);
      break;
    }
    if (runs == 1) all.push_back(j);
  }
  ojson j;
  j["passed"] = ok;
  j["runs"] = runs;
  j["reports"] = all;
  out << j.dump(2) << '\n';
  return ok ? kExitOk : kExitViolation;
}

int cmd_replay(const Flags& f, std::ostream& out) {
  ScenarioConfig cfg = load(f.target, f);
  std::string recorded = read_file(f.trace);
  RunResult r = run_scenario(cfg);
  std::string fresh = trace_text(r.trace);
  std::istringstream in(recorded);
  std::vector<TraceEvent> trace;
  try {
    trace = read_trace(in);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  auto j = report(cfg.name, check_trace(trace, cfg), trace);
  bool identical = fresh == recorded;
  j["identical"] = identical;
  if (!identical) {
    std::istringstream a(fresh);
    std::istringstream b(recorded);
    std::string la;
    std::string lb;
    std::size_t line = 0;
    while (true) {
      ++line;
      bool ga = static_cast<bool>(std::getline(a, la));
      bool gb = static_cast<bool>(std::getline(b, lb));
      if (!ga && !gb) break;
      if (!ga || !gb || la != lb) {
        j["first_difference_line"] = line;
        break;
      }
    }
  }
  out << j.dump(2) << '\n';
  return identical && j["passed"].get<bool>() ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-asset state machine replication simulator", "xsmr"};
  app.require_subcommand(1);
  Flags f;

  auto* validate = app.add_subcommand("validate", "Validate a scenario config and echo it normalized");
  validate->add_option("config", f.target, "Scenario config (JSON)")->required();

  auto* run = app.add_subcommand("run", "Run a scenario and print a summary");
  run->add_option("config", f.target, "Scenario config (JSON)")->required();
  run->add_option("--out", f.out, "Write the JSONL trace here");
  run->add_option("--seed", f.seed, "Override the config seed");
  run->add_option("--mode", f.mode, "pessimistic or optimistic");

  auto* check = app.add_subcommand("check", "Run property checkers on a config or a named suite");
  check->add_option("target", f.target, "Config path or suite name")->required();
  check->add_option("--runs", f.runs, "Seeds per scenario");
  check->add_option("--seed", f.seed, "Override the config seed");
  check->add_option("--mode", f.mode, "pessimistic or optimistic");
  check->add_option("--replay", f.replay, "Check a recorded trace instead of running");

  auto* replay = app.add_subcommand("replay", "Re-run a config and compare with a recorded trace");
  replay->add_option("config", f.target, "Scenario config (JSON)")->required();
  replay->add_option("trace", f.trace, "Recorded JSONL trace")->required();
  replay->add_option("--seed", f.seed, "Override the config seed");
  replay->add_option("--mode", f.mode, "pessimistic or optimistic");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*validate) return cmd_validate(f, out);
    if (*run) return cmd_run(f, out);
    if (*check) return cmd_check(f, out);
    if (*replay) return cmd_replay(f, out);
  } catch (const ConfigError& e) {
    err << f.target << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace xsmr
