#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xsmr/config.hpp"
#include "xsmr/replica.hpp"
#include "xsmr/trace.hpp"

namespace xsmr {

enum class Outcome { Pass, Fail, NotApplicable };

const char* to_string(Outcome o);

// A failing verdict names the first trace event that witnesses it.
struct Verdict {
  std::string property;
  Outcome outcome = Outcome::Pass;
  std::optional<std::size_t> witness;
  std::string detail;

  bool ok() const { return outcome != Outcome::Fail; }
};

Verdict pass(const std::string& property);
Verdict fail(const std::string& property, std::optional<std::size_t> witness,
             const std::string& detail);
Verdict not_applicable(const std::string& property, const std::string& detail);

// Per-replica applied logs rebuilt from execute/skip/rollback events.
std::map<AssetId, std::vector<LogEntry>> applied_logs(const std::vector<TraceEvent>& trace);

// Long-balance deltas per agent and asset, from fund/topup/redeem events.
std::map<AgentId, std::map<AssetId, std::int64_t>> long_deltas(
    const std::vector<TraceEvent>& trace);

// Agents never defunded and successfully funded at every replica.
std::vector<AgentId> stably_funded(const std::vector<TraceEvent>& trace,
                                   const ScenarioConfig& cfg);

Verdict check_consistency(const std::vector<TraceEvent>& trace);
Verdict check_safety(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);
Verdict check_liveness(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);
Verdict check_fairness(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);
Verdict check_timing(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);
// Sends never exceed the delay bound.
Verdict check_network(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);
// No invariant check event fired.
Verdict check_invariant(const std::vector<TraceEvent>& trace);
// A compliant agent's own request is buffered everywhere within delta.
Verdict check_delivery(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);
// A request buffered anywhere by its round's start is buffered everywhere
// before that start plus one window.
Verdict check_relay(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);
// Every round in which an agent sent conflicting requests resolved to Skip.
Verdict check_equivocation_skips(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);
Verdict compare_optimistic(const ScenarioConfig& cfg);

std::vector<Verdict> check_trace(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg);

std::string verdicts_json(const std::vector<Verdict>& verdicts);

}  // namespace xsmr
