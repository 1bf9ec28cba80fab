#include "xsmr/checks.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "xsmr/sim.hpp"

namespace xsmr {

namespace {

struct IndexedLog {
  std::vector<LogEntry> entries;
  std::vector<std::size_t> events;
};

std::map<AssetId, IndexedLog> indexed_logs(const std::vector<TraceEvent>& trace) {
  std::map<AssetId, IndexedLog> logs;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    if (!ev.replica || !ev.round) continue;
    auto& log = logs[*ev.replica];
    if (ev.kind == EventKind::Execute || ev.kind == EventKind::Skip) {
      LogEntry e{.round = *ev.round, .tick = ev.tick, .start = ev.start.value_or(0)};
      if (ev.kind == EventKind::Execute) e.request = ev.request;
      log.entries.push_back(e);
      log.events.push_back(i);
    } else if (ev.kind == EventKind::Rollback) {
      while (!log.entries.empty() && log.entries.back().round >= *ev.round) {
        log.entries.pop_back();
        log.events.pop_back();
      }
    }
  }
  return logs;
}

bool compliant(const ScenarioConfig& cfg, AgentId id) {
  const auto* a = cfg.agent(id);
  return a && a->strategy == Strategy::Compliant;
}

bool proposal_funded(const std::vector<TraceEvent>& trace) {
  return std::any_of(trace.begin(), trace.end(), [](const TraceEvent& ev) {
    return ev.kind == EventKind::Halt && ev.detail == "final proposal_funded";
  });
}

std::int64_t util_of(const ScenarioConfig& cfg, AgentId id,
                     const std::map<AssetId, std::int64_t>& delta, bool funded_proposal) {
  std::int64_t u = 0;
  for (const auto& [asset, d] : delta) u += d * cfg.utility.value(id, asset);
  if (funded_proposal) u += cfg.utility.proposal_value(id);
  return u;
}

std::optional<std::size_t> last_event_of(const std::vector<TraceEvent>& trace, AgentId id) {
  for (std::size_t i = trace.size(); i-- > 0;) {
    if (trace[i].agent == id) return i;
  }
  if (trace.empty()) return std::nullopt;
  return trace.size() - 1;
}

// First buffering tick of each request at each replica.
std::map<Request, std::map<AssetId, std::pair<Tick, std::size_t>>> first_buffers(
    const std::vector<TraceEvent>& trace) {
  std::map<Request, std::map<AssetId, std::pair<Tick, std::size_t>>> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    if (ev.kind != EventKind::Buffer || !ev.request || !ev.replica) continue;
    out[*ev.request].emplace(*ev.replica, std::make_pair(ev.tick, i));
  }
  return out;
}

std::map<AgentId, Tick> first_redeems(const std::vector<TraceEvent>& trace) {
  std::map<AgentId, Tick> out;
  for (const auto& ev : trace) {
    if (ev.kind == EventKind::Redeem && ev.agent && ev.detail == "ok") {
      out.emplace(*ev.agent, ev.tick);
    }
  }
  return out;
}

bool funded_through(const std::map<AgentId, Tick>& redeems, AgentId id, Tick until) {
  auto it = redeems.find(id);
  return it == redeems.end() || it->second > until;
}

// Requests an agent signed itself, by round, with the first send event.
std::map<AgentId, std::map<std::uint64_t, std::map<Request, std::size_t>>> issued(
    const std::vector<TraceEvent>& trace) {
  std::map<AgentId, std::map<std::uint64_t, std::map<Request, std::size_t>>> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    if (ev.kind != EventKind::Send || !ev.request || ev.path.size() != 1) continue;
    out[ev.request->agent][ev.request->round].emplace(*ev.request, i);
  }
  return out;
}

}  // namespace

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass:
      return "pass";
    case Outcome::Fail:
      return "fail";
    case Outcome::NotApplicable:
      return "not_applicable";
  }
  return "fail";
}

Verdict pass(const std::string& property) { return {property, Outcome::Pass, std::nullopt, ""}; }

Verdict fail(const std::string& property, std::optional<std::size_t> witness,
             const std::string& detail) {
  return {property, Outcome::Fail, witness, detail};
}

Verdict not_applicable(const std::string& property, const std::string& detail) {
  return {property, Outcome::NotApplicable, std::nullopt, detail};
}

std::map<AssetId, std::vector<LogEntry>> applied_logs(const std::vector<TraceEvent>& trace) {
  std::map<AssetId, std::vector<LogEntry>> out;
  for (auto& [asset, log] : indexed_logs(trace)) out[asset] = std::move(log.entries);
  return out;
}

std::map<AgentId, std::map<AssetId, std::int64_t>> long_deltas(
    const std::vector<TraceEvent>& trace) {
  std::map<AgentId, std::map<AssetId, std::int64_t>> out;
  for (const auto& ev : trace) {
    if (!ev.agent || !ev.replica || !ev.amount || ev.detail != "ok") continue;
    auto& d = out[*ev.agent][*ev.replica];
    if (ev.kind == EventKind::Fund || ev.kind == EventKind::TopUp) d -= *ev.amount;
    if (ev.kind == EventKind::Redeem) d += *ev.amount;
  }
  return out;
}

std::vector<AgentId> stably_funded(const std::vector<TraceEvent>& trace,
                                   const ScenarioConfig& cfg) {
  std::map<AgentId, std::set<AssetId>> funded;
  std::set<AgentId> lost;
  for (const auto& ev : trace) {
    if (!ev.agent) continue;
    if (ev.kind == EventKind::Fund && ev.detail == "ok") funded[*ev.agent].insert(*ev.replica);
    if (ev.kind == EventKind::TopUp && ev.detail == "failed") lost.insert(*ev.agent);
    if (ev.kind == EventKind::Defund && ev.detail != "unauthorized") lost.insert(*ev.agent);
  }
  std::vector<AgentId> out;
  for (AgentId id : cfg.agent_ids()) {
    if (!lost.count(id) && funded[id].size() == cfg.assets.size()) out.push_back(id);
  }
  return out;
}

Verdict check_consistency(const std::vector<TraceEvent>& trace) {
  const std::string name = "consistency";
  auto logs = indexed_logs(trace);
  if (logs.size() < 2) return pass(name);
  const auto& ref = logs.begin()->second;
  for (const auto& [asset, log] : logs) {
    std::size_t k = std::min(ref.entries.size(), log.entries.size());
    for (std::size_t i = 0; i < k; ++i) {
      if (!ref.entries[i].same_outcome(log.entries[i])) {
        return fail(name, log.events[i],
                    "replica " + std::to_string(asset) + " differs at round " +
                        std::to_string(log.entries[i].round));
      }
    }
    if (ref.entries.size() != log.entries.size()) {
      const auto& longer = ref.entries.size() > log.entries.size() ? ref : log;
      return fail(name, longer.events[k],
                  "replica " + std::to_string(asset) + " log length differs");
    }
  }
  return pass(name);
}

Verdict check_safety(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg) {
  const std::string name = "safety";
  auto deltas = long_deltas(trace);
  bool prop = proposal_funded(trace);
  for (AgentId id : cfg.agent_ids()) {
    if (!compliant(cfg, id)) continue;
    std::int64_t u = util_of(cfg, id, deltas[id], prop);
    if (u < 0) {
      return fail(name, last_event_of(trace, id),
                  "agent " + std::to_string(id) + " util " + std::to_string(u));
    }
  }
  return pass(name);
}

Verdict check_liveness(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg) {
  const std::string name = "liveness";
  if (!cfg.all_compliant()) return not_applicable(name, "adversarial config");
  std::set<AssetId> halted;
  for (const auto& ev : trace) {
    if (ev.kind == EventKind::Halt && ev.replica) halted.insert(*ev.replica);
  }
  if (halted.size() != cfg.assets.size()) {
    return fail(name, trace.empty() ? std::nullopt : std::optional<std::size_t>(trace.size() - 1),
                "not every replica reached a final state");
  }
  auto deltas = long_deltas(trace);
  bool prop = proposal_funded(trace);
  for (AgentId id : cfg.agent_ids()) {
    const auto& d = deltas[id];
    bool staked = std::any_of(d.begin(), d.end(), [](const auto& kv) { return kv.second != 0; }) ||
                  (prop && cfg.utility.proposal_value(id) != 0);
    std::int64_t u = util_of(cfg, id, d, prop);
    if (u < 0 || (staked && u == 0)) {
      return fail(name, last_event_of(trace, id),
                  "agent " + std::to_string(id) + " util " + std::to_string(u));
    }
  }
  return pass(name);
}

Verdict check_fairness(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg) {
  const std::string name = "fairness";
  auto stable = stably_funded(trace, cfg);
  auto logs = indexed_logs(trace);
  const std::size_t n = cfg.agents.size();
  for (const auto& [agent, rounds] : issued(trace)) {
    if (!compliant(cfg, agent) || !std::count(stable.begin(), stable.end(), agent)) continue;
    for (const auto& [round, reqs] : rounds) {
      if (reqs.size() != 1) continue;
      const auto& [req, idx] = *reqs.begin();
      if (!cfg.optimistic && trace[idx].tick > scheduled_round_start(round, n, cfg.delta)) {
        continue;
      }
      for (AssetId a = 0; a < cfg.assets.size(); ++a) {
        const auto& log = logs[a].entries;
        auto it = std::find_if(log.begin(), log.end(),
                               [&](const LogEntry& e) { return e.round == round; });
        if (it == log.end() || it->request != req) {
          return fail(name, idx,
                      "round " + std::to_string(round) + " of agent " + std::to_string(agent) +
                          " not executed at replica " + std::to_string(a));
        }
      }
    }
  }
  return pass(name);
}

Verdict check_timing(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg) {
  const std::string name = "timing";
  const std::size_t n = cfg.agents.size();
  const Tick first_start = scheduled_round_start(1, n, cfg.delta);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    if (ev.kind == EventKind::Fund && ev.tick >= first_start) {
      return fail(name, i, "initialization after round 1 opened");
    }
    if ((ev.kind == EventKind::Execute || ev.kind == EventKind::Skip) && ev.round && ev.start) {
      if (*ev.round == 1 && *ev.start != first_start) {
        return fail(name, i, "round 1 start is not (n+1) delta");
      }
      if (!cfg.optimistic && *ev.start != scheduled_round_start(*ev.round, n, cfg.delta)) {
        return fail(name, i, "round start off schedule");
      }
      if (!cfg.optimistic && ev.tick != *ev.start + n * cfg.delta + 1) {
        return fail(name, i, "round resolved off schedule");
      }
    }
  }
  bool any_compliant = std::any_of(cfg.agents.begin(), cfg.agents.end(), [](const AgentSpec& a) {
    return a.strategy == Strategy::Compliant;
  });
  if (!any_compliant) return pass(name);
  auto stable = stably_funded(trace, cfg);
  auto redeems = first_redeems(trace);
  const Tick window = n * cfg.delta;
  for (const auto& [req, at] : first_buffers(trace)) {
    if (!std::count(stable.begin(), stable.end(), req.agent)) continue;
    Tick first = at.begin()->second.first;
    std::size_t idx = at.begin()->second.second;
    for (const auto& [a, tick_idx] : at) {
      if (tick_idx.first < first) {
        first = tick_idx.first;
        idx = tick_idx.second;
      }
    }
    if (!funded_through(redeems, req.agent, first + window)) continue;
    for (AssetId a = 0; a < cfg.assets.size(); ++a) {
      auto it = at.find(a);
      if (it == at.end() || it->second.first > first + window) {
        return fail(name, idx,
                    describe(req) + " missing at replica " + std::to_string(a) +
                        " one window after first buffering");
      }
    }
  }
  return pass(name);
}

Verdict check_network(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg) {
  const std::string name = "network";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    if (ev.kind != EventKind::Send || !ev.due) continue;
    if (*ev.due < ev.tick + 1 || *ev.due > ev.tick + cfg.delta) {
      return fail(name, i, "delivery outside [1, delta]");
    }
  }
  return pass(name);
}

Verdict check_invariant(const std::vector<TraceEvent>& trace) {
  const std::string name = "invariant";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].kind == EventKind::Check && trace[i].detail == "invariant") {
      return fail(name, i, "account invariant broken");
    }
  }
  return pass(name);
}

Verdict check_delivery(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg) {
  const std::string name = "delivery";
  auto buffers = first_buffers(trace);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    if (ev.kind != EventKind::Send || !ev.request || ev.path.size() != 1) continue;
    if (!compliant(cfg, ev.request->agent)) continue;
    const auto& at = buffers[*ev.request];
    auto it = at.find(*ev.replica);
    if (it == at.end() || it->second.first > ev.tick + cfg.delta) {
      return fail(name, i,
                  describe(*ev.request) + " not buffered at replica " +
                      std::to_string(*ev.replica) + " within delta");
    }
  }
  return pass(name);
}

Verdict check_relay(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg) {
  const std::string name = "relay";
  if (cfg.optimistic) return not_applicable(name, "round starts are not scheduled");
  if (std::none_of(cfg.agents.begin(), cfg.agents.end(), [](const AgentSpec& a) {
        return a.strategy == Strategy::Compliant;
      })) {
    return not_applicable(name, "no compliant relayer");
  }
  const std::size_t n = cfg.agents.size();
  auto stable = stably_funded(trace, cfg);
  auto redeems = first_redeems(trace);
  for (const auto& [req, at] : first_buffers(trace)) {
    if (!std::count(stable.begin(), stable.end(), req.agent)) continue;
    const Tick start = scheduled_round_start(req.round, n, cfg.delta);
    const Tick deadline = start + n * cfg.delta;
    std::optional<std::size_t> early;
    for (const auto& [a, tick_idx] : at) {
      if (tick_idx.first <= start && (!early || tick_idx.second < *early)) early = tick_idx.second;
    }
    if (!early || !funded_through(redeems, req.agent, deadline)) continue;
    for (AssetId a = 0; a < cfg.assets.size(); ++a) {
      auto it = at.find(a);
      if (it == at.end() || it->second.first >= deadline) {
        return fail(name, *early,
                    describe(req) + " not at replica " + std::to_string(a) +
                        " before its round window closed");
      }
    }
  }
  return pass(name);
}

Verdict check_equivocation_skips(const std::vector<TraceEvent>& trace,
                                 const ScenarioConfig& cfg) {
  const std::string name = "equivocation";
  auto logs = indexed_logs(trace);
  for (const auto& [agent, rounds] : issued(trace)) {
    for (const auto& [round, reqs] : rounds) {
      if (reqs.size() < 2) continue;
      for (AssetId a = 0; a < cfg.assets.size(); ++a) {
        const auto& log = logs[a];
        for (std::size_t i = 0; i < log.entries.size(); ++i) {
          if (log.entries[i].round == round && log.entries[i].request) {
            return fail(name, log.events[i],
                        "equivocated round " + std::to_string(round) + " executed at replica " +
                            std::to_string(a));
          }
        }
      }
    }
  }
  return pass(name);
}

Verdict compare_optimistic(const ScenarioConfig& cfg) {
  const std::string name = "optimistic";
  if (!cfg.all_compliant()) return not_applicable(name, "adversarial config");
  ScenarioConfig pess = cfg;
  pess.optimistic = false;
  ScenarioConfig opt = cfg;
  opt.optimistic = true;
  RunResult p = run_scenario(pess);
  RunResult o = run_scenario(opt);
  auto pl = applied_logs(p.trace);
  auto ol = applied_logs(o.trace);
  for (const auto& [asset, log] : pl) {
    const auto& other = ol[asset];
    bool same = log.size() == other.size() &&
                std::equal(log.begin(), log.end(), other.begin(),
                           [](const LogEntry& a, const LogEntry& b) { return a.same_outcome(b); });
    if (!same) {
      return fail(name, o.trace.empty() ? std::nullopt : std::optional<std::size_t>(0),
                  "applied logs differ at replica " + std::to_string(asset));
    }
  }
  const std::size_t r = pl.empty() ? 0 : pl.begin()->second.size();
  if (r >= 2 && cfg.agents.size() >= 3) {
    if (!o.completion || !p.completion || *o.completion >= *p.completion) {
      return fail(name, o.trace.empty() ? std::nullopt
                                        : std::optional<std::size_t>(o.trace.size() - 1),
                  "optimistic run is not faster");
    }
  }
  return pass(name);
}

std::vector<Verdict> check_trace(const std::vector<TraceEvent>& trace, const ScenarioConfig& cfg) {
  return {check_consistency(trace),     check_safety(trace, cfg),
          check_liveness(trace, cfg),   check_fairness(trace, cfg),
          check_timing(trace, cfg),     check_network(trace, cfg),
          check_invariant(trace),       check_delivery(trace, cfg),
          check_relay(trace, cfg),      check_equivocation_skips(trace, cfg)};
}

std::string verdicts_json(const std::vector<Verdict>& verdicts) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) {
    nlohmann::ordered_json j;
    j["property"] = v.property;
    j["outcome"] = to_string(v.outcome);
    if (v.witness) j["witness"] = *v.witness;
    if (!v.detail.empty()) j["detail"] = v.detail;
    out.push_back(j);
  }
  return out.dump(2);
}

}  // namespace xsmr
