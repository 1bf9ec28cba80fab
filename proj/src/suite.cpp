#include "xsmr/suite.hpp"

#include <functional>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "xsmr/sim.hpp"

namespace xsmr {

namespace {

AgentSpec agent(AgentId id, std::map<AssetId, std::int64_t> balances, FundMap fund) {
  AgentSpec a;
  a.id = id;
  a.balances = std::move(balances);
  a.fund = std::move(fund);
  return a;
}

const char* strategy_suffix(Strategy s) { return to_string(s); }

ScenarioConfig finish(ScenarioConfig cfg, const std::string& game, Strategy adversary,
                      AgentId target, AgentId leader) {
  cfg.name = game + "_" + strategy_suffix(adversary);
  cfg = with_strategy(std::move(cfg), target, adversary);
  if (adversary == Strategy::InvalidFunder) cfg.leader = leader;
  return cfg;
}

}  // namespace

ScenarioConfig with_strategy(ScenarioConfig cfg, AgentId agent_id, Strategy s,
                             StrategyParams params) {
  for (auto& a : cfg.agents) {
    if (a.id == agent_id) {
      a.strategy = s;
      a.params = params;
    }
  }
  return cfg;
}

ScenarioConfig demo_swap(Strategy adversary) {
  ScenarioConfig cfg;
  cfg.assets = {"florin", "ducat"};
  cfg.game = SwapConfig{.alice = 0, .bob = 1, .florin = 0, .ducat = 1, .amount = 1};
  cfg.agents = {agent(0, {{0, 10}, {1, 5}}, {{0, 1}}), agent(1, {{0, 5}, {1, 10}}, {{1, 1}})};
  cfg.premium = 1;
  cfg.utility.valuations = {{0, {{1, 2}}}, {1, {{0, 2}}}};
  return finish(cfg, "swap", adversary, 1, 0);
}

ScenarioConfig demo_dao(Strategy adversary) {
  ScenarioConfig cfg;
  cfg.assets = {"florin", "token"};
  DaoConfig g;
  g.applicant = 0;
  g.lps = {1, 2, 3};
  g.director = 4;
  g.treasury = 4;
  g.threshold = 75;
  g.payout = 100;
  g.florin = 0;
  g.token = 1;
  cfg.game = g;
  cfg.agents = {agent(0, {{0, 5}, {1, 1}}, {})};
  for (AgentId lp : g.lps) cfg.agents.push_back(agent(lp, {{0, 5}, {1, 51}}, {{1, 50}}));
  cfg.agents.push_back(agent(4, {{0, 200}, {1, 1}}, {{0, 100}}));
  cfg.premium = 1;
  cfg.expected.mode = FundingMode::Min;
  cfg.utility.proposal = {{1, 1}, {2, 1}, {3, 1}, {4, 200}};
  return finish(cfg, "dao", adversary, 2, 4);
}

ScenarioConfig demo_auction(Strategy adversary) {
  ScenarioConfig cfg;
  cfg.assets = {"florin", "nft"};
  AuctionConfig g;
  g.seller = 0;
  g.bidders = {1, 2};
  g.florin = 0;
  g.nft = 1;
  g.nft_units = 1;
  g.plans = {{1, {50, 7}}, {2, {30, 11}}};
  cfg.game = g;
  cfg.agents = {agent(0, {{0, 5}, {1, 2}}, {{1, 1}}), agent(1, {{0, 100}, {1, 1}}, {{0, 60}}),
                agent(2, {{0, 100}, {1, 1}}, {{0, 40}})};
  cfg.premium = 1;
  cfg.expected.mode = FundingMode::Min;
  cfg.utility.valuations = {{0, {{1, 20}}}, {1, {{1, 80}}}, {2, {{1, 40}}}};
  return finish(cfg, "auction", adversary, 2, 0);
}

ScenarioConfig demo(Game game, Strategy adversary) {
  switch (game) {
    case Game::Swap:
      return demo_swap(adversary);
    case Game::Dao:
      return demo_dao(adversary);
    case Game::Auction:
      return demo_auction(adversary);
  }
  return demo_swap(adversary);
}

AgentId adversary_of(Game game) {
  switch (game) {
    case Game::Swap:
      return 1;
    case Game::Dao:
      return 2;
    case Game::Auction:
      return 2;
  }
  return 1;
}

std::vector<ScenarioConfig> demo_matrix() {
  std::vector<ScenarioConfig> out;
  const Strategy kinds[] = {Strategy::Compliant, Strategy::Equivocator, Strategy::Withholder,
                            Strategy::Silent, Strategy::InvalidFunder};
  for (Game g : {Game::Swap, Game::Dao, Game::Auction}) {
    for (Strategy s : kinds) out.push_back(demo(g, s));
  }
  for (Game g : {Game::Swap, Game::Dao, Game::Auction}) {
    ScenarioConfig cfg = demo(g);
    cfg.optimistic = true;
    cfg.name += "_optimistic";
    out.push_back(cfg);
  }
  return out;
}

ScenarioConfig reseeded(ScenarioConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.network.mode = NetworkMode::UniformRandom;
  return cfg;
}

ScenarioConfig relay_scenario(std::uint64_t seed) {
  ScenarioConfig cfg = demo_auction();
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  const Tick window = cfg.agents.size() * cfg.delta;
  for (AgentId b : {1u, 2u}) {
    if (rng() % 2 == 0) {
      StrategyParams p;
      p.target = static_cast<AssetId>(rng() % cfg.assets.size());
      p.relay = rng() % 2 == 0;
      p.early = rng() % (window + 1);
      cfg = with_strategy(cfg, b, Strategy::Withholder, p);
    } else {
      cfg = with_strategy(cfg, b, Strategy::Equivocator);
    }
  }
  cfg.name = "auction_relay";
  return cfg;
}

namespace {

using Check = std::function<std::vector<Verdict>(const RunResult&, const ScenarioConfig&)>;

void record(SuiteReport& rep, const ScenarioConfig& cfg, const std::vector<Verdict>& verdicts) {
  for (auto v : verdicts) {
    if (v.ok()) continue;
    v.detail = cfg.name + " seed " + std::to_string(cfg.seed) + ": " + v.detail;
    rep.failures.push_back(v);
  }
}

void sweep(SuiteReport& rep, const std::vector<ScenarioConfig>& base, std::size_t runs,
           const Check& check) {
  for (const auto& b : base) {
    for (std::size_t s = 0; s < runs; ++s) {
      ScenarioConfig cfg = reseeded(b, s);
      RunResult res = run_scenario(cfg);
      ++rep.runs;
      rep.events += res.trace.size();
      rep.invariant_checks += res.invariant_checks;
      auto verdicts = check(res, cfg);
      if (res.cap_hit) verdicts.push_back(fail("termination", res.trace.size() - 1, "cap hit"));
      record(rep, cfg, verdicts);
    }
  }
}

void delivery(SuiteReport& rep, std::size_t runs) {
  ScenarioConfig nr = demo_auction(Strategy::NonRelayer);
  sweep(rep, {nr}, runs, [](const RunResult& r, const ScenarioConfig& c) {
    return std::vector<Verdict>{check_delivery(r.trace, c), check_network(r.trace, c)};
  });
  for (std::size_t s = 0; s < runs; ++s) {
    ScenarioConfig cfg = reseeded(relay_scenario(s), s);
    RunResult res = run_scenario(cfg);
    ++rep.runs;
    rep.events += res.trace.size();
    rep.invariant_checks += res.invariant_checks;
    record(rep, cfg, {check_relay(res.trace, cfg), check_timing(res.trace, cfg),
                      check_consistency(res.trace), check_safety(res.trace, cfg)});
  }
}

void optimistic(SuiteReport& rep, std::size_t runs) {
  for (Game g : {Game::Swap, Game::Dao, Game::Auction}) {
    for (std::size_t s = 0; s < runs; ++s) {
      ScenarioConfig cfg = reseeded(demo(g), s);
      ++rep.runs;
      record(rep, cfg, {compare_optimistic(cfg)});
    }
  }
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"delivery", "safety", "consistency", "timing", "optimistic", "all"};
}

SuiteReport run_suite(const std::string& name, std::size_t runs) {
  SuiteReport rep;
  rep.suite = name;
  const bool all = name == "all";
  bool known = all;
  auto matrix = demo_matrix();
  if (all || name == "delivery") {
    known = true;
    delivery(rep, runs);
  }
  if (all || name == "safety") {
    known = true;
    sweep(rep, matrix, runs, [](const RunResult& r, const ScenarioConfig& c) {
      return std::vector<Verdict>{check_safety(r.trace, c), check_liveness(r.trace, c),
                                  check_fairness(r.trace, c), check_invariant(r.trace)};
    });
  }
  if (all || name == "consistency") {
    known = true;
    sweep(rep, matrix, runs, [](const RunResult& r, const ScenarioConfig& c) {
      return std::vector<Verdict>{check_consistency(r.trace), check_equivocation_skips(r.trace, c)};
    });
  }
  if (all || name == "timing") {
    known = true;
    sweep(rep, matrix, runs, [](const RunResult& r, const ScenarioConfig& c) {
      return std::vector<Verdict>{check_timing(r.trace, c), check_network(r.trace, c)};
    });
  }
  if (all || name == "optimistic") {
    known = true;
    optimistic(rep, runs);
  }
  if (!known) throw std::invalid_argument("unknown suite " + name);
  return rep;
}

std::string report_json(const SuiteReport& report) {
  nlohmann::ordered_json j;
  j["suite"] = report.suite;
  j["runs"] = report.runs;
  j["events"] = report.events;
  j["invariant_checks"] = report.invariant_checks;
  j["passed"] = report.ok();
  j["failures"] = nlohmann::ordered_json::parse(verdicts_json(report.failures));
  return j.dump(2);
}

}  // namespace xsmr
