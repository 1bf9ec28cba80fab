#pragma once

#include <string>
#include <vector>

#include "xsmr/checks.hpp"
#include "xsmr/config.hpp"

namespace xsmr {

enum class Game { Swap, Dao, Auction };

// Demo scenarios. `adversary` replaces one fixed agent: Bob in the swap,
// LP 2 in the DAO, bidder 2 in the auction. InvalidFunder installs a leader.
ScenarioConfig demo_swap(Strategy adversary = Strategy::Compliant);
ScenarioConfig demo_dao(Strategy adversary = Strategy::Compliant);
ScenarioConfig demo_auction(Strategy adversary = Strategy::Compliant);
ScenarioConfig demo(Game game, Strategy adversary = Strategy::Compliant);
AgentId adversary_of(Game game);

// The same scenario with one agent switched to another strategy.
ScenarioConfig with_strategy(ScenarioConfig cfg, AgentId agent, Strategy s,
                             StrategyParams params = {});

// {swap, dao, auction} x {compliant, equivocator, withholder, silent,
// invalid funder + leader} pessimistic, plus the optimistic compliant runs.
std::vector<ScenarioConfig> demo_matrix();

// Seeded variant: uniform random delays drawn from `seed`.
ScenarioConfig reseeded(ScenarioConfig cfg, std::uint64_t seed);

// Auction with a compliant seller and two bidders drawn from {Withholder,
// Equivocator} with seed-derived parameters.
ScenarioConfig relay_scenario(std::uint64_t seed);

struct SuiteReport {
  std::string suite;
  std::size_t runs = 0;
  std::size_t events = 0;
  std::size_t invariant_checks = 0;
  std::vector<Verdict> failures;  // with the scenario name and seed in detail

  bool ok() const { return failures.empty(); }
};

// Named suites: delivery, safety, consistency, timing, optimistic, all.
// `runs` seeds per scenario. Throws std::invalid_argument on unknown names.
SuiteReport run_suite(const std::string& name, std::size_t runs);
std::vector<std::string> suite_names();

std::string report_json(const SuiteReport& report);

}  // namespace xsmr
