#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xsmr/agent.hpp"
#include "xsmr/game.hpp"

namespace xsmr {

// A config problem anchored to a 1-based line of the source text (0 when
// the config was built in code).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct AgentSpec {
  AgentId id = 0;
  Strategy strategy = Strategy::Compliant;
  StrategyParams params;
  std::map<AssetId, std::int64_t> balances;  // long balances
  FundMap fund;
  std::optional<FundMap> topup;
};

enum class NetworkMode { WorstCase, UniformRandom, Scripted };

struct NetworkConfig {
  NetworkMode mode = NetworkMode::WorstCase;
  std::vector<Tick> delays;            // scripted: by message sequence number
  std::optional<Tick> default_delay;   // scripted: beyond the list; delta if unset
};

struct ScenarioConfig {
  std::string name = "scenario";
  GameConfig game = SwapConfig{};
  std::vector<std::string> assets;
  std::vector<AgentSpec> agents;
  Tick delta = 10;
  std::uint64_t seed = 0;
  NetworkConfig network;
  bool optimistic = false;
  std::int64_t premium = 0;
  std::optional<AgentId> leader;
  ExpectedFunding expected;
  UtilityConfig utility;

  std::vector<AgentId> agent_ids() const;
  const AgentSpec* agent(AgentId id) const;
  bool all_compliant() const;
};

// Parses and validates; throws ConfigError.
ScenarioConfig parse_config(const std::string& text);
// Throws ConfigError (line 0) for configs built in code.
void validate_config(const ScenarioConfig& cfg);
std::string config_to_json(const ScenarioConfig& cfg);

const char* to_string(NetworkMode m);

}  // namespace xsmr
