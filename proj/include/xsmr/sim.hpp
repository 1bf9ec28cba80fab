#pragma once

#include <map>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "xsmr/agent.hpp"
#include "xsmr/config.hpp"
#include "xsmr/replica.hpp"
#include "xsmr/trace.hpp"

namespace xsmr {

// Delivers every message within [1, delta] ticks; ties go by send order.
class Network {
 public:
  Network(NetworkConfig cfg, Tick delta, std::uint64_t seed);

  // Returns the tick at which the message arrives.
  Tick enqueue(Message msg, Tick now);
  std::vector<Message> take_due(Tick now);
  bool empty() const { return queue_.empty(); }
  std::uint64_t sent() const { return seq_; }

 private:
  struct Item {
    Tick due;
    std::uint64_t seq;
    Message msg;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      return a.due != b.due ? a.due > b.due : a.seq > b.seq;
    }
  };
  Tick delay_for(std::uint64_t seq);

  NetworkConfig cfg_;
  Tick delta_;
  std::mt19937_64 rng_;
  std::uint64_t seq_ = 0;
  std::priority_queue<Item, std::vector<Item>, Later> queue_;
};

using Balances = std::map<AgentId, std::map<AssetId, std::int64_t>>;

struct RunResult {
  std::vector<TraceEvent> trace;
  Balances initial;  // long balances before funding
  Balances final;    // long balances at the end of the run
  std::map<AgentId, std::int64_t> utils;
  std::map<AssetId, std::vector<LogEntry>> logs;
  std::map<AssetId, GameState> states;
  std::optional<Tick> completion;
  Tick end_tick = 0;
  bool cap_hit = false;
  bool proposal_funded = false;
  std::size_t invariant_checks = 0;
  std::size_t invariant_violations = 0;
  std::map<AgentId, std::string> halt_reasons;
};

// Hard stop for a run: the last scheduled round plus two windows of slack.
Tick run_cap(const ScenarioConfig& cfg, std::uint64_t max_rounds);

RunResult run_scenario(const ScenarioConfig& cfg);

}  // namespace xsmr
