#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xsmr/core.hpp"
#include "xsmr/replica.hpp"

namespace xsmr {

enum class Strategy { Compliant, Silent, NonRelayer, Equivocator, Withholder, InvalidFunder };

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(const std::string& s);

struct StrategyParams {
  AssetId target = 0;              // Withholder: the only replica it talks to
  bool relay = false;              // Withholder: relay, but only to the target
  Tick early = 0;                  // Withholder: ticks before a round opens to send
  std::int64_t claim = 1'000'000;  // InvalidFunder: uncovered top-up per asset
};

enum class FundingMode { Exact, Min };

struct ExpectedFunding {
  FundingMode mode = FundingMode::Exact;
  bool halt_on_shortfall = true;
};

// An agent-to-replica call in flight.
struct Message {
  enum class Kind { Initialize, TopUp, Defund, Redeem, Send };
  Kind kind = Kind::Send;
  AgentId sender = 0;
  AssetId replica = 0;
  FundMap fund;
  std::map<AgentId, bool> votes;
  PathSignature ps;
};

using Replicas = std::vector<const Replica*>;

// Scenario facts every agent knows up front.
struct AgentEnv {
  std::vector<AgentId> agents;
  std::vector<AssetId> assets;
  Tick delta = 10;
  bool optimistic = false;
  std::optional<AgentId> leader;
  std::map<AgentId, FundMap> fund;
  std::map<AgentId, FundMap> topup;
  ExpectedFunding expected;
  bool topup_phase = false;  // some agent may top up at delta

  std::size_t n() const { return agents.size(); }
};

std::vector<Message> fe_initialize(AgentId self, const FundMap& fund, const Replicas& reps);
std::vector<Message> fe_top_up(AgentId self, const FundMap& fund, const Replicas& reps);
std::vector<Message> fe_redeem(AgentId self, const Replicas& reps);
std::vector<Message> fe_send(const PathSignature& ps, const std::vector<AssetId>& targets);

// Funding is consistent (an agent funded anywhere is funded everywhere) and
// every funded agent holds its agreed short balances at every replica.
bool verify_accounts(const Replicas& reps, const AgentEnv& env, bool after_topup);

// The leader's vote: replicas disagree about P's funding or balances.
bool defund_vote(const Replicas& reps, AgentId p);

// Extends and forwards every buffered request not yet signed by `self`.
std::vector<Message> relay_step(AgentId self, const Replicas& reps,
                                const SignatureProvider& provider,
                                std::set<Request>& seen,
                                const std::vector<AssetId>& targets);

class AgentRuntime {
 public:
  AgentRuntime(AgentId id, Strategy strategy, StrategyParams params, AgentEnv env,
               const SignatureProvider& provider);

  AgentId id() const { return id_; }
  Strategy strategy() const { return strategy_; }
  bool compliant() const { return strategy_ == Strategy::Compliant; }
  bool halted() const { return halted_; }
  bool quiescent() const;
  const std::string& halt_reason() const { return halt_reason_; }

  std::vector<Message> step(Tick now, const Replicas& reps);

 private:
  bool relays() const;
  std::vector<AssetId> relay_targets() const;
  void front_end(Tick now, const Replicas& reps, std::vector<Message>& out);
  void verify(const Replicas& reps, bool after_topup, std::vector<Message>& out);
  void issue_moves(Tick now, const Replicas& reps, std::vector<Message>& out);
  void issue(const Request& req, const Replicas& reps, std::vector<Message>& out);
  void halt(const Replicas& reps, const std::string& reason, std::vector<Message>& out);

  AgentId id_;
  Strategy strategy_;
  StrategyParams params_;
  AgentEnv env_;
  const SignatureProvider& provider_;
  std::set<Request> seen_;
  std::set<std::uint64_t> issued_;
  bool halted_ = false;
  std::string halt_reason_;
};

}  // namespace xsmr
