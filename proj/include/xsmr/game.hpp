#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "xsmr/core.hpp"

namespace xsmr {

// Either an agent or the replica/contract itself (Self).
struct Address {
  bool self = false;
  AgentId agent = 0;

  static Address of(AgentId a) { return {false, a}; }
  static Address contract() { return {true, 0}; }

  auto operator<=>(const Address&) const = default;
  bool operator==(const Address&) const = default;
  std::string str() const;
};

class Accounts {
 public:
  using Key = std::pair<Address, AssetId>;

  std::int64_t get(Address who, AssetId asset) const;
  void set(Address who, AssetId asset, std::int64_t value);
  void add(Address who, AssetId asset, std::int64_t delta);
  // Moves `amount` if the source covers it; returns false and leaves the
  // balances untouched otherwise.
  bool transfer(Address from, Address to, AssetId asset, std::int64_t amount);
  std::int64_t total(AssetId asset) const;
  bool any_negative() const;
  const std::map<Key, std::int64_t>& entries() const { return bal_; }

  bool operator==(const Accounts& o) const;

 private:
  std::map<Key, std::int64_t> bal_;
};

struct SwapVars {
  bool alice_yes = false;
  bool bob_yes = false;
  bool all_done = false;
  bool operator==(const SwapVars&) const = default;
};

struct DaoVars {
  std::map<AgentId, std::int64_t> yes_votes;
  std::map<AgentId, std::int64_t> no_votes;
  std::set<AgentId> voted;
  bool proposal_funded = false;
  bool operator==(const DaoVars&) const = default;
};

struct AuctionVars {
  std::map<AgentId, Bytes> sealed;
  std::map<AgentId, std::int64_t> bid;
  std::set<AgentId> settled;
  std::optional<AgentId> winner;
  bool operator==(const AuctionVars&) const = default;
};

struct GameState {
  Accounts accounts;
  std::uint64_t round = 1;  // turn cursor: the next round to resolve
  bool started = false;
  bool halted = false;
  std::variant<SwapVars, DaoVars, AuctionVars> vars;

  bool operator==(const GameState&) const = default;
};

struct SwapConfig {
  AgentId alice = 0;
  AgentId bob = 1;
  AssetId florin = 0;
  AssetId ducat = 1;
  std::int64_t amount = 1;
};

struct DaoVote {
  bool yes = true;
  std::optional<std::int64_t> tokens;  // unset: all tokens held
};

struct DaoConfig {
  AgentId applicant = 0;
  std::vector<AgentId> lps;
  AgentId director = 0;
  AgentId treasury = 0;
  std::int64_t threshold = 0;
  std::int64_t payout = 100;
  AssetId florin = 0;
  AssetId token = 1;
  std::map<AgentId, DaoVote> votes;
};

struct BidPlan {
  std::int64_t bid = 0;
  std::int64_t nonce = 0;
};

struct AuctionConfig {
  AgentId seller = 0;
  std::vector<AgentId> bidders;
  AssetId florin = 0;
  AssetId nft = 1;
  std::int64_t nft_units = 1;
  std::map<AgentId, BidPlan> plans;
};

using GameConfig = std::variant<SwapConfig, DaoConfig, AuctionConfig>;

class UnknownMove : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFinal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The replicated state machine. Turns follow a fixed phase table, so the
// enabled agent of round r does not depend on earlier outcomes.
class Machine {
 public:
  virtual ~Machine() = default;

  virtual std::string kind() const = 0;
  GameState initial_state(const Accounts& funded) const;
  // The machine's own initialization block, run when round 1 opens.
  virtual GameState start(GameState s) const = 0;

  std::uint64_t max_rounds() const { return turns_.size(); }
  const std::vector<AgentId>& turn_order() const { return turns_; }
  std::string phase(std::uint64_t round) const;
  std::optional<AgentId> enabled(const GameState& s) const;
  bool is_final(const GameState& s) const;

  virtual std::vector<std::string> move_names() const = 0;
  // move in moves(s): known name, well-typed arguments, non-final state.
  bool admits(const GameState& s, const MoveDescriptor& move) const;
  GameState apply(const GameState& s, AgentId sender, const MoveDescriptor& move) const;

  // The compliant protocol's move for `agent` at the current turn.
  virtual MoveDescriptor prescribed_move(const GameState& s, AgentId agent) const = 0;
  virtual bool proposal_funded(const GameState&) const { return false; }

 protected:
  Machine(std::vector<AgentId> turns, std::vector<std::string> phases)
      : turns_(std::move(turns)), phases_(std::move(phases)) {}
  virtual bool well_typed(const MoveDescriptor& move) const = 0;
  virtual void effect(GameState& s, AgentId sender, const MoveDescriptor& move) const = 0;
  virtual void settle(GameState&) const {}
  virtual GameState fresh_vars(const Accounts& funded) const = 0;

 private:
  std::vector<AgentId> turns_;
  std::vector<std::string> phases_;
};

class SwapMachine final : public Machine {
 public:
  explicit SwapMachine(SwapConfig cfg);
  std::string kind() const override { return "swap"; }
  GameState start(GameState s) const override;
  std::vector<std::string> move_names() const override;
  MoveDescriptor prescribed_move(const GameState& s, AgentId agent) const override;
  const SwapConfig& config() const { return cfg_; }

 protected:
  bool well_typed(const MoveDescriptor& move) const override;
  void effect(GameState& s, AgentId sender, const MoveDescriptor& move) const override;
  GameState fresh_vars(const Accounts& funded) const override;

 private:
  SwapConfig cfg_;
};

class DaoMachine final : public Machine {
 public:
  explicit DaoMachine(DaoConfig cfg);
  std::string kind() const override { return "dao"; }
  GameState start(GameState s) const override;
  std::vector<std::string> move_names() const override;
  MoveDescriptor prescribed_move(const GameState& s, AgentId agent) const override;
  bool proposal_funded(const GameState& s) const override;
  const DaoConfig& config() const { return cfg_; }

 protected:
  bool well_typed(const MoveDescriptor& move) const override;
  void effect(GameState& s, AgentId sender, const MoveDescriptor& move) const override;
  void settle(GameState& s) const override;
  GameState fresh_vars(const Accounts& funded) const override;

 private:
  DaoConfig cfg_;
};

class AuctionMachine final : public Machine {
 public:
  explicit AuctionMachine(AuctionConfig cfg);
  std::string kind() const override { return "auction"; }
  GameState start(GameState s) const override;
  std::vector<std::string> move_names() const override;
  MoveDescriptor prescribed_move(const GameState& s, AgentId agent) const override;
  const AuctionConfig& config() const { return cfg_; }

 protected:
  bool well_typed(const MoveDescriptor& move) const override;
  void effect(GameState& s, AgentId sender, const MoveDescriptor& move) const override;
  void settle(GameState& s) const override;
  GameState fresh_vars(const Accounts& funded) const override;

 private:
  AuctionConfig cfg_;
};

std::shared_ptr<const Machine> make_machine(const GameConfig& cfg);

// Valuations are in a common numeraire; unlisted assets are worth 1 and an
// unlisted proposal is worth 0.
struct UtilityConfig {
  std::map<AgentId, std::map<AssetId, std::int64_t>> valuations;
  std::map<AgentId, std::int64_t> proposal;

  std::int64_t value(AgentId agent, AssetId asset) const;
  std::int64_t proposal_value(AgentId agent) const;
};

using Holdings = std::map<AssetId, std::int64_t>;

std::int64_t holdings_util(const UtilityConfig& cfg, AgentId agent, const Holdings& before,
                           const Holdings& after, bool proposal_funded);

std::int64_t machine_util(const Machine& machine, const UtilityConfig& cfg, AgentId agent,
                          const GameState& initial, const GameState& final_state);

}  // namespace xsmr
