#include "xsmr/game.hpp"

#include <algorithm>

namespace xsmr {

std::string Address::str() const { return self ? "self" : std::to_string(agent); }

std::int64_t Accounts::get(Address who, AssetId asset) const {
  auto it = bal_.find({who, asset});
  return it == bal_.end() ? 0 : it->second;
}

void Accounts::set(Address who, AssetId asset, std::int64_t value) {
  if (value == 0) {
    bal_.erase({who, asset});
  } else {
    bal_[{who, asset}] = value;
  }
}

void Accounts::add(Address who, AssetId asset, std::int64_t delta) {
  set(who, asset, get(who, asset) + delta);
}

bool Accounts::transfer(Address from, Address to, AssetId asset, std::int64_t amount) {
  if (amount < 0 || get(from, asset) < amount) return false;
  add(from, asset, -amount);
  add(to, asset, amount);
  return true;
}

std::int64_t Accounts::total(AssetId asset) const {
  std::int64_t sum = 0;
  for (const auto& [key, v] : bal_) {
    if (key.second == asset) sum += v;
  }
  return sum;
}

bool Accounts::any_negative() const {
  return std::any_of(bal_.begin(), bal_.end(), [](const auto& kv) { return kv.second < 0; });
}

bool Accounts::operator==(const Accounts& o) const { return bal_ == o.bal_; }

GameState Machine::initial_state(const Accounts& funded) const {
  GameState s = fresh_vars(funded);
  s.accounts = funded;
  s.round = 1;
  s.started = false;
  s.halted = false;
  return s;
}

std::string Machine::phase(std::uint64_t round) const {
  if (round < 1 || round > phases_.size()) return "done";
  return phases_[round - 1];
}

std::optional<AgentId> Machine::enabled(const GameState& s) const {
  if (is_final(s)) return std::nullopt;
  return turns_[s.round - 1];
}

bool Machine::is_final(const GameState& s) const {
  return s.halted || s.round > turns_.size();
}

bool Machine::admits(const GameState& s, const MoveDescriptor& move) const {
  if (is_final(s)) return false;
  if (move.is_skip()) return true;
  return well_typed(move);
}

GameState Machine::apply(const GameState& s, AgentId sender, const MoveDescriptor& move) const {
  auto names = move_names();
  if (std::find(names.begin(), names.end(), move.name) == names.end()) {
    throw UnknownMove("unknown move " + move.name + " for " + kind());
  }
  GameState next = s;
  if (is_final(next)) return next;
  if (!move.is_skip() && well_typed(move)) effect(next, sender, move);
  ++next.round;
  if (next.round > turns_.size()) next.halted = true;
  if (next.halted) settle(next);
  return next;
}

std::shared_ptr<const Machine> make_machine(const GameConfig& cfg) {
  return std::visit(
      [](const auto& c) -> std::shared_ptr<const Machine> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SwapConfig>) {
          return std::make_shared<SwapMachine>(c);
        } else if constexpr (std::is_same_v<T, DaoConfig>) {
          return std::make_shared<DaoMachine>(c);
        } else {
          return std::make_shared<AuctionMachine>(c);
        }
      },
      cfg);
}

std::int64_t UtilityConfig::value(AgentId agent, AssetId asset) const {
  auto it = valuations.find(agent);
  if (it == valuations.end()) return 1;
  auto jt = it->second.find(asset);
  return jt == it->second.end() ? 1 : jt->second;
}

std::int64_t UtilityConfig::proposal_value(AgentId agent) const {
  auto it = proposal.find(agent);
  return it == proposal.end() ? 0 : it->second;
}

std::int64_t holdings_util(const UtilityConfig& cfg, AgentId agent, const Holdings& before,
                           const Holdings& after, bool proposal_funded) {
  std::set<AssetId> assets;
  for (const auto& [a, v] : before) assets.insert(a);
  for (const auto& [a, v] : after) assets.insert(a);
  std::int64_t u = 0;
  for (AssetId a : assets) {
    auto b = before.count(a) ? before.at(a) : 0;
    auto f = after.count(a) ? after.at(a) : 0;
    u += (f - b) * cfg.value(agent, a);
  }
  if (proposal_funded) u += cfg.proposal_value(agent);
  return u;
}

std::int64_t machine_util(const Machine& machine, const UtilityConfig& cfg, AgentId agent,
                          const GameState& initial, const GameState& final_state) {
  if (!machine.is_final(final_state)) throw NotFinal("utility is defined on final states only");
  Holdings before;
  Holdings after;
  for (const auto& [key, v] : initial.accounts.entries()) {
    if (key.first == Address::of(agent)) before[key.second] = v;
  }
  for (const auto& [key, v] : final_state.accounts.entries()) {
    if (key.first == Address::of(agent)) after[key.second] = v;
  }
  return holdings_util(cfg, agent, before, after, machine.proposal_funded(final_state));
}

}  // namespace xsmr
