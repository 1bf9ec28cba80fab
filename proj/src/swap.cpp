#include <algorithm>

#include "xsmr/game.hpp"

namespace xsmr {

namespace {

std::vector<AgentId> swap_turns(const SwapConfig& c) {
  AgentId first = std::min(c.alice, c.bob);
  AgentId second = std::max(c.alice, c.bob);
  return {first, second, first};
}

}  // namespace

SwapMachine::SwapMachine(SwapConfig cfg)
    : Machine(swap_turns(cfg), {"agree", "agree", "complete"}), cfg_(cfg) {}

GameState SwapMachine::fresh_vars(const Accounts&) const {
  GameState s;
  s.vars = SwapVars{};
  return s;
}

GameState SwapMachine::start(GameState s) const {
  s.started = true;
  return s;
}

std::vector<std::string> SwapMachine::move_names() const {
  return {"Agree", "Complete", "Skip"};
}

bool SwapMachine::well_typed(const MoveDescriptor& move) const {
  return (move.name == "Agree" || move.name == "Complete") && move.args.empty();
}

void SwapMachine::effect(GameState& s, AgentId sender, const MoveDescriptor& move) const {
  auto& v = std::get<SwapVars>(s.vars);
  if (move.name == "Agree") {
    if (sender == cfg_.alice && s.accounts.get(Address::of(cfg_.alice), cfg_.florin) >= cfg_.amount) {
      v.alice_yes = true;
    } else if (sender == cfg_.bob &&
               s.accounts.get(Address::of(cfg_.bob), cfg_.ducat) >= cfg_.amount) {
      v.bob_yes = true;
    }
    return;
  }
  // Complete
  if (!v.all_done) {
    if (v.alice_yes && v.bob_yes) {
      Address alice = Address::of(cfg_.alice);
      Address bob = Address::of(cfg_.bob);
      if (s.accounts.get(alice, cfg_.florin) >= cfg_.amount &&
          s.accounts.get(bob, cfg_.ducat) >= cfg_.amount) {
        s.accounts.transfer(alice, bob, cfg_.florin, cfg_.amount);
        s.accounts.transfer(bob, alice, cfg_.ducat, cfg_.amount);
      }
    }
    v.all_done = true;
  }
  s.halted = true;
}

MoveDescriptor SwapMachine::prescribed_move(const GameState& s, AgentId) const {
  if (phase(s.round) == "agree") return {"Agree", {}};
  if (phase(s.round) == "complete") return {"Complete", {}};
  return MoveDescriptor::skip();
}

}  // namespace xsmr
