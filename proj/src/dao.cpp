#include <algorithm>

#include "xsmr/game.hpp"

namespace xsmr {

namespace {

std::vector<AgentId> dao_turns(const DaoConfig& c) {
  std::vector<AgentId> t = c.lps;
  std::sort(t.begin(), t.end());
  t.push_back(c.director);
  return t;
}

std::vector<std::string> dao_phases(const DaoConfig& c) {
  std::vector<std::string> p(c.lps.size(), "vote");
  p.push_back("resolve");
  return p;
}

}  // namespace

DaoMachine::DaoMachine(DaoConfig cfg) : Machine(dao_turns(cfg), dao_phases(cfg)), cfg_(cfg) {}

GameState DaoMachine::fresh_vars(const Accounts&) const {
  GameState s;
  s.vars = DaoVars{};
  return s;
}

GameState DaoMachine::start(GameState s) const {
  s.started = true;
  Address treasury = Address::of(cfg_.treasury);
  s.accounts.transfer(treasury, Address::contract(), cfg_.florin,
                      s.accounts.get(treasury, cfg_.florin));
  if (s.accounts.get(Address::contract(), cfg_.florin) < cfg_.payout) {
    s.halted = true;
    settle(s);
  }
  return s;
}

std::vector<std::string> DaoMachine::move_names() const {
  return {"VoteYes", "VoteNo", "Resolve", "Skip"};
}

bool DaoMachine::well_typed(const MoveDescriptor& move) const {
  if (move.name == "VoteYes" || move.name == "VoteNo") {
    return move.args.size() == 1 && std::holds_alternative<std::int64_t>(move.args[0]);
  }
  return move.name == "Resolve" && move.args.empty();
}

void DaoMachine::effect(GameState& s, AgentId sender, const MoveDescriptor& move) const {
  auto& v = std::get<DaoVars>(s.vars);
  if (enabled(s) != sender) return;
  if (move.name == "VoteYes" || move.name == "VoteNo") {
    if (std::find(cfg_.lps.begin(), cfg_.lps.end(), sender) == cfg_.lps.end()) return;
    std::int64_t k = std::get<std::int64_t>(move.args[0]);
    if (k < 0 || s.accounts.get(Address::of(sender), cfg_.token) < k) return;
    (move.name == "VoteYes" ? v.yes_votes : v.no_votes)[sender] = k;
    v.voted.insert(sender);
    return;
  }
  // Resolve
  if (sender != cfg_.director) return;
  std::int64_t yes = 0;
  for (const auto& [lp, k] : v.yes_votes) yes += k;
  if (yes >= cfg_.threshold &&
      s.accounts.transfer(Address::contract(), Address::of(cfg_.applicant), cfg_.florin,
                          cfg_.payout)) {
    v.proposal_funded = true;
  }
  s.halted = true;
}

void DaoMachine::settle(GameState& s) const {
  std::int64_t left = s.accounts.get(Address::contract(), cfg_.florin);
  s.accounts.transfer(Address::contract(), Address::of(cfg_.treasury), cfg_.florin, left);
}

MoveDescriptor DaoMachine::prescribed_move(const GameState& s, AgentId agent) const {
  if (phase(s.round) == "resolve") return {"Resolve", {}};
  if (phase(s.round) != "vote") return MoveDescriptor::skip();
  DaoVote plan;
  if (auto it = cfg_.votes.find(agent); it != cfg_.votes.end()) plan = it->second;
  std::int64_t held = s.accounts.get(Address::of(agent), cfg_.token);
  std::int64_t k = plan.tokens.value_or(held);
  if (k <= 0 || k > held) return MoveDescriptor::skip();
  return {plan.yes ? "VoteYes" : "VoteNo", {Arg{k}}};
}

bool DaoMachine::proposal_funded(const GameState& s) const {
  return std::get<DaoVars>(s.vars).proposal_funded;
}

}  // namespace xsmr
