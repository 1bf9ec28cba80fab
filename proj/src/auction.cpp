#include <algorithm>

#include "xsmr/crypto.hpp"
#include "xsmr/game.hpp"

namespace xsmr {

namespace {

std::vector<AgentId> sorted(std::vector<AgentId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<AgentId> auction_turns(const AuctionConfig& c) {
  auto b = sorted(c.bidders);
  std::vector<AgentId> t;
  for (int phase = 0; phase < 3; ++phase) t.insert(t.end(), b.begin(), b.end());
  return t;
}

std::vector<std::string> auction_phases(const AuctionConfig& c) {
  std::vector<std::string> p;
  for (const char* name : {"seal", "unseal", "resolve"}) {
    p.insert(p.end(), c.bidders.size(), name);
  }
  return p;
}

}  // namespace

AuctionMachine::AuctionMachine(AuctionConfig cfg)
    : Machine(auction_turns(cfg), auction_phases(cfg)), cfg_(std::move(cfg)) {}

GameState AuctionMachine::fresh_vars(const Accounts&) const {
  GameState s;
  s.vars = AuctionVars{};
  return s;
}

GameState AuctionMachine::start(GameState s) const {
  s.started = true;
  if (!s.accounts.transfer(Address::of(cfg_.seller), Address::contract(), cfg_.nft,
                           cfg_.nft_units)) {
    s.halted = true;
    settle(s);
  }
  return s;
}

std::vector<std::string> AuctionMachine::move_names() const {
  return {"SealedBid", "Unseal", "Resolve", "Skip"};
}

bool AuctionMachine::well_typed(const MoveDescriptor& move) const {
  if (move.name == "SealedBid") {
    return move.args.size() == 1 && std::holds_alternative<Bytes>(move.args[0]);
  }
  if (move.name == "Unseal") {
    return move.args.size() == 2 && std::holds_alternative<std::int64_t>(move.args[0]) &&
           std::holds_alternative<std::int64_t>(move.args[1]);
  }
  return move.name == "Resolve" && move.args.empty();
}

void AuctionMachine::effect(GameState& s, AgentId sender, const MoveDescriptor& move) const {
  auto& v = std::get<AuctionVars>(s.vars);
  if (enabled(s) != sender) return;
  if (std::find(cfg_.bidders.begin(), cfg_.bidders.end(), sender) == cfg_.bidders.end()) return;
  const Address self = Address::contract();
  const Address who = Address::of(sender);

  if (move.name == "SealedBid") {
    v.sealed[sender] = std::get<Bytes>(move.args[0]);
    return;
  }
  if (move.name == "Unseal") {
    std::int64_t b = std::get<std::int64_t>(move.args[0]);
    std::int64_t n = std::get<std::int64_t>(move.args[1]);
    auto it = v.sealed.find(sender);
    if (it == v.sealed.end() || v.bid.count(sender)) return;
    if (bid_commitment(b, n) != it->second) return;
    if (b < 0 || s.accounts.get(who, cfg_.florin) < b) return;
    s.accounts.transfer(who, self, cfg_.florin, b);
    v.bid[sender] = b;
    return;
  }
  // Resolve: only once every unseal turn has passed.
  if (phase(s.round) != "resolve") return;
  auto mine = v.bid.find(sender);
  if (mine == v.bid.end() || v.settled.count(sender)) return;
  bool wins = std::all_of(v.bid.begin(), v.bid.end(), [&](const auto& other) {
    if (other.first == sender) return true;
    return mine->second > other.second ||
           (mine->second == other.second && sender > other.first);
  });
  if (wins) {
    s.accounts.transfer(self, who, cfg_.nft, cfg_.nft_units);
    s.accounts.transfer(self, Address::of(cfg_.seller), cfg_.florin, mine->second);
    v.settled.insert(sender);
    v.winner = sender;
    s.halted = true;
  } else {
    s.accounts.transfer(self, who, cfg_.florin, mine->second);
    v.settled.insert(sender);
  }
}

void AuctionMachine::settle(GameState& s) const {
  auto& v = std::get<AuctionVars>(s.vars);
  const Address self = Address::contract();
  for (const auto& [bidder, amount] : v.bid) {
    if (v.settled.count(bidder)) continue;
    s.accounts.transfer(self, Address::of(bidder), cfg_.florin, amount);
    v.settled.insert(bidder);
  }
  std::int64_t nft_left = s.accounts.get(self, cfg_.nft);
  s.accounts.transfer(self, Address::of(cfg_.seller), cfg_.nft, nft_left);
}

MoveDescriptor AuctionMachine::prescribed_move(const GameState& s, AgentId agent) const {
  auto it = cfg_.plans.find(agent);
  if (it == cfg_.plans.end()) return MoveDescriptor::skip();
  const auto& plan = it->second;
  std::string ph = phase(s.round);
  if (ph == "seal") return {"SealedBid", {Arg{bid_commitment(plan.bid, plan.nonce)}}};
  if (ph == "unseal") return {"Unseal", {Arg{plan.bid}, Arg{plan.nonce}}};
  if (ph == "resolve") return {"Resolve", {}};
  return MoveDescriptor::skip();
}

}  // namespace xsmr
