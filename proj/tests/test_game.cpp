#include <algorithm>

#include "doctest.h"
#include "gen.hpp"
#include "xsmr/crypto.hpp"
#include "xsmr/game.hpp"

using namespace xsmr;
using xsmr::testing::Gen;

namespace {

const Address kSelf = Address::contract();
Address A(AgentId a) { return Address::of(a); }

GameState started(const Machine& m, const Accounts& funded) {
  return m.start(m.initial_state(funded));
}

GameState play(const Machine& m, GameState s, AgentId who, MoveDescriptor mv) {
  return m.apply(s, who, mv);
}

std::map<AssetId, std::int64_t> totals(const Accounts& acc) {
  std::map<AssetId, std::int64_t> t;
  for (const auto& [key, v] : acc.entries()) t[key.second] += v;
  return t;
}

SwapConfig swap_cfg() { return SwapConfig{.alice = 0, .bob = 1, .florin = 0, .ducat = 1, .amount = 1}; }

Accounts swap_funds() {
  Accounts acc;
  acc.set(A(0), 0, 1);
  acc.set(A(1), 1, 1);
  return acc;
}

DaoConfig dao_cfg() {
  DaoConfig c;
  c.applicant = 0;
  c.lps = {1, 2, 3};
  c.director = 4;
  c.treasury = 4;
  c.threshold = 75;
  c.payout = 100;
  c.florin = 0;
  c.token = 1;
  return c;
}

Accounts dao_funds(std::int64_t treasury = 100) {
  Accounts acc;
  for (AgentId lp : {1u, 2u, 3u}) acc.set(A(lp), 1, 50);
  acc.set(A(4), 0, treasury);
  return acc;
}

MoveDescriptor vote_yes(std::int64_t k) { return {"VoteYes", {Arg{k}}}; }
MoveDescriptor sealed(std::int64_t b, std::int64_t n) {
  return {"SealedBid", {Arg{bid_commitment(b, n)}}};
}
MoveDescriptor unseal(std::int64_t b, std::int64_t n) { return {"Unseal", {Arg{b}, Arg{n}}}; }
const MoveDescriptor kResolve{"Resolve", {}};

}  // namespace

TEST_SUITE("game") {
  TEST_CASE("accounts transfer is guarded and zero balances vanish") {
    Accounts acc;
    acc.set(A(0), 0, 5);
    CHECK_FALSE(acc.transfer(A(0), A(1), 0, 6));
    CHECK(acc.get(A(0), 0) == 5);
    CHECK(acc.transfer(A(0), A(1), 0, 5));
    CHECK(acc.entries().size() == 1);
    CHECK(acc.get(A(1), 0) == 5);
    CHECK_FALSE(acc.transfer(A(1), A(0), 0, -1));
  }

  TEST_CASE("swap: two agreements then completion exchange the coins") {
    SwapMachine m(swap_cfg());
    GameState s = started(m, swap_funds());
    CHECK(m.enabled(s) == 0u);
    s = play(m, s, 0, {"Agree", {}});
    CHECK(m.enabled(s) == 1u);
    s = play(m, s, 1, {"Agree", {}});
    s = play(m, s, 0, {"Complete", {}});
    CHECK(m.is_final(s));
    CHECK(s.accounts.get(A(0), 1) == 1);
    CHECK(s.accounts.get(A(1), 0) == 1);
    CHECK(s.accounts.get(A(0), 0) == 0);
    CHECK(s.accounts.get(A(1), 1) == 0);
  }

  TEST_CASE("swap: a skipped agreement leaves the coins in place") {
    SwapMachine m(swap_cfg());
    GameState s = started(m, swap_funds());
    s = play(m, s, 0, {"Agree", {}});
    s = play(m, s, 1, MoveDescriptor::skip());
    s = play(m, s, 0, {"Complete", {}});
    CHECK(m.is_final(s));
    CHECK(s.accounts == swap_funds());
  }

  TEST_CASE("swap: unknown moves throw and final states refuse further moves") {
    SwapMachine m(swap_cfg());
    GameState s = started(m, swap_funds());
    CHECK_THROWS_AS(m.apply(s, 0, {"Bid", {}}), UnknownMove);
    CHECK_FALSE(m.admits(s, {"Agree", {Arg{std::int64_t{1}}}}));
    CHECK(m.admits(s, MoveDescriptor::skip()));
    for (int i = 0; i < 3; ++i) s = play(m, s, m.turn_order()[i], MoveDescriptor::skip());
    CHECK(m.is_final(s));
    CHECK_FALSE(m.admits(s, MoveDescriptor::skip()));
    CHECK(play(m, s, 0, {"Agree", {}}) == s);
  }

  TEST_CASE("swap: utility is defined on final states only") {
    SwapMachine m(swap_cfg());
    UtilityConfig u;
    u.valuations[0][1] = 2;
    GameState init = started(m, swap_funds());
    CHECK_THROWS_AS(machine_util(m, u, 0, init, init), NotFinal);
    GameState s = init;
    s = play(m, s, 0, {"Agree", {}});
    s = play(m, s, 1, {"Agree", {}});
    s = play(m, s, 0, {"Complete", {}});
    CHECK(machine_util(m, u, 0, init, s) == 1);
    CHECK(machine_util(m, u, 1, init, s) == 0);
  }

  TEST_CASE("dao: enough yes votes pay the applicant") {
    DaoMachine m(dao_cfg());
    GameState s = started(m, dao_funds());
    CHECK(s.accounts.get(kSelf, 0) == 100);
    s = play(m, s, 1, vote_yes(50));
    s = play(m, s, 2, vote_yes(50));
    s = play(m, s, 3, MoveDescriptor::skip());
    CHECK_FALSE(m.is_final(s));
    s = play(m, s, 4, kResolve);
    CHECK(m.is_final(s));
    CHECK(m.proposal_funded(s));
    CHECK(s.accounts.get(A(0), 0) == 100);
    CHECK(s.accounts.get(kSelf, 0) == 0);
  }

  TEST_CASE("dao: a failed vote returns the treasury") {
    DaoMachine m(dao_cfg());
    GameState s = started(m, dao_funds(120));
    s = play(m, s, 1, vote_yes(50));
    s = play(m, s, 2, {"VoteNo", {Arg{std::int64_t{50}}}});
    s = play(m, s, 3, vote_yes(20));
    s = play(m, s, 4, kResolve);
    CHECK_FALSE(m.proposal_funded(s));
    CHECK(s.accounts.get(A(4), 0) == 120);
    CHECK(s.accounts.get(A(0), 0) == 0);
  }

  TEST_CASE("dao: an underfunded treasury halts at start") {
    DaoMachine m(dao_cfg());
    GameState s = started(m, dao_funds(99));
    CHECK(m.is_final(s));
    CHECK(s.accounts.get(A(4), 0) == 99);
  }

  TEST_CASE("dao: over-voting is ignored and empty voters skip") {
    DaoMachine m(dao_cfg());
    GameState s = started(m, dao_funds());
    s = play(m, s, 1, vote_yes(51));
    CHECK(std::get<DaoVars>(s.vars).yes_votes.empty());
    Accounts broke = dao_funds();
    broke.set(A(2), 1, 0);
    GameState t = started(m, broke);
    t = play(m, t, 1, vote_yes(50));
    CHECK(m.prescribed_move(t, 2) == MoveDescriptor::skip());
    CHECK(m.prescribed_move(s, 2) == vote_yes(50));
  }

  TEST_CASE("property: dao outcome matches the vote-count oracle") {
    Gen g(11);
    DaoMachine m(dao_cfg());
    for (int i = 0; i < 500; ++i) {
      GameState s = started(m, dao_funds());
      std::int64_t yes = 0;
      for (AgentId lp : {1u, 2u, 3u}) {
        std::int64_t k = g.range(-5, 60);
        bool y = g.coin();
        s = play(m, s, lp, {y ? "VoteYes" : "VoteNo", {Arg{k}}});
        if (y && k >= 0 && k <= 50) yes += k;
      }
      s = play(m, s, 4, kResolve);
      CHECK(m.proposal_funded(s) == (yes >= 75));
      CHECK(s.accounts.get(A(0), 0) == (yes >= 75 ? 100 : 0));
    }
  }

  TEST_CASE("auction: a sealed bid opens only with its own value and nonce") {
    AuctionConfig c{.seller = 0, .bidders = {1, 2}, .florin = 0, .nft = 1, .nft_units = 1};
    AuctionMachine m(c);
    Accounts acc;
    acc.set(A(0), 1, 1);
    acc.set(A(1), 0, 100);
    acc.set(A(2), 0, 100);
    GameState s = started(m, acc);
    s = play(m, s, 1, sealed(50, 7));
    s = play(m, s, 2, sealed(30, 11));
    // Bidder 1's unseal turn.
    CHECK(play(m, s, 1, unseal(50, 8)).accounts == s.accounts);
    CHECK(std::get<AuctionVars>(play(m, s, 1, unseal(50, 8)).vars).bid.empty());
    CHECK(std::get<AuctionVars>(play(m, s, 1, unseal(30, 11)).vars).bid.empty());
    GameState ok = play(m, s, 1, unseal(50, 7));
    CHECK(std::get<AuctionVars>(ok.vars).bid.at(1) == 50);
    CHECK(ok.accounts.get(kSelf, 0) == 50);
  }

  TEST_CASE("property: random openings never match a foreign commitment") {
    AuctionConfig c{.seller = 0, .bidders = {1, 2}, .florin = 0, .nft = 1, .nft_units = 1};
    AuctionMachine m(c);
    Accounts acc;
    acc.set(A(0), 1, 1);
    acc.set(A(1), 0, 1000);
    acc.set(A(2), 0, 1000);
    GameState s = started(m, acc);
    s = play(m, s, 1, sealed(500, 123456));
    s = play(m, s, 2, sealed(300, 654321));
    Gen g(12);
    int opened = 0;
    for (int i = 0; i < 10000; ++i) {
      std::int64_t b = g.range(0, 1000);
      std::int64_t n = static_cast<std::int64_t>(g.u64() >> 1);
      if (b == 500 && n == 123456) continue;
      GameState t = play(m, s, 1, unseal(b, n));
      if (!std::get<AuctionVars>(t.vars).bid.empty()) ++opened;
    }
    CHECK(opened == 0);
  }

  TEST_CASE("auction: resolve before the resolve phase is a no-op") {
    AuctionConfig c{.seller = 0, .bidders = {1, 2}, .florin = 0, .nft = 1, .nft_units = 1};
    AuctionMachine m(c);
    Accounts acc;
    acc.set(A(0), 1, 1);
    acc.set(A(1), 0, 100);
    GameState s = started(m, acc);
    GameState t = play(m, s, 1, kResolve);
    CHECK(t.accounts == s.accounts);
    CHECK(t.vars == s.vars);
  }

  TEST_CASE("auction: with no bids the seller gets the item back") {
    AuctionConfig c{.seller = 0, .bidders = {1, 2}, .florin = 0, .nft = 1, .nft_units = 1};
    AuctionMachine m(c);
    Accounts acc;
    acc.set(A(0), 1, 1);
    GameState s = started(m, acc);
    CHECK(s.accounts.get(kSelf, 1) == 1);
    while (!m.is_final(s)) s = play(m, s, *m.enabled(s), MoveDescriptor::skip());
    CHECK(s.accounts.get(A(0), 1) == 1);
    CHECK(s.accounts.get(kSelf, 1) == 0);
  }

  TEST_CASE("property: auction winner matches a brute-force oracle") {
    Gen g(13);
    for (int trial = 0; trial < 400; ++trial) {
      auto k = static_cast<AgentId>(g.range(2, 4));
      AuctionConfig c{.seller = 0, .florin = 0, .nft = 1, .nft_units = 1};
      Accounts acc;
      acc.set(A(0), 1, 1);
      std::map<AgentId, std::int64_t> bid;
      std::map<AgentId, std::int64_t> bal;
      for (AgentId b = 1; b <= k; ++b) {
        c.bidders.push_back(b);
        bal[b] = g.range(0, 100);
        bid[b] = g.range(0, 120);
        acc.set(A(b), 0, bal[b]);
      }
      AuctionMachine m(c);
      GameState s = started(m, acc);
      for (AgentId b = 1; b <= k; ++b) s = play(m, s, b, sealed(bid[b], b));
      for (AgentId b = 1; b <= k; ++b) s = play(m, s, b, unseal(bid[b], b));
      while (!m.is_final(s)) s = play(m, s, *m.enabled(s), kResolve);

      std::optional<AgentId> winner;
      for (AgentId b = 1; b <= k; ++b) {
        if (bid[b] > bal[b]) continue;
        if (!winner || bid[b] > bid[*winner] || (bid[b] == bid[*winner] && b > *winner)) {
          winner = b;
        }
      }
      CHECK(std::get<AuctionVars>(s.vars).winner == winner);
      for (AgentId b = 1; b <= k; ++b) {
        bool won = winner == b;
        CHECK(s.accounts.get(A(b), 1) == (won ? 1 : 0));
        CHECK(s.accounts.get(A(b), 0) == bal[b] - (won ? bid[b] : 0));
      }
      CHECK(s.accounts.get(A(0), 0) == (winner ? bid[*winner] : 0));
      CHECK(s.accounts.get(A(0), 1) == (winner ? 0 : 1));
      CHECK(totals(s.accounts) == totals(acc));
    }
  }

  TEST_CASE("auction: the winner's resolve closes the game") {
    AuctionConfig c{.seller = 0, .bidders = {1, 2}, .florin = 0, .nft = 1, .nft_units = 1};
    AuctionMachine m(c);
    CHECK(m.max_rounds() == 6);
    Accounts acc;
    acc.set(A(0), 1, 1);
    acc.set(A(1), 0, 60);
    acc.set(A(2), 0, 40);
    GameState s = started(m, acc);
    s = play(m, s, 1, sealed(50, 7));
    s = play(m, s, 2, sealed(30, 11));
    s = play(m, s, 1, unseal(50, 7));
    s = play(m, s, 2, unseal(30, 11));
    s = play(m, s, 1, kResolve);
    CHECK(m.is_final(s));
    CHECK(s.round == 6);
    CHECK(s.accounts.get(A(2), 0) == 40);
    CHECK(s.accounts.get(A(0), 0) == 50);
  }

  TEST_CASE("property: random play conserves every asset") {
    Gen g(14);
    std::vector<std::shared_ptr<const Machine>> machines = {
        std::make_shared<SwapMachine>(swap_cfg()), std::make_shared<DaoMachine>(dao_cfg()),
        std::make_shared<AuctionMachine>(
            AuctionConfig{.seller = 0, .bidders = {1, 2}, .florin = 0, .nft = 1, .nft_units = 1})};
    for (int trial = 0; trial < 300; ++trial) {
      const Machine& m = *machines[static_cast<std::size_t>(g.range(0, 2))];
      Accounts acc;
      for (AgentId a = 0; a < 5; ++a) {
        for (AssetId x = 0; x < 2; ++x) acc.set(A(a), x, g.range(0, 150));
      }
      GameState s = started(m, acc);
      auto names = m.move_names();
      while (!m.is_final(s)) {
        MoveDescriptor mv{names[static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(names.size()) - 1))], {}};
        if (mv.name == "VoteYes" || mv.name == "VoteNo") mv.args = {Arg{g.range(-3, 160)}};
        if (mv.name == "SealedBid") mv.args = {Arg{bid_commitment(g.range(0, 3), 0)}};
        if (mv.name == "Unseal") mv.args = {Arg{g.range(0, 3)}, Arg{std::int64_t{0}}};
        AgentId who = g.coin() ? *m.enabled(s) : static_cast<AgentId>(g.range(0, 4));
        s = m.apply(s, who, mv);
        CHECK_FALSE(s.accounts.any_negative());
      }
      CHECK(totals(s.accounts) == totals(acc));
    }
  }

  TEST_CASE("holdings utility prices deltas and the proposal") {
    UtilityConfig u;
    u.valuations[3][1] = 5;
    u.proposal[3] = 7;
    Holdings before{{0, 10}, {1, 1}};
    Holdings after{{0, 4}, {1, 3}};
    CHECK(holdings_util(u, 3, before, after, false) == -6 + 10);
    CHECK(holdings_util(u, 3, before, after, true) == -6 + 10 + 7);
    CHECK(holdings_util(u, 9, before, after, true) == -6 + 2);
  }
}
