#include <algorithm>

#include "doctest.h"
#include "gen.hpp"
#include "xsmr/replica.hpp"

using namespace xsmr;
using xsmr::testing::Gen;

namespace {

constexpr Tick kDelta = 10;

struct Fixture {
  std::shared_ptr<const SignatureProvider> provider = std::make_shared<KeyedHashProvider>(7);
  std::vector<TraceEvent> events;

  Replica make(std::vector<AgentId> agents, std::int64_t premium = 0, bool optimistic = false,
               std::optional<AgentId> leader = std::nullopt, AssetId asset = 0) {
    ReplicaParams p;
    p.asset = asset;
    p.agents = agents;
    p.assets = {0, 1};
    p.delta = kDelta;
    p.premium = premium;
    p.optimistic = optimistic;
    p.leader = leader;
    std::map<AgentId, std::int64_t> longs;
    for (AgentId a : agents) longs[a] = 100;
    auto machine = std::make_shared<SwapMachine>(SwapConfig{});
    return Replica(p, machine, provider, longs, [this](const TraceEvent& e) { events.push_back(e); });
  }

  PathSignature sign(AgentId a, MoveDescriptor mv, std::uint64_t round) const {
    return sign_request(*provider, a, Request{a, std::move(mv), round});
  }

  std::size_t count(EventKind k, const std::string& detail = "") const {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [&](const auto& e) {
      return e.kind == k && (detail.empty() || e.detail == detail);
    }));
  }
};

void fund_both(Replica& r, Tick now = 0) {
  REQUIRE(r.initialize(0, {{0, 1}}, now));
  REQUIRE(r.initialize(1, {{1, 1}}, now));
}

void tick_to(Replica& r, Tick from, Tick to) {
  for (Tick t = from; t <= to; ++t) r.deliver(t);
}

const MoveDescriptor kAgree{"Agree", {}};
const MoveDescriptor kComplete{"Complete", {}};

}  // namespace

TEST_SUITE("replica") {
  TEST_CASE("initialize escrows fund plus premium and seeds deposits") {
    Fixture f;
    Replica r = f.make({0, 1}, 2);
    CHECK(r.initialize(0, {{0, 3}, {1, 4}}, 5));
    CHECK(r.funded(0));
    CHECK(r.long_balance(Address::of(0)) == 95);
    CHECK(r.long_balance(Address::contract()) == 5);
    CHECK(r.short_balance(0, 0) == 3);
    CHECK(r.short_balance(0, 1) == 4);
    CHECK(r.deposit(0, 0) == 2);
    CHECK(r.deposit(0, 1) == 2);
    CHECK(r.invariant_holds());
  }

  TEST_CASE("initialize rejects late, repeated, unknown and unaffordable funding") {
    Fixture f;
    Replica r = f.make({0, 1, 2});
    CHECK_FALSE(r.initialize(0, {{0, 1}}, kDelta + 1));
    CHECK(r.initialize(0, {{0, 1}}, kDelta));
    CHECK_FALSE(r.initialize(0, {{0, 1}}, kDelta));
    CHECK_FALSE(r.initialize(9, {{0, 1}}, 0));
    CHECK_FALSE(r.initialize(1, {{0, 101}}, 0));
    CHECK_FALSE(r.initialize(2, {{1, -1}}, 0));
    CHECK(f.count(EventKind::Fund, "rejected") == 3);
    CHECK(f.count(EventKind::Fund, "failed") == 2);
    CHECK_FALSE(r.funded(1));
  }

  TEST_CASE("send drops invalid, stale, unfunded and duplicate requests") {
    Fixture f;
    Replica r = f.make({0, 1, 2});
    REQUIRE(r.initialize(0, {{0, 1}}, 0));
    REQUIRE(r.initialize(1, {{1, 1}}, 0));
    const Tick st = *r.start_time(1);
    CHECK(st == 40);
    PathSignature ok = f.sign(0, kAgree, 1);
    CHECK(r.send(ok, st));
    CHECK_FALSE(r.send(ok, st + 1));
    CHECK_FALSE(r.send(f.sign(2, kAgree, 1), st));
    PathSignature bad = f.sign(0, kComplete, 1);
    bad.sigs[0][3] ^= 0x10;
    CHECK_FALSE(r.send(bad, st));
    CHECK_FALSE(r.send(f.sign(0, kComplete, 1), st + kDelta + 1));
    CHECK(r.send(extend_path(*f.provider, 1, f.sign(0, kComplete, 1)), st + kDelta + 1));
    PathSignature foreign = f.sign(0, MoveDescriptor::skip(), 1);
    foreign.path[0] = 9;
    CHECK_FALSE(r.send(foreign, st));
    CHECK(f.count(EventKind::Buffer) == 2);
  }

  TEST_CASE("pessimistic execution happens exactly after the acceptance window") {
    Fixture f;
    Replica r = f.make({0, 1});
    fund_both(r);
    const Tick st = *r.start_time(1);
    CHECK(st == 30);
    REQUIRE(r.send(f.sign(0, kAgree, 1), st));
    tick_to(r, 0, st + 2 * kDelta);
    CHECK(r.log().empty());
    r.deliver(st + 2 * kDelta + 1);
    REQUIRE(r.log().size() == 1);
    CHECK(r.log()[0].request->move == kAgree);
    CHECK(r.log()[0].tick == st + 2 * kDelta + 1);
    CHECK(r.start_time(2) == st + 2 * kDelta);
  }

  TEST_CASE("a silent turn times out and slashes the mover's deposits") {
    Fixture f;
    Replica r = f.make({0, 1}, 1);
    fund_both(r);
    REQUIRE(r.send(f.sign(0, kAgree, 1), 30));
    tick_to(r, 0, 71);
    REQUIRE(r.log().size() == 2);
    CHECK_FALSE(r.log()[1].request.has_value());
    CHECK(f.count(EventKind::Skip, "timeout") == 1);
    CHECK(f.count(EventKind::Slash) == 1);
    CHECK(r.deposit(1, 0) == 0);
    CHECK(r.deposit(1, 1) == 0);
    CHECK(r.short_balance(0, 0) == 2);
    CHECK(r.short_balance(0, 1) == 1);
    CHECK(r.invariant_holds());
  }

  TEST_CASE("two admissible requests for one turn resolve to a conflict skip") {
    Fixture f;
    Replica r = f.make({0, 1});
    fund_both(r);
    REQUIRE(r.send(f.sign(0, kAgree, 1), 30));
    REQUIRE(r.send(f.sign(0, kComplete, 1), 31));
    tick_to(r, 0, 51);
    REQUIRE(r.log().size() == 1);
    CHECK_FALSE(r.log()[0].request.has_value());
    CHECK(f.count(EventKind::Skip, "conflict") == 1);
  }

  TEST_CASE("requests for a future round are buffered but not used early") {
    Fixture f;
    Replica r = f.make({0, 1});
    fund_both(r);
    REQUIRE(r.send(f.sign(1, kAgree, 2), 30));
    REQUIRE(r.send(f.sign(0, kAgree, 1), 30));
    tick_to(r, 0, 71);
    REQUIRE(r.log().size() == 2);
    CHECK(r.log()[1].request->agent == 1);
  }

  TEST_CASE("slash splits deposits with the remainder to the lowest victim") {
    Fixture f;
    Replica r = f.make({0, 1, 2, 3}, 5);
    for (AgentId a = 0; a < 4; ++a) REQUIRE(r.initialize(a, {}, 0));
    r.slash(0, 1);
    CHECK(r.short_balance(1, 0) == 3);
    CHECK(r.short_balance(2, 0) == 1);
    CHECK(r.short_balance(3, 0) == 1);
    CHECK(r.short_balance(1, 1) == 3);
    CHECK(r.deposit(0, 0) == 0);
    CHECK(r.invariant_holds());
    r.slash(0, 2);
    CHECK(r.short_balance(1, 0) == 3);
    CHECK(r.short_balance(2, 0) == 1);
  }

  TEST_CASE("top_up adds funds, ignores strangers and defunds on failure") {
    Fixture f;
    Replica r = f.make({0, 1});
    fund_both(r);
    CHECK(r.top_up(0, {{0, 4}, {1, 2}}, 10));
    CHECK(r.short_balance(0, 0) == 5);
    CHECK(r.short_balance(0, 1) == 2);
    CHECK(r.long_balance(Address::contract()) == 5);
    CHECK_FALSE(r.top_up(1, {{0, 1000}}, 10));
    CHECK_FALSE(r.funded(1));
    CHECK_FALSE(r.top_up(1, {{0, 1}}, 11));
    CHECK(f.count(EventKind::TopUp, "ignored") == 1);
    CHECK(r.invariant_holds());
  }

  TEST_CASE("only the leader may defund") {
    Fixture f;
    Replica r = f.make({0, 1}, 0, false, AgentId{0});
    fund_both(r);
    r.defund(1, {{0, true}}, 20);
    CHECK(r.funded(0));
    CHECK(f.count(EventKind::Defund, "unauthorized") == 1);
    r.defund(0, {{1, true}, {0, false}}, 20);
    CHECK(r.funded(0));
    CHECK_FALSE(r.funded(1));
    CHECK_FALSE(r.send(f.sign(1, kAgree, 2), 30));
  }

  TEST_CASE("redeem pays short balance plus deposit once") {
    Fixture f;
    Replica r = f.make({0, 1}, 1);
    fund_both(r);
    CHECK(r.redeem(0, 20) == 2);
    CHECK(r.long_balance(Address::of(0)) == 100);
    CHECK(r.redeem(0, 21) == 0);
    CHECK(f.count(EventKind::Redeem, "ignored") == 1);
    CHECK(r.invariant_holds());
  }

  TEST_CASE("view projects the round whose window has closed") {
    Fixture f;
    Replica r = f.make({0, 1});
    fund_both(r);
    REQUIRE(r.send(f.sign(0, kAgree, 1), 30));
    tick_to(r, 0, 49);
    auto before = r.view(49);
    CHECK(before.state.round == 1);
    CHECK(before.round_start == 30);
    auto v = r.view(50);
    CHECK(v.state.round == 2);
    CHECK(v.round_start == 50);
    CHECK(std::get<SwapVars>(v.state.vars).alice_yes);
    CHECK(r.machine().round == 1);
    r.deliver(51);
    CHECK(r.machine() == v.state);
  }

  TEST_CASE("completion tick closes the last round's window") {
    Fixture f;
    Replica r = f.make({0, 1});
    fund_both(r);
    tick_to(r, 0, 200);
    CHECK(r.is_final());
    CHECK(r.log().size() == 3);
    CHECK(r.completion_tick() == 30 + 3 * 20);
    CHECK(r.settled(200));
  }

  TEST_CASE("optimistic mode executes a unique candidate immediately") {
    Fixture f;
    Replica r = f.make({0, 1}, 0, true);
    fund_both(r);
    REQUIRE(r.send(f.sign(0, kAgree, 1), 30));
    r.deliver(30);
    REQUIRE(r.log().size() == 1);
    CHECK(r.log()[0].tick == 30);
    CHECK(r.start_time(2) == 30);
    REQUIRE(r.send(f.sign(1, kAgree, 2), 33));
    r.deliver(33);
    REQUIRE(r.send(f.sign(0, kComplete, 3), 35));
    r.deliver(35);
    CHECK(r.is_final());
    CHECK_FALSE(r.settled(52));
    CHECK(r.settled(53));
    CHECK(r.redeem(0, 50) == 0);
    CHECK(f.count(EventKind::Redeem, "deferred") == 1);
  }

  TEST_CASE("optimistic mode rolls back when a conflicting request arrives in the window") {
    Fixture f;
    Replica r = f.make({0, 1}, 0, true);
    fund_both(r);
    REQUIRE(r.send(f.sign(0, kAgree, 1), 30));
    r.deliver(30);
    REQUIRE(r.send(f.sign(1, kAgree, 2), 31));
    r.deliver(31);
    CHECK(r.machine().round == 3);
    REQUIRE(r.send(f.sign(0, MoveDescriptor::skip(), 1), 40));
    CHECK(f.count(EventKind::Rollback) == 1);
    REQUIRE(r.log().size() == 2);
    CHECK_FALSE(r.log()[0].request.has_value());
    CHECK(r.log()[1].request->agent == 1);
    CHECK_FALSE(std::get<SwapVars>(r.machine().vars).alice_yes);
    CHECK(std::get<SwapVars>(r.machine().vars).bob_yes);
    CHECK(r.invariant_holds());
  }

  TEST_CASE("property: random operation sequences preserve the invariant") {
    Gen g(21);
    for (int trial = 0; trial < 200; ++trial) {
      Fixture f;
      const bool opt = g.coin();
      Replica r = f.make({0, 1, 2}, g.range(0, 3), opt, AgentId{0}, static_cast<AssetId>(g.range(0, 1)));
      Tick now = 0;
      for (int step = 0; step < 60; ++step) {
        now += static_cast<Tick>(g.range(0, 4));
        auto a = static_cast<AgentId>(g.range(0, 2));
        switch (g.range(0, 6)) {
          case 0:
            r.initialize(a, {{0, g.range(0, 40)}, {1, g.range(0, 40)}}, now);
            break;
          case 1:
          case 2: {
            auto round = static_cast<std::uint64_t>(g.range(1, 4));
            MoveDescriptor mv = g.coin() ? kAgree : (g.coin() ? kComplete : MoveDescriptor::skip());
            r.send(f.sign(a, mv, round), now);
            break;
          }
          case 3:
            r.top_up(a, {{0, g.range(0, 60)}, {1, g.range(0, 60)}}, now);
            break;
          case 4:
            r.redeem(a, now);
            break;
          case 5:
            r.slash(a, now);
            break;
          default:
            r.defund(0, {{a, g.coin()}}, now);
            break;
        }
        r.deliver(now);
        REQUIRE(r.invariant_holds());
      }
    }
  }
}
