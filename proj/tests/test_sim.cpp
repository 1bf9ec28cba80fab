#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "xsmr/checks.hpp"
#include "xsmr/sim.hpp"
#include "xsmr/suite.hpp"

using namespace xsmr;

namespace {

Message dummy(AgentId sender) {
  Message m;
  m.kind = Message::Kind::Redeem;
  m.sender = sender;
  return m;
}

std::size_t find_event(const std::vector<TraceEvent>& trace, EventKind k,
                       std::optional<AssetId> replica = std::nullopt) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].kind == k && (!replica || trace[i].replica == replica)) return i;
  }
  FAIL("event not found");
  return 0;
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("worst-case network delivers after exactly delta") {
    Network net({}, 10, 1);
    CHECK(net.enqueue(dummy(0), 5) == 15);
    CHECK(net.take_due(14).empty());
    CHECK(net.take_due(15).size() == 1);
    CHECK(net.empty());
  }

  TEST_CASE("uniform network stays within [1, delta] and varies") {
    NetworkConfig cfg;
    cfg.mode = NetworkMode::UniformRandom;
    Network net(cfg, 10, 99);
    std::set<Tick> seen;
    for (int i = 0; i < 1000; ++i) {
      Tick due = net.enqueue(dummy(0), 100);
      CHECK(due >= 101);
      CHECK(due <= 110);
      seen.insert(due);
    }
    CHECK(seen.size() == 10);
    CHECK(net.sent() == 1000);
  }

  TEST_CASE("scripted delays are clamped into the bound") {
    NetworkConfig cfg;
    cfg.mode = NetworkMode::Scripted;
    cfg.delays = {3, 0, 50};
    cfg.default_delay = 2;
    Network net(cfg, 10, 0);
    CHECK(net.enqueue(dummy(0), 0) == 3);
    CHECK(net.enqueue(dummy(0), 0) == 1);
    CHECK(net.enqueue(dummy(0), 0) == 10);
    CHECK(net.enqueue(dummy(0), 0) == 2);
  }

  TEST_CASE("messages due together keep their send order") {
    Network net({}, 10, 0);
    for (AgentId a = 0; a < 5; ++a) net.enqueue(dummy(a), 0);
    auto out = net.take_due(10);
    REQUIRE(out.size() == 5);
    for (AgentId a = 0; a < 5; ++a) CHECK(out[a].sender == a);
  }

  TEST_CASE("compliant swap completes at (n+1) delta plus three windows") {
    ScenarioConfig cfg = demo_swap();
    const Tick n = cfg.agents.size();
    const Tick oracle = (n + 1) * cfg.delta + 3 * n * cfg.delta;
    RunResult r = run_scenario(cfg);
    CHECK(r.completion == oracle);
    CHECK(oracle == 90);
    CHECK_FALSE(r.cap_hit);
    CHECK(r.utils.at(0) == 1);
    CHECK(r.utils.at(1) == 1);
    CHECK(r.final.at(0).at(1) == 6);
    CHECK(r.final.at(1).at(0) == 6);
    CHECK(r.invariant_violations == 0);
    CHECK(r.invariant_checks > 0);
    for (const auto& v : check_trace(r.trace, cfg)) CHECK_MESSAGE(v.ok(), v.property);
  }

  TEST_CASE("runs are deterministic for a fixed seed") {
    ScenarioConfig cfg = reseeded(demo_auction(), 7);
    RunResult a = run_scenario(cfg);
    RunResult b = run_scenario(cfg);
    CHECK(a.trace == b.trace);
    CHECK(a.utils == b.utils);
  }

  TEST_CASE("seeds change timing but not outcomes of compliant runs") {
    ScenarioConfig cfg = demo_dao();
    RunResult a = run_scenario(reseeded(cfg, 1));
    RunResult b = run_scenario(reseeded(cfg, 2));
    CHECK(a.trace != b.trace);
    CHECK(a.final == b.final);
    CHECK(a.utils == b.utils);
    CHECK(a.proposal_funded);
  }

  TEST_CASE("a silent counterparty costs nothing without a premium") {
    ScenarioConfig cfg = with_strategy(demo_swap(), 0, Strategy::Silent);
    cfg.premium = 0;
    RunResult r = run_scenario(cfg);
    CHECK(r.utils.at(1) == 0);
    CHECK(r.final.at(1) == r.initial.at(1));
    CHECK(check_safety(r.trace, cfg).ok());
  }

  TEST_CASE("an equivocated turn resolves to Skip everywhere") {
    ScenarioConfig cfg = demo_swap(Strategy::Equivocator);
    RunResult r = run_scenario(cfg);
    REQUIRE(r.logs.size() == 2);
    const auto& l0 = r.logs.at(0);
    const auto& l1 = r.logs.at(1);
    REQUIRE(l0.size() == l1.size());
    for (std::size_t i = 0; i < l0.size(); ++i) CHECK(l0[i].same_outcome(l1[i]));
    REQUIRE(l0.size() >= 2);
    CHECK_FALSE(l0[1].request.has_value());
    CHECK(check_equivocation_skips(r.trace, cfg).ok());
    CHECK(check_consistency(r.trace).ok());
    CHECK(check_safety(r.trace, cfg).ok());
  }

  TEST_CASE("an invalid funder is defunded and others end as if it were silent") {
    for (Game g : {Game::Swap, Game::Dao, Game::Auction}) {
      RunResult bad = run_scenario(demo(g, Strategy::InvalidFunder));
      RunResult silent = run_scenario(demo(g, Strategy::Silent));
      const AgentId adv = adversary_of(g);
      std::size_t defunds = std::count_if(bad.trace.begin(), bad.trace.end(), [&](const auto& e) {
        return e.kind == EventKind::Defund && e.agent == adv && e.detail.rfind("by ", 0) == 0;
      });
      CHECK(defunds == bad.logs.size());
      for (const auto& [id, bal] : bad.final) {
        if (id == adv) continue;
        CHECK_MESSAGE(bal == silent.final.at(id), "agent " << id);
      }
    }
  }

  TEST_CASE("a consistency checker catches a forged log entry") {
    ScenarioConfig cfg = demo_swap();
    RunResult r = run_scenario(cfg);
    auto trace = r.trace;
    std::size_t i = find_event(trace, EventKind::Execute, AssetId{1});
    trace[i].request->move = MoveDescriptor::skip();
    Verdict v = check_consistency(trace);
    CHECK(v.outcome == Outcome::Fail);
    CHECK(v.witness.has_value());
  }

  TEST_CASE("the safety checker catches a compliant agent losing value") {
    ScenarioConfig cfg = demo_swap();
    RunResult r = run_scenario(cfg);
    auto trace = r.trace;
    bool changed = false;
    for (auto& e : trace) {
      if (e.kind == EventKind::Redeem && e.agent == 0 && e.replica == 1 && e.detail == "ok") {
        e.amount = 0;
        changed = true;
      }
    }
    REQUIRE(changed);
    Verdict v = check_safety(trace, cfg);
    CHECK(v.outcome == Outcome::Fail);
    CHECK(v.witness.has_value());
  }

  TEST_CASE("liveness only applies to all-compliant configs") {
    ScenarioConfig cfg = demo_swap(Strategy::Silent);
    RunResult r = run_scenario(cfg);
    CHECK(check_liveness(r.trace, cfg).outcome == Outcome::NotApplicable);
    ScenarioConfig ok = demo_auction();
    RunResult a = run_scenario(ok);
    CHECK(check_liveness(a.trace, ok).outcome == Outcome::Pass);
    CHECK(a.utils.at(2) == 0);
  }

  TEST_CASE("optimistic and pessimistic runs agree on the log") {
    for (Game g : {Game::Swap, Game::Dao, Game::Auction}) {
      CHECK(compare_optimistic(demo(g)).outcome == Outcome::Pass);
    }
    CHECK(compare_optimistic(demo_swap(Strategy::Silent)).outcome == Outcome::NotApplicable);
  }

  TEST_CASE("traces survive a JSONL round trip") {
    RunResult r = run_scenario(demo_auction(Strategy::Withholder));
    std::stringstream ss;
    write_trace(ss, r.trace);
    CHECK(read_trace(ss) == r.trace);
    std::istringstream bad("{\"version\": 99}\n");
    CHECK_THROWS(read_trace(bad));
  }

  TEST_CASE("run cap leaves two windows after the last scheduled round") {
    ScenarioConfig cfg = demo_swap();
    CHECK(run_cap(cfg, 3) == 70 + 40);
    CHECK(run_cap(cfg, 0) == run_cap(cfg, 1));
  }

  TEST_CASE("invalid configs are rejected before running") {
    ScenarioConfig cfg = demo_swap();
    cfg.delta = 0;
    CHECK_THROWS_AS(run_scenario(cfg), ConfigError);
  }
}
