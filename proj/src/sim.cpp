#include "xsmr/sim.hpp"

#include <algorithm>
#include <memory>

namespace xsmr {

Network::Network(NetworkConfig cfg, Tick delta, std::uint64_t seed)
    : cfg_(std::move(cfg)), delta_(delta), rng_(seed) {}

Tick Network::delay_for(std::uint64_t seq) {
  switch (cfg_.mode) {
    case NetworkMode::WorstCase:
      return delta_;
    case NetworkMode::UniformRandom:
      // Modulo keeps the draw identical across standard libraries.
      return 1 + rng_() % delta_;
    case NetworkMode::Scripted:
      if (seq < cfg_.delays.size()) return cfg_.delays[seq];
      return cfg_.default_delay.value_or(delta_);
  }
  return delta_;
}

Tick Network::enqueue(Message msg, Tick now) {
  std::uint64_t seq = seq_++;
  Tick due = now + std::clamp<Tick>(delay_for(seq), 1, delta_);
  queue_.push({due, seq, std::move(msg)});
  return due;
}

std::vector<Message> Network::take_due(Tick now) {
  std::vector<Message> out;
  while (!queue_.empty() && queue_.top().due <= now) {
    out.push_back(queue_.top().msg);
    queue_.pop();
  }
  return out;
}

Tick run_cap(const ScenarioConfig& cfg, std::uint64_t max_rounds) {
  const std::size_t n = cfg.agents.size();
  return scheduled_round_start(std::max<std::uint64_t>(max_rounds, 1), n, cfg.delta) +
         2 * static_cast<Tick>(n) * cfg.delta;
}

namespace {

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg)
      : cfg_(cfg),
        machine_(make_machine(cfg.game)),
        provider_(std::make_shared<KeyedHashProvider>(cfg.seed)),
        net_(cfg.network, cfg.delta, cfg.seed) {
    const auto ids = cfg.agent_ids();
    std::vector<AssetId> assets;
    for (AssetId a = 0; a < cfg.assets.size(); ++a) assets.push_back(a);

    for (const auto& spec : cfg.agents) {
      for (AssetId a : assets) {
        auto it = spec.balances.find(a);
        result_.initial[spec.id][a] = it == spec.balances.end() ? 0 : it->second;
      }
    }
    for (AssetId a : assets) {
      ReplicaParams p{.asset = a,
                      .agents = ids,
                      .assets = assets,
                      .delta = cfg.delta,
                      .leader = cfg.leader,
                      .premium = cfg.premium,
                      .optimistic = cfg.optimistic};
      std::map<AgentId, std::int64_t> longs;
      for (AgentId id : ids) longs[id] = result_.initial[id][a];
      replicas_.push_back(std::make_unique<Replica>(
          p, machine_, provider_, longs, [this](const TraceEvent& ev) { record(ev); }));
      views_.push_back(replicas_.back().get());
    }

    AgentEnv env{.agents = ids,
                 .assets = assets,
                 .delta = cfg.delta,
                 .optimistic = cfg.optimistic,
                 .leader = cfg.leader,
                 .expected = cfg.expected};
    for (const auto& spec : cfg.agents) {
      env.fund[spec.id] = spec.fund;
      if (spec.topup) env.topup[spec.id] = *spec.topup;
      if (spec.topup || spec.strategy == Strategy::InvalidFunder) env.topup_phase = true;
    }
    std::vector<const AgentSpec*> order;
    for (const auto& spec : cfg.agents) order.push_back(&spec);
    std::sort(order.begin(), order.end(),
              [](const AgentSpec* a, const AgentSpec* b) { return a->id < b->id; });
    for (const auto* spec : order) {
      agents_.emplace_back(spec->id, spec->strategy, spec->params, env, *provider_);
    }
  }

  RunResult run() {
    const Tick cap = run_cap(cfg_, machine_->max_rounds());
    Tick now = 0;
    for (;; ++now) {
      for (auto& m : net_.take_due(now)) dispatch(m, now);
      for (auto& r : replicas_) r->deliver(now);
      for (auto& a : agents_) {
        for (auto& m : a.step(now, views_)) send(std::move(m), now);
      }
      if (finished(now)) break;
      if (now >= cap) {
        result_.cap_hit = true;
        record({.tick = now, .kind = EventKind::Check, .detail = "cap"});
        break;
      }
    }
    result_.end_tick = now;
    collect();
    return std::move(result_);
  }

 private:
  void record(const TraceEvent& ev) {
    result_.trace.push_back(ev);
    if (ev.kind == EventKind::Check) return;
    for (const auto& r : replicas_) {
      ++result_.invariant_checks;
      if (r->invariant_holds()) continue;
      ++result_.invariant_violations;
      result_.trace.push_back({.tick = ev.tick,
                               .kind = EventKind::Check,
                               .replica = r->asset(),
                               .amount = r->invariant_gap(),
                               .detail = "invariant"});
    }
  }

  void send(Message m, Tick now) {
    const auto target = m.replica;
    const auto sender = m.sender;
    const bool is_send = m.kind == Message::Kind::Send;
    PathSignature ps = m.ps;
    Tick due = net_.enqueue(std::move(m), now);
    if (!is_send) return;
    TraceEvent ev{.tick = now,
                  .kind = EventKind::Send,
                  .replica = target,
                  .agent = sender,
                  .round = ps.request.round,
                  .request = ps.request,
                  .path = ps.path,
                  .due = due};
    result_.trace.push_back(ev);
  }

  void dispatch(const Message& m, Tick now) {
    Replica& r = *replicas_.at(m.replica);
    switch (m.kind) {
      case Message::Kind::Initialize:
        r.initialize(m.sender, m.fund, now);
        break;
      case Message::Kind::TopUp:
        r.top_up(m.sender, m.fund, now);
        break;
      case Message::Kind::Defund:
        r.defund(m.sender, m.votes, now);
        break;
      case Message::Kind::Redeem:
        r.redeem(m.sender, now);
        break;
      case Message::Kind::Send:
        r.send(m.ps, now);
        break;
    }
  }

  bool finished(Tick now) const {
    if (!net_.empty()) return false;
    for (const auto& r : replicas_) {
      if (!r->is_final() || !r->settled(now)) return false;
    }
    return std::all_of(agents_.begin(), agents_.end(),
                       [](const AgentRuntime& a) { return a.quiescent(); });
  }

  void collect() {
    for (const auto& r : replicas_) {
      result_.logs[r->asset()] = r->log();
      result_.states[r->asset()] = r->machine();
      if (auto c = r->completion_tick()) {
        result_.completion = std::max(result_.completion.value_or(0), *c);
      }
      for (const auto& [id, bal] : result_.initial) {
        result_.final[id][r->asset()] = r->long_balance(Address::of(id));
      }
    }
    const auto& first = replicas_.front()->machine();
    result_.proposal_funded = machine_->is_final(first) && machine_->proposal_funded(first);
    for (const auto& [id, before] : result_.initial) {
      result_.utils[id] = holdings_util(cfg_.utility, id, before, result_.final[id],
                                        result_.proposal_funded);
    }
    for (const auto& a : agents_) {
      if (a.halted()) result_.halt_reasons[a.id()] = a.halt_reason();
    }
  }

  const ScenarioConfig& cfg_;
  std::shared_ptr<const Machine> machine_;
  std::shared_ptr<const SignatureProvider> provider_;
  Network net_;
  std::vector<std::unique_ptr<Replica>> replicas_;
  Replicas views_;
  std::vector<AgentRuntime> agents_;
  RunResult result_;
};

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  return Simulation(cfg).run();
}

}  // namespace xsmr
