#include "xsmr/agent.hpp"

#include <algorithm>
#include <array>

namespace xsmr {

namespace {

constexpr std::array<const char*, 6> kStrategyNames = {
    "compliant", "silent", "non_relayer", "equivocator", "withholder", "invalid_funder"};

std::vector<AssetId> all_targets(const Replicas& reps) {
  std::vector<AssetId> out;
  for (const auto* r : reps) out.push_back(r->asset());
  return out;
}

std::int64_t lookup(const FundMap& m, AssetId a) {
  auto it = m.find(a);
  return it == m.end() ? 0 : it->second;
}

// The conflicting twin an equivocator shows to the second half of replicas.
std::optional<MoveDescriptor> alternative(const MoveDescriptor& move) {
  if (move.is_skip()) return std::nullopt;
  if (move.args.empty()) return MoveDescriptor::skip();
  MoveDescriptor alt = move;
  if (auto* v = std::get_if<std::int64_t>(&alt.args[0])) {
    *v += 1;
  } else {
    auto& b = std::get<Bytes>(alt.args[0]);
    if (b.empty()) {
      b.push_back(1);
    } else {
      b[0] ^= 0xff;
    }
  }
  return alt;
}

}  // namespace

const char* to_string(Strategy s) { return kStrategyNames[static_cast<std::size_t>(s)]; }

std::optional<Strategy> strategy_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kStrategyNames.size(); ++i) {
    if (s == kStrategyNames[i]) return static_cast<Strategy>(i);
  }
  return std::nullopt;
}

std::vector<Message> fe_initialize(AgentId self, const FundMap& fund, const Replicas& reps) {
  std::vector<Message> out;
  for (const auto* r : reps) {
    out.push_back({.kind = Message::Kind::Initialize, .sender = self, .replica = r->asset(),
                   .fund = fund});
  }
  return out;
}

std::vector<Message> fe_top_up(AgentId self, const FundMap& fund, const Replicas& reps) {
  std::vector<Message> out;
  for (const auto* r : reps) {
    out.push_back({.kind = Message::Kind::TopUp, .sender = self, .replica = r->asset(),
                   .fund = fund});
  }
  return out;
}

std::vector<Message> fe_redeem(AgentId self, const Replicas& reps) {
  std::vector<Message> out;
  for (const auto* r : reps) {
    out.push_back({.kind = Message::Kind::Redeem, .sender = self, .replica = r->asset()});
  }
  return out;
}

std::vector<Message> fe_send(const PathSignature& ps, const std::vector<AssetId>& targets) {
  std::vector<Message> out;
  for (AssetId a : targets) {
    out.push_back({.kind = Message::Kind::Send, .sender = ps.path.back(), .replica = a,
                   .ps = ps});
  }
  return out;
}

bool verify_accounts(const Replicas& reps, const AgentEnv& env, bool after_topup) {
  for (AgentId q : env.agents) {
    bool anywhere = std::any_of(reps.begin(), reps.end(),
                                [&](const Replica* r) { return r->funded(q); });
    if (!anywhere) continue;
    FundMap want = env.fund.count(q) ? env.fund.at(q) : FundMap{};
    if (after_topup && env.topup.count(q)) {
      for (const auto& [a, v] : env.topup.at(q)) want[a] += v;
    }
    for (const auto* r : reps) {
      if (!r->funded(q)) return false;
      for (AssetId b : env.assets) {
        std::int64_t have = r->short_balance(q, b);
        std::int64_t need = lookup(want, b);
        bool ok = env.expected.mode == FundingMode::Exact ? have == need : have >= need;
        if (!ok) return false;
      }
    }
  }
  return true;
}

bool defund_vote(const Replicas& reps, AgentId p) {
  for (const auto* a : reps) {
    if (!a->funded(p)) return true;
    for (const auto* b : reps) {
      if (a->short_balance(p, a->asset()) != b->short_balance(p, a->asset())) return true;
    }
  }
  return false;
}

std::vector<Message> relay_step(AgentId self, const Replicas& reps,
                                const SignatureProvider& provider, std::set<Request>& seen,
                                const std::vector<AssetId>& targets) {
  std::vector<Message> out;
  for (const auto* r : reps) {
    for (const auto& [sender, entries] : r->buffer()) {
      for (const auto& b : entries) {
        const Request& req = b.ps.request;
        if (!seen.insert(req).second) continue;
        if (std::find(b.ps.path.begin(), b.ps.path.end(), self) != b.ps.path.end()) continue;
        auto msgs = fe_send(extend_path(provider, self, b.ps), targets);
        out.insert(out.end(), msgs.begin(), msgs.end());
      }
    }
  }
  return out;
}

AgentRuntime::AgentRuntime(AgentId id, Strategy strategy, StrategyParams params, AgentEnv env,
                           const SignatureProvider& provider)
    : id_(id),
      strategy_(strategy),
      params_(params),
      env_(std::move(env)),
      provider_(provider) {}

bool AgentRuntime::relays() const {
  switch (strategy_) {
    case Strategy::Compliant:
    case Strategy::InvalidFunder:
      return true;
    case Strategy::Withholder:
      return params_.relay;
    default:
      return false;
  }
}

std::vector<AssetId> AgentRuntime::relay_targets() const {
  if (strategy_ == Strategy::Withholder) return {params_.target};
  return env_.assets;
}

bool AgentRuntime::quiescent() const {
  if (halted_) return true;
  return strategy_ == Strategy::Silent;
}

void AgentRuntime::halt(const Replicas& reps, const std::string& reason,
                        std::vector<Message>& out) {
  auto msgs = fe_redeem(id_, reps);
  out.insert(out.end(), msgs.begin(), msgs.end());
  halted_ = true;
  halt_reason_ = reason;
}

void AgentRuntime::verify(const Replicas& reps, bool after_topup, std::vector<Message>& out) {
  if (strategy_ != Strategy::Compliant) return;
  if (verify_accounts(reps, env_, after_topup)) return;
  if (env_.expected.halt_on_shortfall) halt(reps, "verification failed", out);
}

void AgentRuntime::front_end(Tick now, const Replicas& reps, std::vector<Message>& out) {
  const Tick d = env_.delta;
  if (now == 0) {
    FundMap fund = env_.fund.count(id_) ? env_.fund.at(id_) : FundMap{};
    auto msgs = fe_initialize(id_, fund, reps);
    out.insert(out.end(), msgs.begin(), msgs.end());
    return;
  }
  if (now == d) {
    verify(reps, false, out);
    if (halted_) return;
    if (strategy_ == Strategy::InvalidFunder) {
      FundMap claim;
      for (AssetId a : env_.assets) claim[a] = params_.claim;
      auto msgs = fe_top_up(id_, claim, reps);
      out.insert(out.end(), msgs.begin(), msgs.end());
    } else if (env_.topup.count(id_)) {
      auto msgs = fe_top_up(id_, env_.topup.at(id_), reps);
      out.insert(out.end(), msgs.begin(), msgs.end());
    }
    return;
  }
  if (!env_.topup_phase) return;
  if (now == 2 * d) {
    if (!env_.leader) {
      verify(reps, true, out);
    } else if (*env_.leader == id_) {
      std::map<AgentId, bool> votes;
      for (AgentId p : env_.agents) votes[p] = defund_vote(reps, p);
      for (const auto* r : reps) {
        out.push_back({.kind = Message::Kind::Defund, .sender = id_, .replica = r->asset(),
                       .votes = votes});
      }
    }
    return;
  }
  if (now == 3 * d && env_.leader) verify(reps, true, out);
}

void AgentRuntime::issue(const Request& req, const Replicas& reps, std::vector<Message>& out) {
  issued_.insert(req.round);
  PathSignature ps = sign_request(provider_, id_, req);
  std::vector<AssetId> targets = all_targets(reps);
  if (strategy_ == Strategy::Withholder) {
    auto msgs = fe_send(ps, {params_.target});
    out.insert(out.end(), msgs.begin(), msgs.end());
    return;
  }
  if (strategy_ == Strategy::Equivocator) {
    if (auto alt = alternative(req.move)) {
      std::size_t half = (targets.size() + 1) / 2;
      std::vector<AssetId> first(targets.begin(), targets.begin() + half);
      std::vector<AssetId> rest(targets.begin() + half, targets.end());
      auto a = fe_send(ps, first);
      auto b = fe_send(sign_request(provider_, id_, {req.agent, *alt, req.round}), rest);
      out.insert(out.end(), a.begin(), a.end());
      out.insert(out.end(), b.begin(), b.end());
      return;
    }
  }
  auto msgs = fe_send(ps, targets);
  out.insert(out.end(), msgs.begin(), msgs.end());
}

void AgentRuntime::issue_moves(Tick now, const Replicas& reps, std::vector<Message>& out) {
  if (now < scheduled_round_start(1, env_.n(), env_.delta) && params_.early == 0) return;
  const Machine& m = reps.front()->spec();
  if (env_.optimistic) {
    for (const auto* r : reps) {
      const GameState& s = r->machine();
      if (!s.started || m.is_final(s)) continue;
      if (m.enabled(s) != id_ || issued_.count(s.round)) continue;
      issue({id_, m.prescribed_move(s, id_), s.round}, reps, out);
    }
    return;
  }
  auto v = reps.front()->view(now);
  if (m.is_final(v.state)) return;
  const std::uint64_t r = v.state.round;
  if (v.state.started && m.enabled(v.state) == id_ && now >= v.round_start && !issued_.count(r)) {
    issue({id_, m.prescribed_move(v.state, id_), r}, reps, out);
  }
  if (strategy_ != Strategy::Withholder || params_.early == 0) return;
  // Pre-sign the upcoming turns from the schedule alone.
  for (std::uint64_t k = r; k <= std::min<std::uint64_t>(r + 1, m.max_rounds()); ++k) {
    if (m.turn_order()[k - 1] != id_ || issued_.count(k)) continue;
    Tick st = scheduled_round_start(k, env_.n(), env_.delta);
    if (now + params_.early < st) continue;
    GameState guess = v.state;
    guess.round = k;
    guess.started = true;
    issue({id_, m.prescribed_move(guess, id_), k}, reps, out);
  }
}

std::vector<Message> AgentRuntime::step(Tick now, const Replicas& reps) {
  std::vector<Message> out;
  if (reps.empty()) return out;
  if (halted_) {
    // Relaying outlives the agent's own stake.
    if (relays()) out = relay_step(id_, reps, provider_, seen_, relay_targets());
    return out;
  }
  if (strategy_ == Strategy::Silent) {
    if (now == 0) front_end(now, reps, out);
    return out;
  }
  if (relays()) {
    auto msgs = relay_step(id_, reps, provider_, seen_, relay_targets());
    out.insert(out.end(), msgs.begin(), msgs.end());
  }
  front_end(now, reps, out);
  if (halted_) return out;

  bool done = std::all_of(reps.begin(), reps.end(), [&](const Replica* r) {
    return r->is_final() && r->settled(now);
  });
  if (done) {
    halt(reps, "finished", out);
    return out;
  }
  issue_moves(now, reps, out);
  return out;
}

}  // namespace xsmr
