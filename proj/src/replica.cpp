#include "xsmr/replica.hpp"

#include <algorithm>

namespace xsmr {

Replica::Replica(ReplicaParams params, std::shared_ptr<const Machine> machine,
                 std::shared_ptr<const SignatureProvider> provider,
                 std::map<AgentId, std::int64_t> long_balances, Sink sink)
    : p_(std::move(params)),
      machine_spec_(std::move(machine)),
      provider_(std::move(provider)),
      sink_(std::move(sink)) {
  std::sort(p_.agents.begin(), p_.agents.end());
  for (const auto& [agent, v] : long_balances) long_[Address::of(agent)] = v;
  machine_ = machine_spec_->initial_state(Accounts{});
  start_[1] = scheduled_round_start(1, n(), p_.delta);
}

void Replica::emit(TraceEvent ev) const {
  if (!sink_) return;
  ev.replica = p_.asset;
  sink_(ev);
}

std::optional<Tick> Replica::start_time(std::uint64_t round) const {
  auto it = start_.find(round);
  if (it == start_.end()) return std::nullopt;
  return it->second;
}

bool Replica::funded(AgentId agent) const {
  auto it = funded_.find(agent);
  return it != funded_.end() && it->second;
}

std::int64_t Replica::long_balance(Address who) const {
  auto it = long_.find(who);
  return it == long_.end() ? 0 : it->second;
}

std::int64_t Replica::short_balance(AgentId agent, AssetId asset) const {
  return machine_.accounts.get(Address::of(agent), asset);
}

std::int64_t Replica::deposit(AgentId agent, AssetId asset) const {
  auto it = deposits_.find({agent, asset});
  return it == deposits_.end() ? 0 : it->second;
}

bool Replica::initialize(AgentId sender, const FundMap& fund, Tick now) {
  TraceEvent ev{.tick = now, .kind = EventKind::Fund, .agent = sender};
  bool known = std::binary_search(p_.agents.begin(), p_.agents.end(), sender);
  if (!known || now > p_.delta || funded(sender) || machine_.started) {
    ev.detail = "rejected";
    emit(ev);
    return false;
  }
  auto own = fund.count(p_.asset) ? fund.at(p_.asset) : 0;
  std::int64_t amount = own + p_.premium;
  bool sane = std::all_of(fund.begin(), fund.end(), [](const auto& kv) { return kv.second >= 0; });
  Address who = Address::of(sender);
  if (!sane || long_balance(who) < amount) {
    ev.detail = "failed";
    ev.amount = amount;
    emit(ev);
    return false;
  }
  long_[who] -= amount;
  long_[Address::contract()] += amount;
  for (AssetId b : p_.assets) {
    machine_.accounts.set(who, b, fund.count(b) ? fund.at(b) : 0);
    deposits_[{sender, b}] = p_.premium;
  }
  funded_[sender] = true;
  ev.detail = "ok";
  ev.amount = amount;
  emit(ev);
  return true;
}

bool Replica::send(const PathSignature& ps, Tick now) {
  const Request& req = ps.request;
  if (!std::binary_search(p_.agents.begin(), p_.agents.end(), req.agent)) return false;
  for (AgentId a : ps.path) {
    if (!std::binary_search(p_.agents.begin(), p_.agents.end(), a)) return false;
  }
  if (!funded(req.agent)) return false;
  if (!verify_path_signature(ps, *provider_)) return false;
  Tick st = start_time(req.round).value_or(now);
  if (!is_live(ps, now, st, p_.delta)) return false;
  if (buffered_.count(req)) return false;

  buffered_.insert(req);
  buffer_[req.agent].push_back({ps, now});
  emit({.tick = now,
        .kind = EventKind::Buffer,
        .agent = req.agent,
        .round = req.round,
        .request = req,
        .path = ps.path});
  if (p_.optimistic) maybe_rollback(req, now);
  return true;
}

std::set<Request> Replica::candidates(const GameState& s, std::uint64_t round) const {
  std::set<Request> d;
  auto who = machine_spec_->enabled(s);
  if (!who) return d;
  auto it = buffer_.find(*who);
  if (it == buffer_.end()) return d;
  for (const auto& b : it->second) {
    if (b.ps.request.round == round && machine_spec_->admits(s, b.ps.request.move)) {
      d.insert(b.ps.request);
    }
  }
  return d;
}

void Replica::maybe_start(Tick now) {
  if (machine_.started || now < start_[1]) return;
  machine_ = machine_spec_->start(machine_);
  if (is_final()) note_final(now);
}

void Replica::note_final(Tick now) {
  TraceEvent ev{.tick = now, .kind = EventKind::Halt};
  ev.detail = machine_spec_->proposal_funded(machine_) ? "final proposal_funded" : "final";
  ev.round = machine_.round - 1;
  emit(ev);
}

void Replica::resolve_round(Tick now, const std::set<Request>& d, Tick next_start,
                            const std::string& skip_reason) {
  const std::uint64_t r = machine_.round;
  const Tick st = start_[r];
  snapshots_[r] = Snapshot{machine_, deposits_};
  const AgentId mover = *machine_spec_->enabled(machine_);
  LogEntry entry{.round = r, .tick = now, .start = st};
  if (d.size() == 1) {
    const Request& req = *d.begin();
    machine_ = machine_spec_->apply(machine_, req.agent, req.move);
    entry.request = req;
    emit({.tick = now,
          .kind = EventKind::Execute,
          .agent = req.agent,
          .round = r,
          .request = req,
          .start = st});
  } else {
    machine_ = machine_spec_->apply(machine_, mover, MoveDescriptor::skip());
    emit({.tick = now,
          .kind = EventKind::Skip,
          .agent = mover,
          .round = r,
          .start = st,
          .detail = d.empty() ? skip_reason : "conflict"});
    if (p_.premium > 0) slash(mover, now);
  }
  log_.push_back(entry);
  if (!start_.count(r + 1) || !p_.optimistic) start_[r + 1] = next_start;
  if (is_final()) note_final(now);
}

void Replica::deliver(Tick now) {
  maybe_start(now);
  if (!machine_.started) return;
  while (!is_final()) {
    const std::uint64_t r = machine_.round;
    const Tick st = start_[r];
    auto d = candidates(machine_, r);
    if (p_.optimistic) {
      if (d.size() == 1 && now >= st) {
        resolve_round(now, d, now, "timeout");
      } else if (is_ready(now, st, n(), p_.delta)) {
        resolve_round(now, d, st + window(), "timeout");
      } else {
        break;
      }
    } else {
      if (!is_ready(now, st, n(), p_.delta)) break;
      resolve_round(now, d, st + window(), "timeout");
    }
  }
}

void Replica::maybe_rollback(const Request& req, Tick now) {
  const std::uint64_t j = req.round;
  if (j >= machine_.round || j < 1) return;
  auto entry = std::find_if(log_.begin(), log_.end(),
                            [&](const LogEntry& e) { return e.round == j; });
  if (entry == log_.end() || !entry->request || *entry->request == req) return;
  if (machine_spec_->turn_order().at(j - 1) != req.agent) return;
  if (now > start_[j] + window()) return;
  auto snap = snapshots_.find(j);
  if (snap == snapshots_.end()) return;
  if (!machine_spec_->admits(snap->second.machine, req.move)) return;

  const std::uint64_t resume = machine_.round;
  machine_ = snap->second.machine;
  deposits_ = snap->second.deposits;
  log_.erase(entry, log_.end());
  emit({.tick = now, .kind = EventKind::Rollback, .agent = req.agent, .round = j});

  resolve_round(now, {}, start_[j + 1], "rollback");
  for (std::uint64_t k = j + 1; k < resume && !is_final(); ++k) {
    resolve_round(now, candidates(machine_, k), start_[k + 1], "rollback");
  }
}

bool Replica::top_up(AgentId sender, const FundMap& fund, Tick now) {
  TraceEvent ev{.tick = now, .kind = EventKind::TopUp, .agent = sender};
  if (!funded(sender)) {
    ev.detail = "ignored";
    emit(ev);
    return false;
  }
  std::int64_t amount = fund.count(p_.asset) ? fund.at(p_.asset) : 0;
  bool sane = std::all_of(fund.begin(), fund.end(), [](const auto& kv) { return kv.second >= 0; });
  Address who = Address::of(sender);
  ev.amount = amount;
  if (!sane || long_balance(who) < amount) {
    funded_[sender] = false;
    ev.detail = "failed";
    emit(ev);
    return false;
  }
  long_[who] -= amount;
  long_[Address::contract()] += amount;
  for (const auto& [b, v] : fund) machine_.accounts.add(who, b, v);
  ev.detail = "ok";
  emit(ev);
  return true;
}

void Replica::defund(AgentId sender, const std::map<AgentId, bool>& votes, Tick now) {
  if (!p_.leader || sender != *p_.leader) {
    emit({.tick = now, .kind = EventKind::Defund, .agent = sender, .detail = "unauthorized"});
    return;
  }
  for (const auto& [agent, vote] : votes) {
    if (!vote) continue;
    funded_[agent] = false;
    emit({.tick = now,
          .kind = EventKind::Defund,
          .agent = agent,
          .detail = "by " + std::to_string(sender)});
  }
}

bool Replica::window_open(Tick now) const {
  if (!p_.optimistic || log_.empty()) return false;
  const auto& last = log_.back();
  auto it = start_.find(last.round);
  return it != start_.end() && now <= it->second + window();
}

std::int64_t Replica::redeem(AgentId sender, Tick now) {
  TraceEvent ev{.tick = now, .kind = EventKind::Redeem, .agent = sender};
  if (!funded(sender) || window_open(now)) {
    ev.detail = funded(sender) ? "deferred" : "ignored";
    ev.amount = 0;
    emit(ev);
    return 0;
  }
  Address who = Address::of(sender);
  std::int64_t pay = machine_.accounts.get(who, p_.asset) + deposit(sender, p_.asset);
  long_[Address::contract()] -= pay;
  long_[who] += pay;
  machine_.accounts.set(who, p_.asset, 0);
  deposits_[{sender, p_.asset}] = 0;
  funded_[sender] = false;
  ev.amount = pay;
  ev.detail = "ok";
  emit(ev);
  return pay;
}

void Replica::slash(AgentId offender, Tick now) {
  if (p_.premium <= 0) return;
  std::vector<AgentId> victims;
  for (AgentId a : p_.agents) {
    if (a != offender && funded(a)) victims.push_back(a);
  }
  if (victims.empty()) return;
  std::int64_t own = 0;
  for (AssetId b : p_.assets) {
    auto key = std::make_pair(offender, b);
    std::int64_t amt = deposits_.count(key) ? deposits_[key] : 0;
    if (amt <= 0) continue;
    auto k = static_cast<std::int64_t>(victims.size());
    for (std::size_t i = 0; i < victims.size(); ++i) {
      std::int64_t credit = amt / k + (i == 0 ? amt % k : 0);
      machine_.accounts.add(Address::of(victims[i]), b, credit);
    }
    deposits_[key] = 0;
    if (b == p_.asset) own = amt;
  }
  emit({.tick = now, .kind = EventKind::Slash, .agent = offender, .amount = own});
}

bool Replica::settled(Tick now) const {
  if (!is_final()) return false;
  if (!p_.optimistic || log_.empty()) return true;
  return now >= start_.at(log_.back().round) + window();
}

std::optional<Tick> Replica::completion_tick() const {
  if (log_.empty()) return std::nullopt;
  return start_.at(log_.back().round) + window();
}

std::int64_t Replica::invariant_gap() const {
  std::int64_t shorts = machine_.accounts.total(p_.asset);
  for (const auto& [key, v] : deposits_) {
    if (key.second == p_.asset) shorts += v;
  }
  return long_balance(Address::contract()) - shorts;
}

bool Replica::invariant_holds() const {
  if (invariant_gap() != 0) return false;
  if (machine_.accounts.any_negative()) return false;
  for (const auto& [who, v] : long_) {
    if (v < 0) return false;
  }
  for (const auto& [key, v] : deposits_) {
    if (v < 0) return false;
  }
  return true;
}

Replica::View Replica::view(Tick now) const {
  View v{machine_, 0};
  if (!machine_.started) {
    v.round_start = start_.at(1);
    if (now >= v.round_start) v.state = machine_spec_->start(machine_);
    return v;
  }
  if (is_final()) {
    v.round_start = start_.at(machine_.round - 1);
    return v;
  }
  const Tick st = start_.at(machine_.round);
  v.round_start = st;
  if (!p_.optimistic && now >= st + window()) {
    auto d = candidates(machine_, machine_.round);
    if (d.size() == 1) {
      v.state = machine_spec_->apply(machine_, d.begin()->agent, d.begin()->move);
    } else {
      v.state = machine_spec_->apply(machine_, *machine_spec_->enabled(machine_),
                                     MoveDescriptor::skip());
    }
    v.round_start = st + window();
  }
  return v;
}

}  // namespace xsmr
