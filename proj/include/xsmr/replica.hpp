#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "xsmr/core.hpp"
#include "xsmr/game.hpp"
#include "xsmr/trace.hpp"

namespace xsmr {

using FundMap = std::map<AssetId, std::int64_t>;

struct ReplicaParams {
  AssetId asset = 0;
  std::vector<AgentId> agents;
  std::vector<AssetId> assets;
  Tick delta = 10;
  std::optional<AgentId> leader;
  std::int64_t premium = 0;
  bool optimistic = false;
};

// A round outcome; an empty request means the round resolved to Skip.
struct LogEntry {
  std::uint64_t round = 0;
  std::optional<Request> request;
  Tick tick = 0;
  Tick start = 0;

  bool same_outcome(const LogEntry& o) const {
    return round == o.round && request == o.request;
  }
};

struct Buffered {
  PathSignature ps;
  Tick received = 0;
};

// The trusted, passive automaton for one asset. State changes only through
// the entry points below; everything else is read-only inspection.
class Replica {
 public:
  using Sink = std::function<void(const TraceEvent&)>;

  Replica(ReplicaParams params, std::shared_ptr<const Machine> machine,
          std::shared_ptr<const SignatureProvider> provider,
          std::map<AgentId, std::int64_t> long_balances, Sink sink = {});

  bool initialize(AgentId sender, const FundMap& fund, Tick now);
  bool send(const PathSignature& ps, Tick now);
  void deliver(Tick now);
  bool top_up(AgentId sender, const FundMap& fund, Tick now);
  void defund(AgentId sender, const std::map<AgentId, bool>& votes, Tick now);
  std::int64_t redeem(AgentId sender, Tick now);
  void slash(AgentId offender, Tick now);

  AssetId asset() const { return p_.asset; }
  std::size_t n() const { return p_.agents.size(); }
  Tick delta() const { return p_.delta; }
  Tick window() const { return static_cast<Tick>(n()) * p_.delta; }
  bool optimistic() const { return p_.optimistic; }
  const Machine& spec() const { return *machine_spec_; }
  const GameState& machine() const { return machine_; }
  const std::vector<LogEntry>& log() const { return log_; }
  const std::map<AgentId, std::vector<Buffered>>& buffer() const { return buffer_; }
  std::optional<Tick> start_time(std::uint64_t round) const;
  std::optional<AgentId> leader() const { return p_.leader; }

  bool funded(AgentId agent) const;
  std::int64_t long_balance(Address who) const;
  std::int64_t short_balance(AgentId agent, AssetId asset) const;
  std::int64_t deposit(AgentId agent, AssetId asset) const;

  bool is_final() const { return machine_spec_->is_final(machine_); }
  // Final, and in optimistic mode no executed round can still be challenged.
  bool settled(Tick now) const;
  // Close of the last resolved round's window.
  std::optional<Tick> completion_tick() const;

  // long(Self) = sum of short balances of this asset (agents and the
  // contract's own slot) plus outstanding premium deposits.
  bool invariant_holds() const;
  std::int64_t invariant_gap() const;

  // What an observer can infer at `now`: in pessimistic mode a round whose
  // acceptance window has closed is resolved in the copy even if deliver()
  // has not run yet.
  struct View {
    GameState state;
    Tick round_start = 0;
  };
  View view(Tick now) const;

 private:
  struct Snapshot {
    GameState machine;
    std::map<std::pair<AgentId, AssetId>, std::int64_t> deposits;
  };

  std::set<Request> candidates(const GameState& s, std::uint64_t round) const;
  void resolve_round(Tick now, const std::set<Request>& d, Tick next_start,
                     const std::string& skip_reason);
  void maybe_start(Tick now);
  void maybe_rollback(const Request& req, Tick now);
  void note_final(Tick now);
  void emit(TraceEvent ev) const;
  bool window_open(Tick now) const;

  ReplicaParams p_;
  std::shared_ptr<const Machine> machine_spec_;
  std::shared_ptr<const SignatureProvider> provider_;
  Sink sink_;

  std::map<Address, std::int64_t> long_;
  std::map<AgentId, bool> funded_;
  std::map<std::pair<AgentId, AssetId>, std::int64_t> deposits_;
  std::map<AgentId, std::vector<Buffered>> buffer_;
  std::set<Request> buffered_;
  GameState machine_;
  std::map<std::uint64_t, Tick> start_;
  std::vector<LogEntry> log_;
  std::map<std::uint64_t, Snapshot> snapshots_;
};

}  // namespace xsmr
