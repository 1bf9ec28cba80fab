#include "xsmr/config.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace xsmr {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// A problem tied to the n-th occurrence of a quoted key in the source.
struct Issue {
  std::string msg;
  std::string key;
  std::size_t occurrence = 0;
};

[[noreturn]] void fail(const std::string& msg, const std::string& key, std::size_t occ = 0) {
  throw Issue{msg, key, occ};
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

std::size_t locate(const std::string& text, const std::string& key, std::size_t occ) {
  if (key.empty()) return 1;
  const std::string needle = "\"" + key + "\"";
  std::size_t pos = std::string::npos;
  std::size_t from = 0;
  for (std::size_t i = 0; i <= occ; ++i) {
    std::size_t p = text.find(needle, from);
    if (p == std::string::npos) break;
    pos = p;
    from = p + 1;
  }
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

template <typename T>
T get(const json& j, const std::string& key, std::size_t occ = 0) {
  if (!j.contains(key)) fail("missing key \"" + key + "\"", key, occ);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("bad value for \"" + key + "\"", key, occ);
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, std::size_t occ = 0) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, occ);
}

class Parser {
 public:
  ScenarioConfig run(const json& root) {
    if (!root.is_object()) fail("top level must be an object", "");
    cfg_.name = get_or<std::string>(root, "name", "scenario");
    cfg_.assets = get<std::vector<std::string>>(root, "assets");
    auto delta = get_or<std::int64_t>(root, "delta", 10);
    if (delta < 1) fail("delta must be at least 1", "delta");
    cfg_.delta = static_cast<Tick>(delta);
    cfg_.seed = get_or<std::uint64_t>(root, "seed", 0);
    cfg_.premium = get_or<std::int64_t>(root, "premium", 0);
    if (root.contains("leader")) cfg_.leader = get<AgentId>(root, "leader");

    std::string mode = get_or<std::string>(root, "mode", "pessimistic");
    if (mode != "pessimistic" && mode != "optimistic") fail("unknown mode " + mode, "mode");
    cfg_.optimistic = mode == "optimistic";

    if (!root.contains("agents") || !root["agents"].is_array()) {
      fail("\"agents\" must be a list", "agents");
    }
    for (const auto& a : root["agents"]) agents(a);
    if (root.contains("network")) network(root["network"]);
    if (root.contains("expected_funding")) expected(root["expected_funding"]);
    if (root.contains("utility")) utility(root["utility"]);
    if (!root.contains("game")) fail("missing key \"game\"", "game");
    game(root["game"]);
    return cfg_;
  }

 private:
  AssetId asset(const json& v, const std::string& key, std::size_t occ = 0) {
    if (v.is_number_unsigned()) {
      auto a = v.get<AssetId>();
      if (a >= cfg_.assets.size()) fail("unknown asset index", key, occ);
      return a;
    }
    if (!v.is_string()) fail("asset must be a name", key, occ);
    auto name = v.get<std::string>();
    auto it = std::find(cfg_.assets.begin(), cfg_.assets.end(), name);
    if (it == cfg_.assets.end()) fail("unknown asset " + name, key, occ);
    return static_cast<AssetId>(it - cfg_.assets.begin());
  }

  std::map<AssetId, std::int64_t> amounts(const json& j, const std::string& key,
                                          std::size_t occ) {
    std::map<AssetId, std::int64_t> out;
    if (!j.is_object()) fail("\"" + key + "\" must map asset names to amounts", key, occ);
    for (const auto& [name, v] : j.items()) {
      if (!v.is_number_integer()) fail("amount for " + name + " must be an integer", key, occ);
      out[asset(json(name), key, occ)] = v.get<std::int64_t>();
    }
    return out;
  }

  static AgentId agent_key(const std::string& s, const std::string& key) {
    try {
      std::size_t used = 0;
      unsigned long v = std::stoul(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<AgentId>(v);
    } catch (const std::exception&) {
      fail("agent key must be a number: " + s, key);
    }
  }

  void agents(const json& a) {
    const std::size_t i = cfg_.agents.size();
    if (!a.is_object()) fail("agent entries must be objects", "agents");
    AgentSpec s;
    s.id = get<AgentId>(a, "id", i);
    std::string st = get_or<std::string>(a, "strategy", "compliant");
    auto strat = strategy_from_string(st);
    if (!strat) fail("unknown strategy " + st, "strategy", strategy_occ_);
    if (a.contains("strategy")) ++strategy_occ_;
    s.strategy = *strat;
    if (a.contains("params")) {
      const auto& p = a["params"];
      if (p.contains("target")) s.params.target = asset(p["target"], "target");
      s.params.relay = get_or<bool>(p, "relay", false);
      s.params.early = get_or<Tick>(p, "early", 0);
      s.params.claim = get_or<std::int64_t>(p, "claim", s.params.claim);
    }
    if (a.contains("balances")) s.balances = amounts(a["balances"], "balances", i);
    if (a.contains("fund")) s.fund = amounts(a["fund"], "fund", fund_occ_++);
    if (a.contains("topup")) s.topup = amounts(a["topup"], "topup", topup_occ_++);
    cfg_.agents.push_back(s);
  }

  void network(const json& n) {
    std::string mode = get_or<std::string>(n, "mode", "worst_case");
    if (mode == "worst_case") {
      cfg_.network.mode = NetworkMode::WorstCase;
    } else if (mode == "uniform_random") {
      cfg_.network.mode = NetworkMode::UniformRandom;
    } else if (mode == "scripted") {
      cfg_.network.mode = NetworkMode::Scripted;
    } else {
      fail("unknown network mode " + mode, "network");
    }
    cfg_.network.delays = get_or<std::vector<Tick>>(n, "delays", {});
    if (n.contains("default")) cfg_.network.default_delay = get<Tick>(n, "default");
  }

  void expected(const json& e) {
    std::string mode = get_or<std::string>(e, "mode", "exact");
    if (mode != "exact" && mode != "min") fail("unknown funding mode " + mode, "expected_funding");
    cfg_.expected.mode = mode == "exact" ? FundingMode::Exact : FundingMode::Min;
    std::string sf = get_or<std::string>(e, "on_shortfall", "halt");
    if (sf != "halt" && sf != "continue") fail("unknown on_shortfall " + sf, "on_shortfall");
    cfg_.expected.halt_on_shortfall = sf == "halt";
  }

  void utility(const json& u) {
    if (u.contains("valuations")) {
      for (const auto& [who, m] : u["valuations"].items()) {
        cfg_.utility.valuations[agent_key(who, "valuations")] = amounts(m, "valuations", 0);
      }
    }
    if (u.contains("proposal")) {
      for (const auto& [who, v] : u["proposal"].items()) {
        if (!v.is_number_integer()) fail("proposal value must be an integer", "proposal");
        cfg_.utility.proposal[agent_key(who, "proposal")] = v.get<std::int64_t>();
      }
    }
  }

  void game(const json& g) {
    std::string kind = get<std::string>(g, "kind");
    const json p = g.contains("params") ? g["params"] : json::object();
    if (kind == "swap") {
      SwapConfig c;
      c.alice = get_or<AgentId>(p, "alice", 0);
      c.bob = get_or<AgentId>(p, "bob", 1);
      c.florin = p.contains("florin") ? asset(p["florin"], "florin") : 0;
      c.ducat = p.contains("ducat") ? asset(p["ducat"], "ducat") : 1;
      c.amount = get_or<std::int64_t>(p, "amount", 1);
      cfg_.game = c;
    } else if (kind == "dao") {
      DaoConfig c;
      c.applicant = get<AgentId>(p, "applicant");
      c.lps = get<std::vector<AgentId>>(p, "lps");
      c.director = get<AgentId>(p, "director");
      c.treasury = get_or<AgentId>(p, "treasury", c.director);
      c.threshold = get<std::int64_t>(p, "threshold");
      c.payout = get_or<std::int64_t>(p, "payout", 100);
      c.florin = p.contains("florin") ? asset(p["florin"], "florin") : 0;
      c.token = p.contains("token") ? asset(p["token"], "token") : 1;
      if (p.contains("votes")) {
        for (const auto& [who, v] : p["votes"].items()) {
          DaoVote dv;
          dv.yes = get_or<bool>(v, "yes", true);
          if (v.contains("tokens")) dv.tokens = get<std::int64_t>(v, "tokens");
          c.votes[agent_key(who, "votes")] = dv;
        }
      }
      cfg_.game = c;
    } else if (kind == "auction") {
      AuctionConfig c;
      c.seller = get<AgentId>(p, "seller");
      c.bidders = get<std::vector<AgentId>>(p, "bidders");
      c.florin = p.contains("florin") ? asset(p["florin"], "florin") : 0;
      c.nft = p.contains("nft") ? asset(p["nft"], "nft") : 1;
      c.nft_units = get_or<std::int64_t>(p, "nft_units", 1);
      if (p.contains("plans")) {
        for (const auto& [who, v] : p["plans"].items()) {
          c.plans[agent_key(who, "plans")] = {get<std::int64_t>(v, "bid"),
                                              get_or<std::int64_t>(v, "nonce", 0)};
        }
      }
      cfg_.game = c;
    } else {
      fail("unknown game kind " + kind, "kind");
    }
  }

  ScenarioConfig cfg_;
  std::size_t strategy_occ_ = 0;
  std::size_t fund_occ_ = 0;
  std::size_t topup_occ_ = 0;
};

std::vector<AgentId> game_agents(const GameConfig& g) {
  return std::visit(
      [](const auto& c) -> std::vector<AgentId> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SwapConfig>) {
          return {c.alice, c.bob};
        } else if constexpr (std::is_same_v<T, DaoConfig>) {
          std::vector<AgentId> out = c.lps;
          out.push_back(c.applicant);
          out.push_back(c.director);
          out.push_back(c.treasury);
          return out;
        } else {
          std::vector<AgentId> out = c.bidders;
          out.push_back(c.seller);
          return out;
        }
      },
      g);
}

std::vector<AssetId> game_assets(const GameConfig& g) {
  return std::visit(
      [](const auto& c) -> std::vector<AssetId> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SwapConfig>) {
          return {c.florin, c.ducat};
        } else if constexpr (std::is_same_v<T, DaoConfig>) {
          return {c.florin, c.token};
        } else {
          return {c.florin, c.nft};
        }
      },
      g);
}

void check(const ScenarioConfig& cfg) {
  if (cfg.delta < 1) fail("delta must be at least 1", "delta");
  if (cfg.assets.empty()) fail("at least one asset is required", "assets");
  std::set<std::string> names(cfg.assets.begin(), cfg.assets.end());
  if (names.size() != cfg.assets.size()) fail("asset names must be unique", "assets");
  if (cfg.agents.size() < 2) fail("at least two agents are required", "agents");
  std::set<AgentId> ids;
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
    const auto& a = cfg.agents[i];
    if (!ids.insert(a.id).second) fail("duplicate agent id " + std::to_string(a.id), "id", i);
    for (const auto& [k, v] : a.balances) {
      if (v < 0 || k >= cfg.assets.size()) fail("balances must be non-negative", "balances", i);
    }
    for (const auto& [k, v] : a.fund) {
      if (v < 0 || k >= cfg.assets.size()) fail("fund must be non-negative", "fund");
    }
    if (a.topup) {
      for (const auto& [k, v] : *a.topup) {
        if (v < 0 || k >= cfg.assets.size()) fail("topup must be non-negative", "topup");
      }
    }
    if (a.params.target >= cfg.assets.size()) fail("unknown target replica", "target");
  }
  for (AgentId g : game_agents(cfg.game)) {
    if (!ids.count(g)) fail("game refers to unknown agent " + std::to_string(g), "game");
  }
  for (AssetId a : game_assets(cfg.game)) {
    if (a >= cfg.assets.size()) fail("game refers to unknown asset", "game");
  }
  if (const auto* s = std::get_if<SwapConfig>(&cfg.game)) {
    if (s->alice == s->bob) fail("swap needs two distinct agents", "game");
    if (s->florin == s->ducat) fail("swap needs two distinct assets", "game");
    if (s->amount < 1) fail("swap amount must be positive", "amount");
  }
  if (const auto* d = std::get_if<DaoConfig>(&cfg.game)) {
    if (d->payout < 0 || d->threshold < 0) fail("dao amounts must be non-negative", "game");
  }
  if (const auto* au = std::get_if<AuctionConfig>(&cfg.game)) {
    if (au->bidders.empty()) fail("auction needs bidders", "bidders");
    if (au->florin == au->nft) fail("auction needs two distinct assets", "game");
    for (const auto& [who, plan] : au->plans) {
      if (plan.bid < 0) fail("bids must be non-negative", "plans");
    }
  }
  if (cfg.premium < 0) fail("premium must be non-negative", "premium");
  if (cfg.leader && !ids.count(*cfg.leader)) fail("leader is not an agent", "leader");
  if (cfg.optimistic && !cfg.all_compliant()) {
    fail("optimistic mode requires all agents compliant", "mode");
  }
  const auto& net = cfg.network;
  for (Tick d : net.delays) {
    if (d < 1 || d > cfg.delta) fail("scripted delays must lie in [1, delta]", "delays");
  }
  if (net.default_delay && (*net.default_delay < 1 || *net.default_delay > cfg.delta)) {
    fail("default delay must lie in [1, delta]", "default");
  }
}

ojson amounts_json(const std::map<AssetId, std::int64_t>& m, const ScenarioConfig& cfg) {
  ojson j = ojson::object();
  for (const auto& [a, v] : m) j[cfg.assets.at(a)] = v;
  return j;
}

}  // namespace

std::vector<AgentId> ScenarioConfig::agent_ids() const {
  std::vector<AgentId> out;
  for (const auto& a : agents) out.push_back(a.id);
  std::sort(out.begin(), out.end());
  return out;
}

const AgentSpec* ScenarioConfig::agent(AgentId id) const {
  for (const auto& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

bool ScenarioConfig::all_compliant() const {
  return std::all_of(agents.begin(), agents.end(),
                     [](const AgentSpec& a) { return a.strategy == Strategy::Compliant; });
}

const char* to_string(NetworkMode m) {
  switch (m) {
    case NetworkMode::WorstCase:
      return "worst_case";
    case NetworkMode::UniformRandom:
      return "uniform_random";
    case NetworkMode::Scripted:
      return "scripted";
  }
  return "worst_case";
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    auto pos = what.find("parse error");
    throw ConfigError(pos == std::string::npos ? what : what.substr(pos),
                      line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  try {
    ScenarioConfig cfg = Parser().run(root);
    check(cfg);
    return cfg;
  } catch (const Issue& i) {
    throw ConfigError(i.msg, locate(text, i.key, i.occurrence));
  }
}

void validate_config(const ScenarioConfig& cfg) {
  try {
    check(cfg);
  } catch (const Issue& i) {
    throw ConfigError(i.msg, 0);
  }
}

std::string config_to_json(const ScenarioConfig& cfg) {
  ojson j;
  j["name"] = cfg.name;
  ojson g;
  ojson p;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SwapConfig>) {
          g["kind"] = "swap";
          p["alice"] = c.alice;
          p["bob"] = c.bob;
          p["florin"] = cfg.assets.at(c.florin);
          p["ducat"] = cfg.assets.at(c.ducat);
          p["amount"] = c.amount;
        } else if constexpr (std::is_same_v<T, DaoConfig>) {
          g["kind"] = "dao";
          p["applicant"] = c.applicant;
          p["lps"] = c.lps;
          p["director"] = c.director;
          p["treasury"] = c.treasury;
          p["threshold"] = c.threshold;
          p["payout"] = c.payout;
          p["florin"] = cfg.assets.at(c.florin);
          p["token"] = cfg.assets.at(c.token);
          ojson votes = ojson::object();
          for (const auto& [who, v] : c.votes) {
            ojson e;
            e["yes"] = v.yes;
            if (v.tokens) e["tokens"] = *v.tokens;
            votes[std::to_string(who)] = e;
          }
          p["votes"] = votes;
        } else {
          g["kind"] = "auction";
          p["seller"] = c.seller;
          p["bidders"] = c.bidders;
          p["florin"] = cfg.assets.at(c.florin);
          p["nft"] = cfg.assets.at(c.nft);
          p["nft_units"] = c.nft_units;
          ojson plans = ojson::object();
          for (const auto& [who, plan] : c.plans) {
            plans[std::to_string(who)] = {{"bid", plan.bid}, {"nonce", plan.nonce}};
          }
          p["plans"] = plans;
        }
      },
      cfg.game);
  g["params"] = p;
  j["game"] = g;
  j["assets"] = cfg.assets;
  ojson agents = ojson::array();
  for (const auto& a : cfg.agents) {
    ojson e;
    e["id"] = a.id;
    e["strategy"] = to_string(a.strategy);
    ojson params;
    if (a.strategy == Strategy::Withholder) {
      params["target"] = cfg.assets.at(a.params.target);
      params["relay"] = a.params.relay;
      params["early"] = a.params.early;
    }
    if (a.strategy == Strategy::InvalidFunder) params["claim"] = a.params.claim;
    if (!params.empty()) e["params"] = params;
    e["balances"] = amounts_json(a.balances, cfg);
    e["fund"] = amounts_json(a.fund, cfg);
    if (a.topup) e["topup"] = amounts_json(*a.topup, cfg);
    agents.push_back(e);
  }
  j["agents"] = agents;
  j["delta"] = cfg.delta;
  j["seed"] = cfg.seed;
  ojson net;
  net["mode"] = to_string(cfg.network.mode);
  if (!cfg.network.delays.empty()) net["delays"] = cfg.network.delays;
  if (cfg.network.default_delay) net["default"] = *cfg.network.default_delay;
  j["network"] = net;
  j["mode"] = cfg.optimistic ? "optimistic" : "pessimistic";
  j["premium"] = cfg.premium;
  if (cfg.leader) j["leader"] = *cfg.leader;
  j["expected_funding"] = {
      {"mode", cfg.expected.mode == FundingMode::Exact ? "exact" : "min"},
      {"on_shortfall", cfg.expected.halt_on_shortfall ? "halt" : "continue"}};
  ojson util;
  ojson vals = ojson::object();
  for (const auto& [who, m] : cfg.utility.valuations) vals[std::to_string(who)] = amounts_json(m, cfg);
  util["valuations"] = vals;
  ojson prop = ojson::object();
  for (const auto& [who, v] : cfg.utility.proposal) prop[std::to_string(who)] = v;
  util["proposal"] = prop;
  j["utility"] = util;
  return j.dump(2);
}

}  // namespace xsmr
