#include "xsmr/trace.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace xsmr {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::array<const char*, 12> kNames = {
    "send", "buffer", "execute", "skip", "fund", "topup",
    "defund", "redeem", "slash", "rollback", "halt", "check"};

ojson request_json(const Request& r) {
  ojson j;
  j["agent"] = r.agent;
  j["round"] = r.round;
  j["move"] = r.move.name;
  ojson args = ojson::array();
  for (const auto& a : r.move.args) {
    if (const auto* v = std::get_if<std::int64_t>(&a)) {
      args.push_back(*v);
    } else {
      args.push_back("0x" + to_hex(std::get<Bytes>(a)));
    }
  }
  j["args"] = args;
  return j;
}

Request request_from(const ojson& j) {
  Request r;
  r.agent = j.at("agent").get<AgentId>();
  r.round = j.at("round").get<std::uint64_t>();
  r.move.name = j.at("move").get<std::string>();
  for (const auto& a : j.at("args")) {
    if (a.is_string()) {
      auto s = a.get<std::string>();
      if (s.rfind("0x", 0) != 0) throw std::runtime_error("byte argument must start with 0x");
      r.move.args.emplace_back(from_hex(s.substr(2)));
    } else {
      r.move.args.emplace_back(a.get<std::int64_t>());
    }
  }
  return r;
}

}  // namespace

const char* to_string(EventKind k) { return kNames[static_cast<std::size_t>(k)]; }

std::optional<EventKind> event_kind_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (s == kNames[i]) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::string trace_header_line() {
  ojson j;
  j["trace"] = "xsmr";
  j["version"] = kTraceVersion;
  return j.dump();
}

std::string to_json_line(const TraceEvent& ev) {
  ojson j;
  j["tick"] = ev.tick;
  j["kind"] = to_string(ev.kind);
  if (ev.replica) j["replica"] = *ev.replica;
  if (ev.agent) j["agent"] = *ev.agent;
  if (ev.round) j["round"] = *ev.round;
  if (ev.request) j["request"] = request_json(*ev.request);
  if (!ev.path.empty()) j["path"] = ev.path;
  if (ev.amount) j["amount"] = *ev.amount;
  if (ev.start) j["start"] = *ev.start;
  if (ev.due) j["due"] = *ev.due;
  if (!ev.detail.empty()) j["detail"] = ev.detail;
  return j.dump();
}

TraceEvent event_from_json_line(const std::string& line) {
  auto j = ojson::parse(line);
  TraceEvent ev;
  ev.tick = j.at("tick").get<Tick>();
  auto kind = event_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown event kind");
  ev.kind = *kind;
  if (j.contains("replica")) ev.replica = j["replica"].get<AssetId>();
  if (j.contains("agent")) ev.agent = j["agent"].get<AgentId>();
  if (j.contains("round")) ev.round = j["round"].get<std::uint64_t>();
  if (j.contains("request")) ev.request = request_from(j["request"]);
  if (j.contains("path")) ev.path = j["path"].get<std::vector<AgentId>>();
  if (j.contains("amount")) ev.amount = j["amount"].get<std::int64_t>();
  if (j.contains("start")) ev.start = j["start"].get<Tick>();
  if (j.contains("due")) ev.due = j["due"].get<Tick>();
  if (j.contains("detail")) ev.detail = j["detail"].get<std::string>();
  return ev;
}

void write_trace(std::ostream& os, const std::vector<TraceEvent>& events) {
  os << trace_header_line() << '\n';
  for (const auto& ev : events) os << to_json_line(ev) << '\n';
}

std::vector<TraceEvent> read_trace(std::istream& is) {
  std::vector<TraceEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      if (lineno == 1) {
        auto h = ojson::parse(line);
        if (h.contains("trace")) {
          if (h.value("version", 0) != kTraceVersion) {
            throw std::runtime_error("unsupported trace version");
          }
          continue;
        }
      }
      out.push_back(event_from_json_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace xsmr
