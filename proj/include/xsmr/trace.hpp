#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xsmr/core.hpp"

namespace xsmr {

enum class EventKind {
  Send,
  Buffer,
  Execute,
  Skip,
  Fund,
  TopUp,
  Defund,
  Redeem,
  Slash,
  Rollback,
  Halt,
  Check,
};

const char* to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(const std::string& s);

// One line of the JSONL trace. Which optional fields are present depends on
// the kind; docs/trace.md lists them.
struct TraceEvent {
  Tick tick = 0;
  EventKind kind = EventKind::Check;
  std::optional<AssetId> replica;
  std::optional<AgentId> agent;
  std::optional<std::uint64_t> round;
  std::optional<Request> request;
  std::vector<AgentId> path;
  std::optional<std::int64_t> amount;
  std::optional<Tick> start;
  std::optional<Tick> due;
  std::string detail;

  bool operator==(const TraceEvent&) const = default;
};

inline constexpr int kTraceVersion = 1;

std::string trace_header_line();
std::string to_json_line(const TraceEvent& ev);
TraceEvent event_from_json_line(const std::string& line);

void write_trace(std::ostream& os, const std::vector<TraceEvent>& events);
// Throws std::runtime_error on malformed lines or an unknown version.
std::vector<TraceEvent> read_trace(std::istream& is);

}  // namespace xsmr
