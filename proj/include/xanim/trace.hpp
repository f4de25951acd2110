#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xanim/value.hpp"

namespace xanim {

namespace event {

struct RunStarted {};

struct Command {
  std::string class_name;  // class owning the executing method body
  std::string method;
  int line = 0;
  int col_start = 0;
  int col_end = 0;
};

struct MethodCall {
  std::optional<InstanceId> caller_id;
  std::optional<InstanceId> callee_id;
  std::string class_name;  // owning class, as resolved through the generalization chain
  std::string method;
  bool is_static = false;
};

struct MethodReturn {
  std::optional<Value> value;
};

struct InstanceCreated {
  InstanceId id = 0;
  std::string class_name;
};

struct InstanceDeleted {
  InstanceId id = 0;
  bool cascaded = false;
};

struct AttributeSet {
  InstanceId id = 0;
  std::string attr;
  Value value;
};

struct LinkCreated {
  std::string rel;
  InstanceId a = 0;
  InstanceId b = 0;
  bool multiplicity_warning = false;
};

struct LinkRemoved {
  std::string rel;
  InstanceId a = 0;
  InstanceId b = 0;
};

struct Error {
  std::string kind;
  std::string message;
  int line = 0;
};

struct RunFinished {
  std::string status;
};

}  // namespace event

enum class EventType {
  RunStarted,
  Command,
  MethodCall,
  MethodReturn,
  InstanceCreated,
  InstanceDeleted,
  AttributeSet,
  LinkCreated,
  LinkRemoved,
  Error,
  RunFinished,
};

std::string_view event_type_name(EventType t);

/// One animation event. The payload alternative order matches EventType.
struct TraceEvent {
  using Payload = std::variant<event::RunStarted, event::Command, event::MethodCall, event::MethodReturn,
                               event::InstanceCreated, event::InstanceDeleted, event::AttributeSet,
                               event::LinkCreated, event::LinkRemoved, event::Error, event::RunFinished>;

  std::uint64_t seq = 0;
  Payload payload;

  EventType type() const { return static_cast<EventType>(payload.index()); }
  /// True for events that change the object-diagram state.
  bool changes_state() const;
};

using TraceLog = std::vector<TraceEvent>;

/// One JSON line (no newline): seq, type, then payload keys alphabetically.
std::string serialize_event(const TraceEvent& e);

/// Inverse of serialize_event. Throws std::invalid_argument on bad input.
TraceEvent parse_event(std::string_view line);

/// Parses a JSONL document; blank lines are rejected.
TraceLog parse_trace(std::string_view text);

/// Serializes a whole log, one event per line, each line '\n'-terminated.
std::string serialize_trace(std::span<const TraceEvent> log);

struct Violation {
  std::uint64_t seq = 0;  // offending event, 0 when the log as a whole is at fault
  std::string message;
};

/// Structural checks over a complete trace; empty result means well-formed.
std::vector<Violation> check_trace(std::span<const TraceEvent> log);

}  // namespace xanim
