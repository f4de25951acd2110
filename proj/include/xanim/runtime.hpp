#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xanim/ingest.hpp"
#include "xanim/trace.hpp"
#include "xanim/value.hpp"

namespace xanim {

enum class RuntimeErrorKind {
  StaleHandle,
  NoneDereference,
  TypeMismatch,
  DivisionByZero,
  UnknownMethod,
  ArityMismatch,
  CallDepthExceeded,
  StepBudgetExhausted,
  UndefinedVariable,
  UnknownAttribute,
  UnknownClass,
  UnknownRelation,
  Overflow,
};

std::string_view runtime_error_kind_name(RuntimeErrorKind k);

struct RuntimeError {
  RuntimeErrorKind kind = RuntimeErrorKind::TypeMismatch;
  std::string message;
  int line = 0;
};

enum class SessionStatus { Ready, Running, Paused, Finished, Failed };

std::string_view session_status_name(SessionStatus s);

enum class StartErrorKind { UnknownEntry, EmptyBodyEntry, ArityMismatch, TypeMismatch };

std::string_view start_error_kind_name(StartErrorKind k);

class StartError : public std::runtime_error {
 public:
  StartError(StartErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  StartErrorKind kind() const { return kind_; }

 private:
  StartErrorKind kind_;
};

struct ObjectInstance {
  InstanceId id = 0;
  std::string class_name;
  std::map<std::string, Value> attrs;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

/// A link of relation `rel`; `a` plays the relation's `from` end.
struct Link {
  std::string rel;
  InstanceId a = 0;
  InstanceId b = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

/// Canonical copy of the object-diagram state.
struct Snapshot {
  std::vector<ObjectInstance> instances;  // ascending id
  std::vector<Link> links;                // ascending (rel, a, b)
  SessionStatus status = SessionStatus::Ready;
  std::optional<Value> return_value;

  /// Single-line JSON, byte-comparable between runs.
  std::string to_json() const;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct StepOutcome {
  enum class Kind { Progressed, Finished, Failed };

  Kind kind = Kind::Progressed;
  std::optional<Value> value;         // Finished: returned value, if any
  std::optional<RuntimeError> error;  // Failed
};

using EventSink = std::function<void(const TraceEvent&)>;

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000;
inline constexpr std::size_t kMaxCallDepth = 1024;
/// Longest string a concatenation may produce.
inline constexpr std::size_t kMaxStringLength = std::size_t{1} << 24;

struct SessionOptions {
  std::uint64_t step_budget = kDefaultStepBudget;
};

/// One execution of an entry method. Stepping runs the interpreter on its
/// own stack and suspends it before each command, so a step stops exactly
/// at the next command boundary even inside nested calls.
class ExecSession {
 public:
  ~ExecSession();
  ExecSession(const ExecSession&) = delete;
  ExecSession& operator=(const ExecSession&) = delete;

  /// Executes one command. Calling it on a finished or failed session
  /// returns the final outcome again without emitting anything.
  StepOutcome step();

  SessionStatus status() const;
  Snapshot snapshot() const;
  std::uint64_t commands_executed() const;
  const FusedModel& fused() const;

 private:
  friend std::unique_ptr<ExecSession> start_session(std::shared_ptr<const FusedModel>, std::string_view,
                                                    std::string_view, std::vector<Value>, EventSink,
                                                    SessionOptions);
  struct Impl;
  explicit ExecSession(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Validates the entry and emits the prologue: run_started, the entry
/// instance for non-static entries, and the entry's method_call.
/// Throws StartError.
std::unique_ptr<ExecSession> start_session(std::shared_ptr<const FusedModel> fused, std::string_view cls,
                                           std::string_view method, std::vector<Value> args, EventSink sink,
                                           SessionOptions options = {});

inline StepOutcome step_command(ExecSession& s) { return s.step(); }

/// Steps until the session finishes or fails.
Snapshot run_to_completion(ExecSession& s);

inline Snapshot snapshot(const ExecSession& s) { return s.snapshot(); }

/// Sink appending every event to `log`.
inline EventSink collect_into(TraceLog& log) {
  return [&log](const TraceEvent& e) { log.push_back(e); };
}

}  // namespace xanim
