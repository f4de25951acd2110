#include "xanim/trace.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "xanim/json_writer.hpp"
#include "xanim/value_json.hpp"

namespace xanim {

namespace {

constexpr std::string_view kTypeNames[] = {
    "run_started",    "command",         "method_call",   "method_return", "instance_created", "instance_deleted",
    "attribute_set",  "link_created",    "link_removed",  "error",         "run_finished"};

template <class T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("field '") + key + "' has the wrong type");
  }
}

std::optional<InstanceId> optional_id(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_unsigned()) throw std::invalid_argument(std::string("field '") + key + "' must be an id or null");
  return v.get<InstanceId>();
}

}  // namespace

std::string_view event_type_name(EventType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

bool TraceEvent::changes_state() const {
  switch (type()) {
    case EventType::MethodCall:
    case EventType::MethodReturn:
    case EventType::InstanceCreated:
    case EventType::InstanceDeleted:
    case EventType::AttributeSet:
    case EventType::LinkCreated:
    case EventType::LinkRemoved: return true;
    default: return false;
  }
}

std::string serialize_event(const TraceEvent& e) {
  JsonWriter w;
  w.begin_object();
  w.key("seq").unsigned_integer(e.seq);
  w.key("type").string(event_type_name(e.type()));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, event::Command>) {
          w.key("class").string(p.class_name);
          w.key("col_end").integer(p.col_end);
          w.key("col_start").integer(p.col_start);
          w.key("line").integer(p.line);
          w.key("method").string(p.method);
        } else if constexpr (std::is_same_v<T, event::MethodCall>) {
          w.key("callee_id").optional_id(p.callee_id);
          w.key("caller_id").optional_id(p.caller_id);
          w.key("class").string(p.class_name);
          w.key("method").string(p.method);
          w.key("static").boolean(p.is_static);
        } else if constexpr (std::is_same_v<T, event::MethodReturn>) {
          w.key("value");
          if (p.value)
            w.value(*p.value);
          else
            w.null();
        } else if constexpr (std::is_same_v<T, event::InstanceCreated>) {
          w.key("class").string(p.class_name);
          w.key("id").unsigned_integer(p.id);
        } else if constexpr (std::is_same_v<T, event::InstanceDeleted>) {
          w.key("cascaded").boolean(p.cascaded);
          w.key("id").unsigned_integer(p.id);
        } else if constexpr (std::is_same_v<T, event::AttributeSet>) {
          w.key("attr").string(p.attr);
          w.key("id").unsigned_integer(p.id);
          w.key("value").value(p.value);
        } else if constexpr (std::is_same_v<T, event::LinkCreated>) {
          w.key("a").unsigned_integer(p.a);
          w.key("b").unsigned_integer(p.b);
          w.key("multiplicity_warning").boolean(p.multiplicity_warning);
          w.key("rel").string(p.rel);
        } else if constexpr (std::is_same_v<T, event::LinkRemoved>) {
          w.key("a").unsigned_integer(p.a);
          w.key("b").unsigned_integer(p.b);
          w.key("rel").string(p.rel);
        } else if constexpr (std::is_same_v<T, event::Error>) {
          w.key("kind").string(p.kind);
          w.key("line").integer(p.line);
          w.key("message").string(p.message);
        } else if constexpr (std::is_same_v<T, event::RunFinished>) {
          w.key("status").string(p.status);
        }
      },
      e.payload);
  w.end_object();
  return w.take();
}

TraceEvent parse_event(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& err) {
    throw std::invalid_argument(std::string("malformed event: ") + err.what());
  }
  if (!j.is_object()) throw std::invalid_argument("event must be a JSON object");
  TraceEvent e;
  e.seq = required<std::uint64_t>(j, "seq");
  auto type = required<std::string>(j, "type");
  if (type == "run_started") {
    e.payload = event::RunStarted{};
  } else if (type == "command") {
    e.payload = event::Command{required<std::string>(j, "class"), required<std::string>(j, "method"),
                               required<int>(j, "line"), required<int>(j, "col_start"), required<int>(j, "col_end")};
  } else if (type == "method_call") {
    e.payload = event::MethodCall{optional_id(j, "caller_id"), optional_id(j, "callee_id"),
                                  required<std::string>(j, "class"), required<std::string>(j, "method"),
                                  required<bool>(j, "static")};
  } else if (type == "method_return") {
    if (!j.contains("value")) throw std::invalid_argument("missing field 'value'");
    event::MethodReturn r;
    if (!j.at("value").is_null()) r.value = value_from_json(j.at("value"));
    e.payload = std::move(r);
  } else if (type == "instance_created") {
    e.payload = event::InstanceCreated{required<InstanceId>(j, "id"), required<std::string>(j, "class")};
  } else if (type == "instance_deleted") {
    e.payload = event::InstanceDeleted{required<InstanceId>(j, "id"), required<bool>(j, "cascaded")};
  } else if (type == "attribute_set") {
    if (!j.contains("value")) throw std::invalid_argument("missing field 'value'");
    e.payload = event::AttributeSet{required<InstanceId>(j, "id"), required<std::string>(j, "attr"),
                                    value_from_json(j.at("value"))};
  } else if (type == "link_created") {
    e.payload = event::LinkCreated{required<std::string>(j, "rel"), required<InstanceId>(j, "a"),
                                   required<InstanceId>(j, "b"), required<bool>(j, "multiplicity_warning")};
  } else if (type == "link_removed") {
    e.payload = event::LinkRemoved{required<std::string>(j, "rel"), required<InstanceId>(j, "a"),
                                   required<InstanceId>(j, "b")};
  } else if (type == "error") {
    e.payload = event::Error{required<std::string>(j, "kind"), required<std::string>(j, "message"),
                             required<int>(j, "line")};
  } else if (type == "run_finished") {
    e.payload = event::RunFinished{required<std::string>(j, "status")};
  } else {
    throw std::invalid_argument("unknown event type '" + type + "'");
  }
  return e;
}

TraceLog parse_trace(std::string_view text) {
  TraceLog log;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (line.empty()) throw std::invalid_argument("blank line in trace");
    log.push_back(parse_event(line));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return log;
}

std::string serialize_trace(std::span<const TraceEvent> log) {
  std::string out;
  for (const auto& e : log) {
    out += serialize_event(e);
    out += '\n';
  }
  return out;
}

namespace {

class TraceChecker {
 public:
  std::vector<Violation> run(std::span<const TraceEvent> log) {
    if (log.empty()) {
      out_.push_back({0, "empty trace"});
      return std::move(out_);
    }
    for (std::size_t i = 0; i < log.size(); ++i) check(log[i], i, log.size());
    const auto last = log.back().type();
    if (last == EventType::RunFinished && !calls_.empty())
      out_.push_back({log.back().seq, std::to_string(calls_.size()) + " method call(s) never returned"});
    return std::move(out_);
  }

 private:
  void report(const TraceEvent& e, std::string msg) { out_.push_back({e.seq, std::move(msg)}); }

  void require_live(const TraceEvent& e, InstanceId id) {
    if (live_.count(id)) return;
    report(e, (dead_.count(id) ? "deleted instance " : "unknown instance ") + std::to_string(id));
  }

  void check(const TraceEvent& e, std::size_t index, std::size_t size) {
    if (e.seq != index + 1)
      report(e, "sequence gap: expected seq " + std::to_string(index + 1) + ", found " + std::to_string(e.seq));
    const auto type = e.type();
    if (index == 0 && type != EventType::RunStarted) report(e, "trace must begin with run_started");
    if (index > 0 && type == EventType::RunStarted) report(e, "run_started after the first event");
    const bool terminal = type == EventType::RunFinished || type == EventType::Error;
    if (terminal && index + 1 != size) report(e, std::string(event_type_name(type)) + " before the end of the trace");
    if (index + 1 == size && !terminal) report(e, "trace must end with run_finished or error");

    if (type == EventType::Command) {
      seen_command_ = true;
      const auto& c = std::get<event::Command>(e.payload);
      if (c.line < 1) report(e, "command without a source line");
    } else if (e.changes_state() && !seen_command_) {
      check_prologue(e);
    }

    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, event::InstanceCreated>) {
            if (live_.count(p.id) || dead_.count(p.id))
              report(e, "instance id " + std::to_string(p.id) + " reused");
            else if (p.id <= last_id_)
              report(e, "instance ids not increasing at " + std::to_string(p.id));
            last_id_ = std::max(last_id_, p.id);
            live_.insert(p.id);
          } else if constexpr (std::is_same_v<T, event::InstanceDeleted>) {
            require_live(e, p.id);
            for (const auto& [rel, a, b] : links_)
              if (a == p.id || b == p.id) {
                report(e, "instance " + std::to_string(p.id) + " deleted while still linked across " + rel);
                break;
              }
            live_.erase(p.id);
            dead_.insert(p.id);
          } else if constexpr (std::is_same_v<T, event::AttributeSet>) {
            require_live(e, p.id);
          } else if constexpr (std::is_same_v<T, event::LinkCreated>) {
            require_live(e, p.a);
            require_live(e, p.b);
            if (!links_.emplace(p.rel, p.a, p.b).second) report(e, "duplicate link " + p.rel);
          } else if constexpr (std::is_same_v<T, event::LinkRemoved>) {
            require_live(e, p.a);
            require_live(e, p.b);
            if (!links_.erase({p.rel, p.a, p.b})) report(e, "removal of absent link " + p.rel);
          } else if constexpr (std::is_same_v<T, event::MethodCall>) {
            if (p.caller_id) require_live(e, *p.caller_id);
            if (p.callee_id) require_live(e, *p.callee_id);
            if (p.is_static && p.callee_id) report(e, "static call with a receiver instance");
            calls_.push_back(e.seq);
          } else if constexpr (std::is_same_v<T, event::MethodReturn>) {
            if (calls_.empty())
              report(e, "unbalanced return");
            else
              calls_.pop_back();
          } else if constexpr (std::is_same_v<T, event::RunFinished>) {
            if (p.status != "finished") report(e, "run_finished with status '" + p.status + "'");
          }
        },
        e.payload);
  }

  // Before the first command only the entry prologue may change state: the
  // auto-created receiver, its default attributes, and the entry call.
  void check_prologue(const TraceEvent& e) {
    if (const auto* c = std::get_if<event::InstanceCreated>(&e.payload)) {
      if (prologue_instance_ || entry_called_)
        report(e, "instance created before the first command");
      else
        prologue_instance_ = c->id;
      return;
    }
    if (const auto* a = std::get_if<event::AttributeSet>(&e.payload)) {
      if (!prologue_instance_ || a->id != *prologue_instance_ || entry_called_)
        report(e, "attribute set before the first command");
      return;
    }
    if (const auto* m = std::get_if<event::MethodCall>(&e.payload)) {
      if (entry_called_ || m->caller_id) report(e, "method call before the first command");
      entry_called_ = true;
      return;
    }
    report(e, std::string(event_type_name(e.type())) + " before the first command");
  }

  std::set<InstanceId> live_;
  std::set<InstanceId> dead_;
  std::set<std::tuple<std::string, InstanceId, InstanceId>> links_;
  std::vector<std::uint64_t> calls_;
  InstanceId last_id_ = 0;
  bool seen_command_ = false;
  std::optional<InstanceId> prologue_instance_;
  bool entry_called_ = false;
  std::vector<Violation> out_;
};

}  // namespace

std::vector<Violation> check_trace(std::span<const TraceEvent> log) { return TraceChecker().run(log); }

}  // namespace xanim
