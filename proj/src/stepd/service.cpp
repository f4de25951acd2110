#include <istream>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "xanim/json_writer.hpp"
#include "xanim/stepd.hpp"
#include "xanim/value_json.hpp"

namespace xanim::stepd {

void FrameQueue::push(std::string frame) {
  {
    std::lock_guard lock(mu_);
    frames_.push_back(std::move(frame));
  }
  cv_.notify_one();
}

std::optional<std::string> FrameQueue::pop() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !frames_.empty(); });
  if (frames_.empty()) return std::nullopt;
  auto f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

std::optional<std::string> FrameQueue::try_pop() {
  std::lock_guard lock(mu_);
  if (frames_.empty()) return std::nullopt;
  auto f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

void FrameQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool FrameQueue::closed() {
  std::lock_guard lock(mu_);
  return closed_;
}

struct StepService::Request {
  std::optional<std::int64_t> id;
  std::string cmd;
  nlohmann::json body;
};

namespace {

struct Malformed {
  std::optional<std::int64_t> id;
  std::string message;
};

// Throws Malformed.
nlohmann::json parse_frame(std::string_view frame, std::optional<std::int64_t>& id, std::string& cmd) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(frame);
  } catch (const nlohmann::json::parse_error& e) {
    throw Malformed{std::nullopt, std::string("frame is not valid JSON: ") + e.what()};
  }
  if (!j.is_object()) throw Malformed{std::nullopt, "frame must be a JSON object"};
  if (!j.contains("id") || !j["id"].is_number_integer()) throw Malformed{std::nullopt, "frame needs an integer id"};
  id = j["id"].get<std::int64_t>();
  if (!j.contains("cmd") || !j["cmd"].is_string()) throw Malformed{id, "frame needs a string cmd"};
  cmd = j["cmd"].get<std::string>();
  return j;
}

bool is_interrupt(std::string_view frame) {
  try {
    auto j = nlohmann::json::parse(frame);
    if (!j.is_object() || !j.contains("cmd") || !j["cmd"].is_string()) return false;
    auto c = j["cmd"].get<std::string>();
    return c == "pause" || c == "stop";
  } catch (const nlohmann::json::parse_error&) {
    return false;
  }
}

}  // namespace

StepService::StepService(std::shared_ptr<const FusedModel> fused, FrameSink out, SessionOptions options)
    : fused_(std::move(fused)), out_(std::move(out)), options_(options) {}

void StepService::handle(std::string_view frame) {
  deferred_.emplace_back(frame);
  while (!deferred_.empty()) {
    auto next = std::move(deferred_.front());
    deferred_.pop_front();
    Request r;
    try {
      r.body = parse_frame(next, r.id, r.cmd);
    } catch (const Malformed& m) {
      r.id = m.id;
      reply_error(r, "malformed-command", m.message);
      continue;
    }
    dispatch(r);
  }
}

void StepService::dispatch(const Request& r) {
  if (r.cmd == "start") return do_start(r);
  if (r.cmd == "step") return do_step(r);
  if (r.cmd == "continue") return do_continue(r);
  if (r.cmd == "pause") return do_pause(r);
  if (r.cmd == "state") return do_state(r);
  if (r.cmd == "model") return do_model(r);
  if (r.cmd == "stop") return do_stop(r);
  reply_error(r, "malformed-command", "unknown command '" + r.cmd + "'");
}

void StepService::reply_ok(const Request& r, const std::string& data_json) {
  JsonWriter w;
  w.begin_object().key("id");
  if (r.id)
    w.integer(*r.id);
  else
    w.null();
  w.key("ok").boolean(true).key("data").raw(data_json).end_object();
  out_(w.str());
}

void StepService::reply_error(const Request& r, std::string_view kind, const std::string& message,
                              std::string_view cause) {
  JsonWriter w;
  w.begin_object().key("id");
  if (r.id)
    w.integer(*r.id);
  else
    w.null();
  w.key("ok").boolean(false).key("error").begin_object().key("kind").string(kind).key("message").string(message);
  if (!cause.empty()) w.key("cause").string(cause);
  w.end_object().end_object();
  out_(w.str());
}

std::string StepService::status_json() const {
  JsonWriter w;
  w.begin_object().key("status");
  if (session_)
    w.string(session_status_name(session_->status()));
  else
    w.null();
  if (session_) w.key("commands").unsigned_integer(session_->commands_executed());
  w.end_object();
  return w.take();
}

bool StepService::require_session(const Request& r) {
  if (session_) return true;
  reply_error(r, "no-session", "no session has been started");
  return false;
}

void StepService::do_start(const Request& r) {
  if (session_ && (session_->status() != SessionStatus::Finished && session_->status() != SessionStatus::Failed)) {
    reply_error(r, "session-already-active", "a session is already running; stop it first");
    return;
  }
  const auto& b = r.body;
  if (!b.contains("entry") || !b["entry"].is_string()) {
    reply_error(r, "malformed-command", "start needs an entry \"Class.Method\"");
    return;
  }
  auto entry = b["entry"].get<std::string>();
  auto dot = entry.find('.');
  if (dot == std::string::npos || !is_identifier(entry.substr(0, dot)) || !is_identifier(entry.substr(dot + 1))) {
    reply_error(r, "malformed-command", "entry must look like Class.Method");
    return;
  }
  std::vector<Value> args;
  if (b.contains("args")) {
    if (!b["args"].is_array()) {
      reply_error(r, "malformed-command", "args must be a list of tagged values");
      return;
    }
    try {
      for (const auto& a : b["args"]) args.push_back(value_from_json(a));
    } catch (const std::invalid_argument& e) {
      reply_error(r, "malformed-command", std::string("bad argument: ") + e.what());
      return;
    }
  }
  session_.reset();
  buffering_ = true;
  buffered_events_.clear();
  auto sink = [this](const TraceEvent& e) {
    auto frame = "{\"event\":" + serialize_event(e) + "}";
    if (buffering_)
      buffered_events_.push_back(std::move(frame));
    else
      out_(frame);
  };
  try {
    session_ = start_session(fused_, entry.substr(0, dot), entry.substr(dot + 1), std::move(args), sink, options_);
  } catch (const StartError& e) {
    buffering_ = false;
    buffered_events_.clear();
    reply_error(r, "bad-entry", e.what(), start_error_kind_name(e.kind()));
    return;
  }
  buffering_ = false;
  reply_ok(r, status_json());
  for (auto& f : buffered_events_) out_(f);
  buffered_events_.clear();
}

void StepService::do_step(const Request& r) {
  if (!require_session(r)) return;
  auto st = session_->status();
  if (st == SessionStatus::Finished || st == SessionStatus::Failed) {
    reply_error(r, "session-finished", "the session has already " + std::string(st == SessionStatus::Finished ? "finished" : "failed"));
    return;
  }
  session_->step();
  reply_ok(r, status_json());
}

void StepService::do_continue(const Request& r) {
  if (!require_session(r)) return;
  auto st = session_->status();
  if (st == SessionStatus::Finished || st == SessionStatus::Failed) {
    reply_error(r, "session-finished", "the session has already " + std::string(st == SessionStatus::Finished ? "finished" : "failed"));
    return;
  }
  std::optional<std::string> interrupt;
  while (session_->step().kind == StepOutcome::Kind::Progressed) {
    if (cancel_ && cancel_()) break;
    if (!poll_) continue;
    bool halted = false;
    while (auto f = poll_()) {
      if (is_interrupt(*f)) {
        interrupt = std::move(f);
        halted = true;
        break;
      }
      deferred_.push_back(std::move(*f));
    }
    if (halted) break;
  }
  reply_ok(r, status_json());
  // The interrupting pause or stop is answered right after the continue.
  if (interrupt) deferred_.push_front(std::move(*interrupt));
}

void StepService::do_pause(const Request& r) {
  if (!require_session(r)) return;
  reply_ok(r, status_json());
}

void StepService::do_state(const Request& r) {
  if (!require_session(r)) return;
  reply_ok(r, session_->snapshot().to_json());
}

void StepService::do_model(const Request& r) { reply_ok(r, model_to_json(fused_->model).dump()); }

void StepService::do_stop(const Request& r) {
  if (!require_session(r)) return;
  session_.reset();
  reply_ok(r, status_json());
}

void serve_stdio(std::shared_ptr<const FusedModel> fused, std::istream& in, std::ostream& out, SessionOptions options) {
  FrameQueue queue;
  StepService service(std::move(fused), [&out](const std::string& f) { out << f << '\n' << std::flush; }, options);
  service.set_poll([&queue] { return queue.try_pop(); });
  std::thread reader([&] {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      queue.push(line);
    }
    queue.close();
  });
  while (auto f = queue.pop()) service.handle(*f);
  reader.join();
}

}  // namespace xanim::stepd
