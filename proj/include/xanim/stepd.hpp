#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "xanim/runtime.hpp"

namespace xanim::stepd {

/// Thread-safe FIFO of inbound frames.
class FrameQueue {
 public:
  void push(std::string frame);
  /// Blocks until a frame arrives; nullopt once closed and drained.
  std::optional<std::string> pop();
  std::optional<std::string> try_pop();
  void close();
  bool closed();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> frames_;
  bool closed_ = false;
};

using FrameSink = std::function<void(const std::string&)>;
using FramePoll = std::function<std::optional<std::string>()>;

/// Protocol state machine for one client: at most one session, replies and
/// pushed `{"event":...}` frames go to the sink in order.
class StepService {
 public:
  StepService(std::shared_ptr<const FusedModel> fused, FrameSink out, SessionOptions options = {});

  /// Source of frames that arrive while `continue` runs. Pause and stop take
  /// effect at the next command boundary; anything else waits its turn.
  void set_poll(FramePoll poll) { poll_ = std::move(poll); }
  /// Checked between steps of a `continue`; true abandons the run loop.
  void set_cancel(std::function<bool()> cancel) { cancel_ = std::move(cancel); }

  void handle(std::string_view frame);

  bool has_session() const { return session_ != nullptr; }
  void discard_session() { session_.reset(); }

 private:
  struct Request;

  void dispatch(const Request& r);
  void do_start(const Request& r);
  void do_step(const Request& r);
  void do_continue(const Request& r);
  void do_pause(const Request& r);
  void do_state(const Request& r);
  void do_model(const Request& r);
  void do_stop(const Request& r);

  bool require_session(const Request& r);
  void reply_ok(const Request& r, const std::string& data_json);
  void reply_error(const Request& r, std::string_view kind, const std::string& message,
                   std::string_view cause = {});
  std::string status_json() const;

  std::shared_ptr<const FusedModel> fused_;
  FrameSink out_;
  SessionOptions options_;
  FramePoll poll_;
  std::function<bool()> cancel_;
  std::unique_ptr<ExecSession> session_;
  std::deque<std::string> deferred_;
  bool buffering_ = false;
  std::deque<std::string> buffered_events_;
};

/// Serves newline-delimited frames from `in`, writing to `out`. Reading runs
/// on its own thread so a pause can interrupt a continue. Returns at EOF
/// after the remaining frames are handled.
void serve_stdio(std::shared_ptr<const FusedModel> fused, std::istream& in, std::ostream& out,
                 SessionOptions options = {});

struct WebSocketOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  SessionOptions session;
};

/// Single-client WebSocket endpoint. A second concurrent client receives a
/// busy error frame and is closed; when the client leaves its session is
/// discarded.
class WebSocketServer {
 public:
  /// Binds immediately; throws std::runtime_error on bind failure.
  WebSocketServer(std::shared_ptr<const FusedModel> fused, WebSocketOptions options);
  ~WebSocketServer();
  WebSocketServer(const WebSocketServer&) = delete;
  WebSocketServer& operator=(const WebSocketServer&) = delete;

  std::uint16_t port() const;
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xanim::stepd
