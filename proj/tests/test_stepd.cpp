#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "support/support.hpp"
#include "xanim/stepd.hpp"

using namespace xanim;
using nlohmann::json;

namespace {

struct Driver {
  std::vector<std::string> frames;
  stepd::StepService svc;

  explicit Driver(std::shared_ptr<const FusedModel> fused, SessionOptions o = {})
      : svc(std::move(fused), [this](const std::string& f) { frames.push_back(f); }, o) {}

  std::vector<std::string> send(const std::string& frame) {
    auto before = frames.size();
    svc.handle(frame);
    return {frames.begin() + static_cast<std::ptrdiff_t>(before), frames.end()};
  }
};

std::vector<json> replies(const std::vector<std::string>& frames) {
  std::vector<json> out;
  for (const auto& f : frames) {
    auto j = json::parse(f);
    if (!j.contains("event")) out.push_back(j);
  }
  return out;
}

// Concatenates the event frames as trace-file lines.
std::string events_as_trace(const std::vector<std::string>& frames) {
  std::string out;
  for (const auto& f : frames) {
    auto j = json::parse(f);
    if (!j.contains("event")) continue;
    // The frame is {"event":<line>}; strip the wrapper without reformatting.
    out += f.substr(9, f.size() - 10) + "\n";
  }
  return out;
}

std::string entry_of(const xt::Fixture& fx) { return fx.entry.class_name + "." + fx.entry.method; }

std::string start_frame(int id, const xt::Fixture& fx) {
  return R"({"id":)" + std::to_string(id) + R"(,"cmd":"start","entry":")" + entry_of(fx) + R"(","args":)" +
         fx.args_json + "}";
}

namespace beast = boost::beast;
namespace ws = beast::websocket;
using tcp = boost::asio::ip::tcp;

struct Client {
  boost::asio::io_context ioc;
  ws::stream<tcp::socket> s{ioc};

  explicit Client(std::uint16_t port) {
    tcp::resolver r(ioc);
    boost::asio::connect(s.next_layer(), r.resolve("127.0.0.1", std::to_string(port)));
    s.handshake("127.0.0.1", "/");
  }
  void send(const std::string& f) { s.write(boost::asio::buffer(f)); }
  std::string read() {
    beast::flat_buffer b;
    s.read(b);
    return beast::buffers_to_string(b.data());
  }
  // Reads until the reply for `id` arrives.
  json reply(int id) {
    for (;;) {
      auto j = json::parse(read());
      if (j.contains("id") && j["id"] == id) return j;
    }
  }
};

struct ServerThread {
  stepd::WebSocketServer server;
  std::thread t;
  explicit ServerThread(std::shared_ptr<const FusedModel> fused) : server(std::move(fused), {}) {
    t = std::thread([this] { server.run(); });
  }
  ~ServerThread() {
    server.stop();
    t.join();
  }
};

}  // namespace

TEST_SUITE("stepd") {
  TEST_CASE("step without a session") {
    Driver d(xt::fuse_fixture(xt::fixture("observer")));
    auto out = d.send(R"({"id":1,"cmd":"step"})");
    REQUIRE(out.size() == 1);
    auto j = json::parse(out[0]);
    CHECK(j["id"] == 1);
    CHECK(j["ok"] == false);
    CHECK(j["error"]["kind"] == "no-session");
    CHECK(replies(d.send(R"({"id":2,"cmd":"state"})"))[0]["error"]["kind"] == "no-session");
  }

  TEST_CASE("start then state shows an empty heap") {
    const auto& fx = xt::fixture("observer");
    Driver d(xt::fuse_fixture(fx));
    auto out = d.send(start_frame(1, fx));
    auto rs = replies(out);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0]["ok"] == true);
    CHECK(json::parse(out[0])["id"] == 1);  // reply precedes the prologue events
    CHECK(events_as_trace(out).find("run_started") != std::string::npos);
    auto st = replies(d.send(R"({"id":2,"cmd":"state"})"));
    REQUIRE(st.size() == 1);
    CHECK(st[0]["data"]["instances"].empty());
    CHECK(st[0]["data"]["links"].empty());
  }

  TEST_CASE("stepping to the end reproduces the batch trace") {
    for (const auto& fx : xt::load_fixtures()) {
      if (fx.name == "empty_entry") continue;
      auto fused = xt::fuse_fixture(fx);
      auto batch = serialize_trace(xt::run_entry(fused, fx.entry, fx.args, fx.max_steps).log);

      Driver stepped(fused, {fx.max_steps});
      std::vector<std::string> all = stepped.send(start_frame(1, fx));
      for (int id = 2;; ++id) {
        auto out = stepped.send(R"({"id":)" + std::to_string(id) + R"(,"cmd":"step"})");
        all.insert(all.end(), out.begin(), out.end());
        auto r = replies(out);
        REQUIRE(r.size() == 1);
        REQUIRE(r[0]["ok"] == true);
        auto status = r[0]["data"]["status"].get<std::string>();
        if (status == "finished" || status == "failed") break;
        REQUIRE(id < 1'000'000);
      }
      CHECK_MESSAGE(events_as_trace(all) == batch, fx.name);

      Driver continued(fused, {fx.max_steps});
      auto a = continued.send(start_frame(1, fx));
      auto b = continued.send(R"({"id":2,"cmd":"continue"})");
      a.insert(a.end(), b.begin(), b.end());
      CHECK_MESSAGE(events_as_trace(a) == batch, fx.name);
      auto last = replies(b);
      REQUIRE(last.size() == 1);
      CHECK(last[0]["data"]["status"] == fx.expect_status);
      CHECK(replies(continued.send(R"({"id":3,"cmd":"step"})"))[0]["error"]["kind"] == "session-finished");
    }
  }

  TEST_CASE("protocol errors") {
    const auto& fx = xt::fixture("observer");
    Driver d(xt::fuse_fixture(fx));
    auto bad = json::parse(d.send(R"({"cmd":})")[0]);
    CHECK(bad["id"].is_null());
    CHECK(bad["error"]["kind"] == "malformed-command");
    CHECK(replies(d.send(R"({"id":5,"cmd":"fly"})"))[0]["error"]["kind"] == "malformed-command");
    CHECK(replies(d.send(R"({"id":6})"))[0]["id"] == 6);
    CHECK(replies(d.send(R"({"id":7,"cmd":"start","entry":"Nope"})"))[0]["error"]["kind"] == "malformed-command");

    auto be = replies(d.send(R"({"id":8,"cmd":"start","entry":"Ghost.Boo"})"));
    CHECK(be[0]["error"]["kind"] == "bad-entry");
    CHECK(be[0]["error"]["cause"] == "unknown-entry");
    CHECK_FALSE(d.svc.has_session());

    CHECK(replies(d.send(start_frame(9, fx)))[0]["ok"] == true);
    CHECK(replies(d.send(start_frame(10, fx)))[0]["error"]["kind"] == "session-already-active");
    CHECK(replies(d.send(R"({"id":11,"cmd":"stop"})"))[0]["ok"] == true);
    CHECK_FALSE(d.svc.has_session());
    CHECK(replies(d.send(start_frame(12, fx)))[0]["ok"] == true);
  }

  TEST_CASE("bad entry carries the start error kind") {
    const auto& fx = xt::fixture("empty_entry");
    Driver d(xt::fuse_fixture(fx));
    auto r = replies(d.send(R"({"id":1,"cmd":"start","entry":"Idle.Nothing"})"));
    CHECK(r[0]["error"]["kind"] == "bad-entry");
    CHECK(r[0]["error"]["cause"] == "empty-body-entry");
    CHECK(r[0]["error"]["message"].get<std::string>().find("at least one command") != std::string::npos);
    CHECK(d.frames.size() == 1);  // no events leak from a refused start
  }

  TEST_CASE("model command returns the class layer") {
    const auto& fx = xt::fixture("inheritance");
    auto fused = xt::fuse_fixture(fx);
    Driver d(fused);
    auto r = replies(d.send(R"({"id":1,"cmd":"model"})"));
    REQUIRE(r[0]["ok"] == true);
    CHECK(load_model_json(r[0]["data"].dump()) == fused->model);
  }

  TEST_CASE("pause interrupts a continue at a command boundary") {
    const auto& fx = xt::fixture("recursion");
    Driver d(xt::fuse_fixture(fx));
    d.send(start_frame(1, fx));
    int polls = 0;
    d.svc.set_poll([&]() -> std::optional<std::string> {
      ++polls;
      if (polls == 1) return std::string(R"({"id":3,"cmd":"state"})");
      if (polls == 5) return std::string(R"({"id":4,"cmd":"pause"})");
      return std::nullopt;
    });
    auto out = d.send(R"({"id":2,"cmd":"continue"})");
    auto r = replies(out);
    REQUIRE(r.size() == 3);
    CHECK(r[0]["id"] == 2);
    CHECK(r[0]["data"]["status"] == "paused");
    // Boundary 1 drains the state frame plus an empty poll; later boundaries poll once.
    CHECK(r[0]["data"]["commands"] == 4);
    CHECK(r[1]["id"] == 4);
    CHECK(r[2]["id"] == 3);
    // Resumes to the same end state as an uninterrupted run.
    d.svc.set_poll({});
    auto rest = replies(d.send(R"({"id":5,"cmd":"continue"})"));
    CHECK(rest[0]["data"]["status"] == "finished");
    auto st = replies(d.send(R"({"id":6,"cmd":"state"})"));
    CHECK(st[0]["data"].dump() == json::parse(xt::run_fixture(fx).snap.to_json()).dump());
  }

  TEST_CASE("every request id is answered exactly once") {
    const auto& fx = xt::fixture("park_ranger");
    Driver d(xt::fuse_fixture(fx));
    std::mt19937_64 rng(11);
    static const std::vector<std::string> cmds = {"step", "continue", "pause", "state", "model", "stop", "start", "bogus"};
    std::map<std::int64_t, int> seen;
    for (int id = 1; id <= 400; ++id) {
      auto c = cmds[rng() % cmds.size()];
      std::string frame = c == "start" ? start_frame(id, fx) : R"({"id":)" + std::to_string(id) + R"(,"cmd":")" + c + "\"}";
      for (const auto& r : replies(d.send(frame))) ++seen[r["id"].get<std::int64_t>()];
    }
    CHECK(seen.size() == 400);
    for (const auto& [id, n] : seen) CHECK_MESSAGE(n == 1, id);
  }

  TEST_CASE("stdio mode matches the batch trace") {
    const auto& fx = xt::fixture("observer");
    auto fused = xt::fuse_fixture(fx);
    std::istringstream in(start_frame(1, fx) + "\n" + R"({"id":2,"cmd":"continue"})" + "\n");
    std::ostringstream out;
    stepd::serve_stdio(fused, in, out);
    std::vector<std::string> lines;
    std::istringstream split(out.str());
    for (std::string l; std::getline(split, l);) lines.push_back(l);
    CHECK(events_as_trace(lines) == serialize_trace(xt::run_fixture(fx).log));
    CHECK(replies(lines).size() == 2);

    // Through the command-line binary.
    xt::TempDir dir;
    auto trace = dir / "t.jsonl";
    auto batch = xt::run_process({xt::cli_exe(), "run", "--model", (fx.dir / "model.json").string(), "--methods",
                                  (fx.dir / "methods.json").string(), "--entry", entry_of(fx), "--args", fx.args_json,
                                  "--trace", trace.string()});
    REQUIRE(batch.exit_code == 0);
    auto served = xt::run_process({xt::cli_exe(), "serve", "--stdio", "--model", (fx.dir / "model.json").string(),
                                   "--methods", (fx.dir / "methods.json").string()},
                                  start_frame(1, fx) + "\n" + R"({"id":2,"cmd":"continue"})" + "\n");
    REQUIRE(served.exit_code == 0);
    std::vector<std::string> served_lines;
    std::istringstream s2(served.out);
    for (std::string l; std::getline(s2, l);) served_lines.push_back(l);
    CHECK(events_as_trace(served_lines) == xt::read_text(trace));
  }

  TEST_CASE("websocket: one client at a time") {
    const auto& fx = xt::fixture("observer");
    ServerThread st(xt::fuse_fixture(fx));
    auto port = st.server.port();
    Client a(port);
    a.send(R"({"id":1,"cmd":"model"})");
    CHECK(a.reply(1)["ok"] == true);

    Client b(port);
    auto busy = json::parse(b.read());
    CHECK(busy["ok"] == false);
    CHECK(busy["error"]["kind"] == "busy");
    CHECK(busy["id"].is_null());
    beast::flat_buffer buf;
    beast::error_code ec;
    b.s.read(buf, ec);
    CHECK(ec);  // closed by the server

    a.send(start_frame(2, fx));
    CHECK(a.reply(2)["ok"] == true);
    a.send(R"({"id":3,"cmd":"continue"})");
    CHECK(a.reply(3)["data"]["status"] == "finished");
  }

  TEST_CASE("websocket: disconnect mid-run frees the server") {
    const auto& fx = xt::fixture("recursion");
    ServerThread st(xt::fuse_fixture(fx));
    auto port = st.server.port();
    {
      Client a(port);
      a.send(start_frame(1, fx));
      CHECK(a.reply(1)["ok"] == true);
      a.send(R"({"id":2,"cmd":"step"})");
      CHECK(a.reply(2)["data"]["status"] == "paused");
      a.s.close(ws::close_code::normal);
    }
    // The server notices the disconnect asynchronously.
    json r;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    for (;;) {
      Client c(port);
      c.send(start_frame(1, fx));
      r = json::parse(c.read());
      if (r["ok"] == false && r["error"]["kind"] == "busy" && std::chrono::steady_clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        continue;
      }
      break;
    }
    CHECK(r["id"] == 1);
    CHECK(r["ok"] == true);
  }
}
