#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <stdexcept>
#include <thread>
#include <vector>

#include "xanim/stepd.hpp"

namespace xanim::stepd {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

// Handshakes, sends one busy frame and closes.
class BusyConnection : public std::enable_shared_from_this<BusyConnection> {
 public:
  explicit BusyConnection(tcp::socket s) : ws_(std::move(s)) {}

  void start() {
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->ws_.text(true);
      self->ws_.async_write(net::buffer(self->frame_), [self](beast::error_code ec2, std::size_t) {
        if (ec2) return;
        self->ws_.async_close(websocket::close_code::try_again_later, [self](beast::error_code) {});
      });
    });
  }

 private:
  websocket::stream<beast::tcp_stream> ws_;
  std::string frame_ = R"({"id":null,"ok":false,"error":{"kind":"busy","message":"another client is connected"}})";
};

}  // namespace

struct WebSocketServer::Impl {
  class Connection;

  std::shared_ptr<const FusedModel> fused;
  WebSocketOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::shared_ptr<Connection> active;
  std::vector<std::thread> retired;

  void accept_next();
  void release(Connection* c);
  void join_retired() {
    for (auto& t : retired)
      if (t.joinable()) t.join();
    retired.clear();
  }
};

class WebSocketServer::Impl::Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(Impl& server, tcp::socket s) : server_(server), ws_(std::move(s)) {}

  void start() {
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) {
        self->server_.release(self.get());
        return;
      }
      self->ws_.text(true);
      self->executor_ = std::thread([self] { self->execute(); });
      self->read_next();
    });
  }

  // Called on the io thread.
  void shutdown() {
    inbound_.close();
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

  std::thread take_executor() { return std::move(executor_); }

 private:
  void execute() {
    auto weak = weak_from_this();
    auto exec = ws_.get_executor();
    StepService service(
        server_.fused,
        [weak, exec](const std::string& frame) {
          net::post(exec, [weak, frame] {
            if (auto self = weak.lock()) self->enqueue(frame);
          });
        },
        server_.options.session);
    service.set_poll([this] { return inbound_.try_pop(); });
    service.set_cancel([this] { return inbound_.closed(); });
    while (auto f = inbound_.pop()) {
      if (inbound_.closed()) break;
      service.handle(*f);
    }
  }

  void read_next() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->server_.release(self.get());
        return;
      }
      self->inbound_.push(beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read_next();
    });
  }

  void enqueue(std::string frame) {
    outbound_.push_back(std::move(frame));
    if (!writing_) write_next();
  }

  void write_next() {
    if (outbound_.empty()) {
      writing_ = false;
      return;
    }
    writing_ = true;
    ws_.async_write(net::buffer(outbound_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->outbound_.pop_front();
      if (ec) {
        self->outbound_.clear();
        self->writing_ = false;
        return;
      }
      self->write_next();
    });
  }

  Impl& server_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  FrameQueue inbound_;
  std::deque<std::string> outbound_;
  bool writing_ = false;
  std::thread executor_;
};

void WebSocketServer::Impl::release(Connection* c) {
  if (active.get() != c) return;
  active->shutdown();
  retired.push_back(active->take_executor());
  active.reset();
}

void WebSocketServer::Impl::accept_next() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec == net::error::operation_aborted) return;
      accept_next();
      return;
    }
    if (active) {
      std::make_shared<BusyConnection>(std::move(socket))->start();
    } else {
      join_retired();
      active = std::make_shared<Connection>(*this, std::move(socket));
      active->start();
    }
    accept_next();
  });
}

WebSocketServer::WebSocketServer(std::shared_ptr<const FusedModel> fused, WebSocketOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->fused = std::move(fused);
  impl_->options = std::move(options);
  beast::error_code ec;
  auto addr = net::ip::make_address(impl_->options.host, ec);
  if (ec) throw std::runtime_error("bad listen address '" + impl_->options.host + "': " + ec.message());
  tcp::endpoint ep(addr, impl_->options.port);
  auto& a = impl_->acceptor;
  a.open(ep.protocol(), ec);
  if (!ec) a.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(ep, ec);
  if (!ec) a.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw std::runtime_error("cannot listen on " + impl_->options.host + ":" +
                                   std::to_string(impl_->options.port) + ": " + ec.message());
}

WebSocketServer::~WebSocketServer() {
  stop();
  if (impl_->active) {
    impl_->active->shutdown();
    impl_->retired.push_back(impl_->active->take_executor());
    impl_->active.reset();
  }
  impl_->join_retired();
}

std::uint16_t WebSocketServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WebSocketServer::run() {
  impl_->accept_next();
  impl_->ioc.run();
  if (impl_->active) {
    impl_->active->shutdown();
    impl_->retired.push_back(impl_->active->take_executor());
    impl_->active.reset();
  }
  impl_->join_retired();
}

void WebSocketServer::stop() {
  net::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    impl_->ioc.stop();
  });
}

}  // namespace xanim::stepd
