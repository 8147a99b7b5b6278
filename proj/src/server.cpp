#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "neucf/io.hpp"
#include "neucf/service.hpp"

namespace neucf {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

std::string target_of(const Request& req) { return std::string(req.target()); }

Response json_response(const Request& req, http::status status, const json& body) {
  Response res{status, req.version()};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump(2) + "\n";
  res.prepare_payload();
  return res;
}

Response error_response(const Request& req, http::status status, const std::string& kind, const std::string& msg) {
  return json_response(req, status, json{{"error", kind}, {"message", msg}});
}

const char* mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

std::optional<Response> static_file(const Request& req, const std::string& root) {
  std::string target(req.target());
  target = target.substr(0, target.find('?'));
  if (target.find("..") != std::string::npos) return std::nullopt;
  std::filesystem::path path = std::filesystem::path(root) / target.substr(1);
  if (target == "/") path = std::filesystem::path(root) / "index.html";
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  Response res{http::status::ok, req.version()};
  res.set(http::field::content_type, mime_type(path));
  res.keep_alive(req.keep_alive());
  res.body() = ss.str();
  res.prepare_payload();
  return res;
}

std::vector<std::string> split_path(std::string_view target) {
  target = target.substr(0, target.find('?'));
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < target.size()) {
    if (target[i] == '/') {
      ++i;
      continue;
    }
    const std::size_t j = target.find('/', i);
    parts.emplace_back(target.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
    if (j == std::string_view::npos) break;
    i = j;
  }
  return parts;
}

bool query_flag(std::string_view target, std::string_view name) {
  const std::size_t q = target.find('?');
  if (q == std::string_view::npos) return false;
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const std::size_t amp = rest.find('&');
    const std::string_view kv = rest.substr(0, amp);
    if (kv == name || kv == std::string(name) + "=true" || kv == std::string(name) + "=1") return true;
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return false;
}

Response route(const Request& req, SessionRegistry& registry, const ServerOptions& opts) {
  const std::vector<std::string> parts = split_path(target_of(req));
  try {
    if (req.method() == http::verb::post && parts == std::vector<std::string>{"session"}) {
      json body;
      if (!req.body().empty()) {
        try {
          body = json::parse(req.body());
        } catch (const json::parse_error& e) {
          return error_response(req, http::status::bad_request, "ParseError", e.what());
        }
      }
      auto live = registry.create(body);
      return json_response(req, http::status::created,
                           json{{"id", live->session().id()},
                                {"phase", std::string(to_string(live->session().phase()))},
                                {"ws", "/ws/session/" + live->session().id()}});
    }
    if (req.method() == http::verb::get && parts == std::vector<std::string>{"scenarios"}) {
      json list = json::array();
      for (const ScenarioScript& s : builtin_scenarios()) list.push_back(scenario_to_json(s));
      return json_response(req, http::status::ok, json{{"scenarios", list}});
    }
    if (req.method() == http::verb::get && parts.size() == 3 && parts[0] == "session" && parts[2] == "record") {
      auto live = registry.get(parts[1]);
      return json_response(req, http::status::ok, scenario_to_json(live->session().record()));
    }
  } catch (const SessionNotFound& e) {
    return error_response(req, http::status::not_found, e.kind(), e.what());
  } catch (const SessionNotFinished& e) {
    return error_response(req, http::status::conflict, e.kind(), e.what());
  } catch (const Error& e) {
    return error_response(req, http::status::bad_request, e.kind(), e.what());
  }
  if (req.method() == http::verb::get && opts.static_dir) {
    if (auto res = static_file(req, *opts.static_dir)) return std::move(*res);
  }
  return error_response(req, http::status::not_found, "NotFound", "no route for " + std::string(req.target()));
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, std::shared_ptr<LiveSession> live, bool detail)
      : ws_(std::move(socket)), live_(std::move(live)), detail_(detail) {}

  void start(Request req) {
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->on_open();
    });
  }

 private:
  void on_open() {
    subscribe();
    read();
  }

  void read() {
    ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      const std::string text = beast::buffers_to_string(self->in_.data());
      self->in_.consume(self->in_.size());
      self->handle(text);
      self->read();
    });
  }

  void handle(const std::string& text) {
    json cmd;
    try {
      cmd = json::parse(text);
    } catch (const json::parse_error&) {
      replies_.push_back(CommandReply{false, "", "malformed command", std::nullopt, {}}.to_json().dump());
      flush();
      return;
    }
    if (cmd.is_object() && cmd.value("type", json()) == "subscribe") {
      const json d = cmd.value("detail", json(false));
      if (!d.is_boolean()) {
        replies_.push_back(CommandReply{false, "subscribe", "malformed command", std::nullopt, cmd.value("req", json())}
                               .to_json()
                               .dump());
        flush();
        return;
      }
      const bool detail = d.get<bool>();
      live_->unsubscribe(sub_);
      detail_ = detail;
      subscribe();
      CommandReply r{true, "subscribe", {}, std::nullopt, cmd.value("req", json())};
      replies_.push_back(r.to_json().dump());
    } else {
      replies_.push_back(live_->apply(cmd).to_json().dump());
    }
    flush();
  }

  void subscribe() {
    std::weak_ptr<WsConnection> weak = weak_from_this();
    auto executor = ws_.get_executor();
    sub_ = live_->subscribe(detail_, [weak, executor] {
      asio::post(executor, [weak] {
        if (auto self = weak.lock()) self->flush();
      });
    });
  }

  void flush() {
    if (writing_ || closed_) return;
    std::shared_ptr<const std::string> msg;
    if (!replies_.empty()) {
      msg = std::make_shared<const std::string>(std::move(replies_.front()));
      replies_.pop_front();
    } else if (sub_) {
      msg = sub_->buffer.pop();
    }
    if (!msg) return;
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(*msg), [self = shared_from_this(), msg](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) {
        self->close();
        return;
      }
      self->flush();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    if (sub_) live_->unsubscribe(sub_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<LiveSession> live_;
  bool detail_;
  std::shared_ptr<LiveSession::Subscriber> sub_;
  beast::flat_buffer in_;
  std::deque<std::string> replies_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, SessionRegistry& registry, const ServerOptions& opts)
      : stream_(std::move(socket)), registry_(registry), opts_(opts) {}

  void start() { read(); }

 private:
  void read() {
    req_ = {};
    http::async_read(stream_, buf_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->dispatch();
    });
  }

  void dispatch() {
    if (websocket::is_upgrade(req_)) {
      const std::vector<std::string> parts = split_path(target_of(req_));
      if (parts.size() == 3 && parts[0] == "ws" && parts[1] == "session") {
        try {
          auto live = registry_.get(parts[2]);
          std::make_shared<WsConnection>(stream_.release_socket(), live, query_flag(target_of(req_), "detail"))
              ->start(std::move(req_));
          return;
        } catch (const SessionNotFound& e) {
          write(error_response(req_, http::status::not_found, e.kind(), e.what()));
          return;
        }
      }
      write(error_response(req_, http::status::not_found, "NotFound", "no websocket route"));
      return;
    }
    write(route(req_, registry_, opts_));
  }

  void write(Response res) {
    auto sp = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (sp->keep_alive()) {
        self->read();
      } else {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      }
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buf_;
  Request req_;
  SessionRegistry& registry_;
  const ServerOptions& opts_;
};

class Listener : public std::enable_shared_from_this<Listener> {
 public:
  Listener(asio::io_context& ioc, tcp::endpoint ep, SessionRegistry& registry, const ServerOptions& opts)
      : ioc_(ioc), acceptor_(ioc, ep), registry_(registry), opts_(opts) {}

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void accept() {
    acceptor_.async_accept(asio::make_strand(ioc_), [self = shared_from_this()](beast::error_code ec,
                                                                                tcp::socket socket) {
      if (!ec) std::make_shared<HttpConnection>(std::move(socket), self->registry_, self->opts_)->start();
      if (self->acceptor_.is_open()) self->accept();
    });
  }

  void stop() {
    beast::error_code ignored;
    acceptor_.close(ignored);
  }

 private:
  asio::io_context& ioc_;
  tcp::acceptor acceptor_;
  SessionRegistry& registry_;
  const ServerOptions& opts_;
};

}  // namespace

void serve(const ServerOptions& opts, SessionRegistry& registry, const std::function<void(unsigned short)>& on_ready,
           std::stop_token stop) {
  asio::io_context ioc{1};
  const tcp::endpoint ep{asio::ip::make_address(opts.address), opts.port};
  auto listener = std::make_shared<Listener>(ioc, ep, registry, opts);
  listener->accept();

  asio::signal_set signals(ioc, SIGINT, SIGTERM);
  signals.async_wait([&](beast::error_code, int) { ioc.stop(); });
  std::stop_callback on_stop(stop, [&] { asio::post(ioc, [&] { ioc.stop(); }); });

  if (on_ready) on_ready(listener->port());
  ioc.run();
}

}  // namespace neucf
