// Copyright 2026 The farmbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "farmbench/server.hpp"

#include <pthread.h>

#include <charconv>
#include <csignal>
#include <thread>

#include "httplib.h"

namespace farmbench {

namespace {

constexpr const char* kXmlContentType = "text/xml; charset=utf-8";
constexpr const char* kTextContentType = "text/plain; charset=utf-8";

}  // namespace

std::string_view protocol_name(Protocol p) {
  return p == Protocol::kEnvelope ? "envelope" : "rest";
}

std::optional<Protocol> protocol_from_name(std::string_view name) {
  if (name == "envelope") return Protocol::kEnvelope;
  if (name == "rest") return Protocol::kRest;
  return std::nullopt;
}

std::uint16_t default_port(Protocol p) {
  return p == Protocol::kRest ? 3000 : 8000;
}

void EchoState::store(std::string value) {
  std::lock_guard lock(mu_);
  src_ = std::move(value);
}

std::string EchoState::take() {
  std::lock_guard lock(mu_);
  std::string out = std::move(src_);
  src_.clear();
  return out;
}

std::string EchoState::peek() const {
  std::lock_guard lock(mu_);
  return src_;
}

std::string format_fitness(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string DemoService::handle_push(std::string cad) {
  state_.store(std::move(cad));
  return "ok";
}

std::string DemoService::handle_pop() { return state_.take(); }

std::string DemoService::handle_evaluate(std::string_view genome_bits) const {
  if (genome_bits.size() != domain_.genome_length()) {
    throw InvalidGenome("genome must have " +
                        std::to_string(domain_.genome_length()) +
                        " bits, got " + std::to_string(genome_bits.size()));
  }
  Genome g;
  try {
    g = Genome::from_string(genome_bits);
  } catch (const DecodeError& e) {
    throw InvalidGenome(e.what());
  }
  return format_fitness(evaluate_genome(g, domain_).value);
}

RpcResponse DemoService::dispatch(const RpcRequest& request) {
  try {
    request.validate();
    switch (request.method) {
      case Method::kPush:
        return RpcResponse::ok(handle_push(request.params[0]));
      case Method::kPop:
        return RpcResponse::ok(handle_pop());
      case Method::kEvaluate:
        return RpcResponse::ok(handle_evaluate(request.params[0]));
    }
  } catch (const std::invalid_argument& e) {
    return RpcResponse::fault("Client", e.what());
  } catch (const std::exception& e) {
    return RpcResponse::fault("Server", e.what());
  }
  return RpcResponse::fault("Server", "unhandled method");
}

struct Server::Impl {
  httplib::Server http;
  std::thread worker;
};

Server::Server(ServerConfig cfg)
    : cfg_(std::move(cfg)),
      service_(std::make_unique<DemoService>(cfg_.domain)),
      impl_(std::make_unique<Impl>()) {
  cfg_.domain.validate();
  if (cfg_.concurrency == 0) {
    throw std::invalid_argument("server concurrency must be positive");
  }
}

Server::~Server() { stop(); }

void Server::start() {
  auto& http = impl_->http;
  const std::size_t threads = cfg_.concurrency;
  http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  http.set_tcp_nodelay(true);
  // httplib defaults to SO_REUSEPORT, which lets a second server share a
  // busy port instead of failing to bind.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  http.set_keep_alive_max_count(cfg_.keep_alive ? 1'000'000 : 1);
  DemoService* service = service_.get();

  if (cfg_.protocol == Protocol::kEnvelope) {
    http.Post("/", [service](const httplib::Request& req,
                             httplib::Response& res) {
      Method method = Method::kPop;
      RpcResponse reply = RpcResponse::ok("");
      try {
        const RpcRequest call = parse_envelope_request(req.body);
        method = call.method;
        reply = service->dispatch(call);
      } catch (const EnvelopeFault& e) {
        reply = RpcResponse::fault(e.fault().code, e.fault().detail);
      }
      res.status = reply.is_fault() ? 500 : 200;
      res.set_content(encode_envelope_response(method, reply), kXmlContentType);
    });
  } else {
    // Routed before httplib's regex matcher, which is slow and recursive on
    // long paths.
    http.set_pre_routing_handler(
        [service](const httplib::Request& req, httplib::Response& res) {
          using Handled = httplib::Server::HandlerResponse;
          if (req.method != "GET") return Handled::Unhandled;
          const std::string_view target =
              std::string_view(req.target).substr(0, req.target.find('?'));
          RpcRequest call;
          try {
            call = rest_decode(target);
          } catch (const RouteError& e) {
            res.status = 404;
            res.set_content(e.what(), kTextContentType);
            return Handled::Handled;
          } catch (const PercentDecodeError& e) {
            res.status = 400;
            res.set_content(e.what(), kTextContentType);
            return Handled::Handled;
          }
          const RpcResponse reply = service->dispatch(call);
          if (reply.is_fault()) {
            res.status = reply.fault().code.starts_with("Client") ? 400 : 500;
            res.set_content(reply.fault().detail, kTextContentType);
          } else {
            res.status = 200;
            res.set_content(reply.result(), kTextContentType);
          }
          return Handled::Handled;
        });
  }

  const int bound = cfg_.port == 0 ? http.bind_to_any_port(cfg_.host)
                                   : (http.bind_to_port(cfg_.host, cfg_.port)
                                          ? static_cast<int>(cfg_.port)
                                          : -1);
  if (bound <= 0) {
    throw StartupError("cannot bind " + cfg_.host + ":" +
                       std::to_string(cfg_.port));
  }
  port_ = static_cast<std::uint16_t>(bound);
  impl_->worker = std::thread([&http] { http.listen_after_bind(); });
  http.wait_until_ready();
}

void Server::stop() {
  if (!impl_) return;
  if (impl_->http.is_running() || impl_->worker.joinable()) {
    impl_->http.stop();
  }
  if (impl_->worker.joinable()) impl_->worker.join();
}

void serve(const ServerConfig& cfg,
           const std::function<void(std::uint16_t)>& on_ready) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  // Block before any thread starts so only sigwait below sees the signals.
  pthread_sigmask(SIG_BLOCK, &signals, &previous);

  Server server(cfg);
  try {
    server.start();
  } catch (...) {
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    throw;
  }
  if (on_ready) on_ready(server.port());
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
}

}  // namespace farmbench
