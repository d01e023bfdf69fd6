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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "farmbench/codec.hpp"
#include "farmbench/genome.hpp"

namespace farmbench {

enum class Protocol { kEnvelope, kRest };

std::string_view protocol_name(Protocol p);
std::optional<Protocol> protocol_from_name(std::string_view name);

/// rest: 3000, envelope: 8000.
std::uint16_t default_port(Protocol p);

struct ServerConfig {
  std::string host = "127.0.0.1";
  /// 0 binds an ephemeral port.
  std::uint16_t port = 0;
  Protocol protocol = Protocol::kRest;
  SearchDomain domain;
  std::size_t concurrency = 8;
  bool keep_alive = true;
};

class StartupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Genome text failed the alphabet or length check.
class InvalidGenome : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The single string slot behind push and pop.
class EchoState {
 public:
  void store(std::string value);
  /// Returns the stored value and leaves the slot empty.
  std::string take();
  std::string peek() const;

 private:
  mutable std::mutex mu_;
  std::string src_;
};

/// Shortest decimal text that parses back to exactly `value`.
std::string format_fitness(double value);

/// The Demo service plus the fitness evaluator, independent of transport.
class DemoService {
 public:
  explicit DemoService(SearchDomain domain) : domain_(domain) {}

  std::string handle_push(std::string cad);
  std::string handle_pop();
  /// Throws InvalidGenome.
  std::string handle_evaluate(std::string_view genome_bits) const;

  /// Runs a request; contract violations become "Client" faults and
  /// anything else a "Server" fault.
  RpcResponse dispatch(const RpcRequest& request);

  const EchoState& state() const { return state_; }
  const SearchDomain& domain() const { return domain_; }

 private:
  SearchDomain domain_;
  EchoState state_;
};

/// HTTP front end for DemoService speaking one protocol.
///
/// envelope: POST / with an XML body, text/xml replies (faults as HTTP 500).
/// rest: GET /push/{cad}, GET /pop/, GET /evaluate/{bits}, text/plain
/// replies; 400 for bad input, 404 for unknown routes.
class Server {
 public:
  explicit Server(ServerConfig cfg);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving on a background thread. Throws StartupError.
  void start();
  /// Stops accepting, finishes in-flight requests, joins the serving thread.
  void stop();

  std::uint16_t port() const { return port_; }
  const ServerConfig& config() const { return cfg_; }
  DemoService& service() { return *service_; }

 private:
  struct Impl;

  ServerConfig cfg_;
  std::unique_ptr<DemoService> service_;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

/// Runs a server until SIGINT or SIGTERM, then drains and returns.
/// `on_ready` receives the bound port once the server accepts connections.
void serve(const ServerConfig& cfg,
           const std::function<void(std::uint16_t)>& on_ready = {});

}  // namespace farmbench
