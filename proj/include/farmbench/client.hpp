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

// Clients for both protocols: echo round trips against the Demo service and
// a pool of slave endpoints that evaluates GA batches remotely.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "farmbench/codec.hpp"
#include "farmbench/ga.hpp"
#include "farmbench/genome.hpp"
#include "farmbench/server.hpp"

namespace farmbench {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  Protocol protocol = Protocol::kRest;

  /// Accepts "http://host[:port][/]"; the port defaults to 80.
  static Endpoint parse(std::string_view url, Protocol protocol);
  std::string url() const;
};

struct HttpCall {
  std::string method;  // "GET" or "POST"
  std::string path;
  std::string body;
  std::string content_type;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpReply {
  int status = 0;
  std::string body;
};

/// Connection-level failure. The only failure class that is retried.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws TransportError when no HTTP reply was received.
  virtual HttpReply send(const HttpCall& call) = 0;
};

using TransportFactory =
    std::function<std::unique_ptr<Transport>(const Endpoint&)>;

/// HTTP/1.1 over one persistent connection (unless keep_alive is false).
std::unique_ptr<Transport> make_http_transport(const Endpoint& endpoint,
                                               bool keep_alive = true);

class RpcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A push or pop in an echo round trip failed.
class RoundTripError : public RpcError {
 public:
  RoundTripError(std::string phase, const std::string& what)
      : RpcError(phase + " failed: " + what), phase_(std::move(phase)) {}

  const std::string& phase() const { return phase_; }

 private:
  std::string phase_;
};

/// The slave rejected the genome (fault or 4xx). Not retried.
class EvaluationError : public RpcError {
 public:
  using RpcError::RpcError;
};

/// The reply could not be understood.
class ProtocolError : public RpcError {
 public:
  using RpcError::RpcError;
};

/// A genome in a batch exhausted its retries or failed permanently.
class BatchError : public RpcError {
 public:
  BatchError(std::size_t genome_index, std::string endpoint,
             const std::string& what)
      : RpcError("genome " + std::to_string(genome_index) + " on " + endpoint +
                 ": " + what),
        genome_index_(genome_index),
        endpoint_(std::move(endpoint)) {}

  std::size_t genome_index() const { return genome_index_; }
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::size_t genome_index_;
  std::string endpoint_;
};

/// Speaks one protocol to one endpoint. Not thread-safe.
class ProtocolClient {
 public:
  ProtocolClient(Endpoint endpoint, std::unique_ptr<Transport> transport);
  explicit ProtocolClient(Endpoint endpoint, bool keep_alive = true);

  /// Sends the request and maps the reply to a result or fault. Throws
  /// TransportError and ProtocolError.
  RpcResponse call(const RpcRequest& request);

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  Endpoint endpoint_;
  std::unique_ptr<Transport> transport_;
};

/// push(payload) expecting "ok", then pop(); returns the popped string.
/// Throws RoundTripError tagged "push" or "pop".
std::string echo_roundtrip(ProtocolClient& client, std::string_view payload);

/// Throws EvaluationError, ProtocolError or TransportError.
Fitness remote_evaluate(ProtocolClient& client, const Genome& genome);

struct RetryPolicy {
  int attempts = 3;
  /// Sleep before retry k (1-based) is backoff * k.
  std::chrono::milliseconds backoff{100};
};

struct WorkerPoolConfig {
  std::vector<Endpoint> endpoints;
  std::size_t max_in_flight = 1;
  RetryPolicy retry;
  bool keep_alive = true;
  /// Defaults to make_http_transport.
  TransportFactory transport_factory;
};

/// Slave endpoints receiving genomes round-robin. Each endpoint has
/// max_in_flight persistent clients; results are reassembled by position.
/// One batch at a time.
class WorkerPool {
 public:
  explicit WorkerPool(WorkerPoolConfig cfg);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  /// Result i belongs to genome i. Throws BatchError.
  std::vector<Fitness> evaluate_batch(std::span<const Genome> genomes);

  /// Adapter for run_ga. The pool must outlive the returned evaluator.
  BatchEvaluator evaluator();

  const WorkerPoolConfig& config() const { return cfg_; }

 private:
  struct Slot;

  Fitness evaluate_with_retry(Slot& slot, const Genome& genome);

  WorkerPoolConfig cfg_;
  std::vector<std::vector<std::unique_ptr<Slot>>> slots_;  // [endpoint][k]
};

}  // namespace farmbench
