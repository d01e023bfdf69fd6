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

#include "farmbench/client.hpp"

#include <atomic>
#include <charconv>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "httplib.h"

namespace farmbench {

namespace {

constexpr const char* kXmlContentType = "text/xml; charset=utf-8";

class HttpTransport final : public Transport {
 public:
  HttpTransport(const Endpoint& endpoint, bool keep_alive)
      : client_(endpoint.host, endpoint.port) {
    client_.set_keep_alive(keep_alive);
    client_.set_tcp_nodelay(true);
    client_.set_url_encode(false);
    client_.set_connection_timeout(std::chrono::seconds(5));
    client_.set_read_timeout(std::chrono::seconds(30));
    client_.set_write_timeout(std::chrono::seconds(30));
  }

  HttpReply send(const HttpCall& call) override {
    httplib::Headers headers(call.headers.begin(), call.headers.end());
    httplib::Result res =
        call.method == "POST"
            ? client_.Post(call.path, headers, call.body, call.content_type)
            : client_.Get(call.path, headers);
    if (!res) {
      throw TransportError(call.method + " " + call.path + ": " +
                           httplib::to_string(res.error()));
    }
    return {res->status, std::move(res->body)};
  }

 private:
  httplib::Client client_;
};

RpcResponse map_rest_reply(const HttpReply& reply) {
  if (reply.status == 200) return RpcResponse::ok(reply.body);
  if (reply.status >= 400 && reply.status < 500) {
    return RpcResponse::fault(
        "Client", "HTTP " + std::to_string(reply.status) + ": " + reply.body);
  }
  return RpcResponse::fault(
      "Server", "HTTP " + std::to_string(reply.status) + ": " + reply.body);
}

}  // namespace

Endpoint Endpoint::parse(std::string_view url, Protocol protocol) {
  constexpr std::string_view kScheme = "http://";
  if (!url.starts_with(kScheme)) {
    throw std::invalid_argument("endpoint URL must start with http://: " +
                                std::string(url));
  }
  std::string_view rest = url.substr(kScheme.size());
  if (const auto slash = rest.find('/'); slash != std::string_view::npos) {
    if (rest.substr(slash) != "/") {
      throw std::invalid_argument("endpoint URL must not carry a path: " +
                                  std::string(url));
    }
    rest = rest.substr(0, slash);
  }
  Endpoint e;
  e.protocol = protocol;
  const auto colon = rest.rfind(':');
  if (colon == std::string_view::npos) {
    e.host = std::string(rest);
    e.port = 80;
  } else {
    e.host = std::string(rest.substr(0, colon));
    const std::string_view digits = rest.substr(colon + 1);
    unsigned port = 0;
    const auto [end, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc{} || end != digits.data() + digits.size() ||
        port == 0 || port > 65535) {
      throw std::invalid_argument("bad port in endpoint URL: " +
                                  std::string(url));
    }
    e.port = static_cast<std::uint16_t>(port);
  }
  if (e.host.empty()) {
    throw std::invalid_argument("empty host in endpoint URL: " +
                                std::string(url));
  }
  return e;
}

std::string Endpoint::url() const {
  return "http://" + host + ":" + std::to_string(port);
}

std::unique_ptr<Transport> make_http_transport(const Endpoint& endpoint,
                                               bool keep_alive) {
  return std::make_unique<HttpTransport>(endpoint, keep_alive);
}

ProtocolClient::ProtocolClient(Endpoint endpoint,
                               std::unique_ptr<Transport> transport)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)) {}

ProtocolClient::ProtocolClient(Endpoint endpoint, bool keep_alive)
    : endpoint_(std::move(endpoint)),
      transport_(make_http_transport(endpoint_, keep_alive)) {}

RpcResponse ProtocolClient::call(const RpcRequest& request) {
  if (endpoint_.protocol == Protocol::kRest) {
    return map_rest_reply(
        transport_->send({"GET", rest_encode(request), {}, {}, {}}));
  }
  HttpCall http{
      "POST",
      "/",
      encode_envelope_request(request),
      kXmlContentType,
      {{"SOAPAction",
        "\"urn:Demo#" + std::string(method_name(request.method)) + "\""}}};
  const HttpReply reply = transport_->send(http);
  try {
    return parse_envelope_response(reply.body, request.method);
  } catch (const EnvelopeFault& e) {
    if (reply.status >= 500) {
      throw TransportError("HTTP " + std::to_string(reply.status) +
                           " without a fault envelope");
    }
    throw ProtocolError("unreadable envelope reply (HTTP " +
                        std::to_string(reply.status) + "): " + e.what());
  }
}

std::string echo_roundtrip(ProtocolClient& client, std::string_view payload) {
  const auto run = [&client](const char* phase, const RpcRequest& request) {
    RpcResponse reply = RpcResponse::ok("");
    try {
      reply = client.call(request);
    } catch (const std::exception& e) {
      throw RoundTripError(phase, e.what());
    }
    if (reply.is_fault()) {
      throw RoundTripError(phase,
                           reply.fault().code + ": " + reply.fault().detail);
    }
    return reply.result();
  };
  const std::string ack = run("push", RpcRequest::push(std::string(payload)));
  if (ack != "ok")
    throw RoundTripError("push", "unexpected reply '" + ack + "'");
  return run("pop", RpcRequest::pop());
}

Fitness remote_evaluate(ProtocolClient& client, const Genome& genome) {
  const RpcResponse reply =
      client.call(RpcRequest::evaluate(genome.to_string()));
  if (reply.is_fault()) {
    throw EvaluationError(reply.fault().code + ": " + reply.fault().detail);
  }
  const std::string& text = reply.result();
  double value = std::numeric_limits<double>::quiet_NaN();
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
    throw ProtocolError("non-numeric fitness '" + text + "'");
  }
  return {value};
}

struct WorkerPool::Slot {
  ProtocolClient client;
};

WorkerPool::WorkerPool(WorkerPoolConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoints.empty()) {
    throw std::invalid_argument("worker pool needs at least one endpoint");
  }
  if (cfg_.max_in_flight == 0) {
    throw std::invalid_argument("max in-flight per endpoint must be positive");
  }
  if (cfg_.retry.attempts < 1) {
    throw std::invalid_argument("retry attempts must be at least 1");
  }
  for (const Endpoint& e : cfg_.endpoints) {
    if (e.protocol != cfg_.endpoints.front().protocol) {
      throw std::invalid_argument("all pool endpoints must share a protocol");
    }
  }
  if (!cfg_.transport_factory) {
    const bool keep_alive = cfg_.keep_alive;
    cfg_.transport_factory = [keep_alive](const Endpoint& e) {
      return make_http_transport(e, keep_alive);
    };
  }
  for (const Endpoint& e : cfg_.endpoints) {
    auto& per_endpoint = slots_.emplace_back();
    for (std::size_t k = 0; k < cfg_.max_in_flight; ++k) {
      per_endpoint.push_back(std::make_unique<Slot>(
          Slot{ProtocolClient(e, cfg_.transport_factory(e))}));
    }
  }
}

WorkerPool::~WorkerPool() = default;

Fitness WorkerPool::evaluate_with_retry(Slot& slot, const Genome& genome) {
  for (int attempt = 1;; ++attempt) {
    try {
      return remote_evaluate(slot.client, genome);
    } catch (const TransportError& e) {
      if (attempt >= cfg_.retry.attempts) {
        throw TransportError("gave up after " + std::to_string(attempt) +
                             " attempt(s): " + e.what());
      }
    }
    std::this_thread::sleep_for(cfg_.retry.backoff * attempt);
  }
}

std::vector<Fitness> WorkerPool::evaluate_batch(
    std::span<const Genome> genomes) {
  if (genomes.empty()) {
    throw std::invalid_argument("evaluate_batch needs a non-empty batch");
  }
  const std::size_t n_endpoints = slots_.size();
  std::vector<Fitness> out(genomes.size());

  std::mutex error_mu;
  std::optional<BatchError> first_error;
  std::atomic<bool> failed{false};
  const auto record_error = [&](std::size_t index, const Endpoint& e,
                                const std::exception& ex) {
    std::lock_guard lock(error_mu);
    if (!first_error || index < first_error->genome_index()) {
      first_error.emplace(index, e.url(), ex.what());
    }
    failed = true;
  };

  // Endpoint e owns genomes e, e + E, e + 2E, ...; its slots share a cursor.
  std::vector<std::atomic<std::size_t>> cursors(n_endpoints);
  const auto drain = [&](std::size_t e, Slot& slot) {
    for (;;) {
      if (failed) return;
      const std::size_t i = e + n_endpoints * cursors[e].fetch_add(1);
      if (i >= genomes.size()) return;
      try {
        out[i] = evaluate_with_retry(slot, genomes[i]);
      } catch (const std::exception& ex) {
        record_error(i, slot.client.endpoint(), ex);
        return;
      }
    }
  };

  if (n_endpoints == 1 && slots_[0].size() == 1) {
    drain(0, *slots_[0][0]);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t e = 0; e < n_endpoints; ++e) {
      for (auto& slot : slots_[e]) {
        workers.emplace_back([&drain, e, s = slot.get()] { drain(e, *s); });
      }
    }
  }
  if (first_error) throw *first_error;
  return out;
}

BatchEvaluator WorkerPool::evaluator() {
  return
      [this](std::span<const Genome> batch) { return evaluate_batch(batch); };
}

}  // namespace farmbench
