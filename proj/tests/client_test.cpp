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

#include <gtest/gtest.h>

#include <atomic>
#include <mutex>
#include <random>
#include <thread>

#include "farmbench/ga.hpp"

namespace farmbench {
namespace {

using namespace std::chrono_literals;

std::unique_ptr<Server> start_server(Protocol protocol,
                                     SearchDomain domain = {}) {
  ServerConfig cfg;
  cfg.protocol = protocol;
  cfg.domain = domain;
  auto server = std::make_unique<Server>(cfg);
  server->start();
  return server;
}

Endpoint endpoint_of(const Server& s) {
  return {"127.0.0.1", s.port(), s.config().protocol};
}

// A port with nothing listening: bound once, then released.
std::uint16_t dead_port() {
  auto s = start_server(Protocol::kRest);
  const std::uint16_t port = s->port();
  s->stop();
  return port;
}

std::vector<Genome> random_batch(std::uint64_t seed, std::size_t n,
                                 const SearchDomain& d = {}) {
  Rng rng(seed);
  std::vector<Genome> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_genome(rng, d));
  return out;
}

// Wraps a real transport and lets a test inject failures and delays.
struct Injector {
  std::atomic<int> calls{0};
  std::atomic<int> failures_left{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> max_in_flight{0};
  bool jitter = false;
};

class InjectingTransport final : public Transport {
 public:
  InjectingTransport(std::unique_ptr<Transport> inner, Injector& inj,
                     std::uint64_t seed)
      : inner_(std::move(inner)), inj_(inj), rng_(seed) {}

  HttpReply send(const HttpCall& call) override {
    ++inj_.calls;
    const int now = ++inj_.in_flight;
    int seen = inj_.max_in_flight.load();
    while (now > seen && !inj_.max_in_flight.compare_exchange_weak(seen, now)) {
    }
    struct Leave {
      std::atomic<int>& n;
      ~Leave() { --n; }
    } leave{inj_.in_flight};
    if (inj_.failures_left.fetch_sub(1) > 0) {
      throw TransportError("injected connection reset");
    }
    if (inj_.jitter) {
      std::this_thread::sleep_for(std::chrono::microseconds(rng_() % 3000));
    }
    return inner_->send(call);
  }

 private:
  std::unique_ptr<Transport> inner_;
  Injector& inj_;
  std::mt19937_64 rng_;
};

TransportFactory injecting_factory(Injector& inj) {
  auto seed = std::make_shared<std::atomic<std::uint64_t>>(1);
  return [&inj, seed](const Endpoint& e) -> std::unique_ptr<Transport> {
    return std::make_unique<InjectingTransport>(make_http_transport(e), inj,
                                                seed->fetch_add(1));
  };
}

TEST(EndpointTest, ParsesUrls) {
  const Endpoint e =
      Endpoint::parse("http://localhost:8000", Protocol::kEnvelope);
  EXPECT_EQ(e.host, "localhost");
  EXPECT_EQ(e.port, 8000);
  EXPECT_EQ(e.protocol, Protocol::kEnvelope);
  EXPECT_EQ(e.url(), "http://localhost:8000");
  EXPECT_EQ(Endpoint::parse("http://vaio/", Protocol::kRest).port, 80);
  for (const char* bad :
       {"localhost:80", "https://h:1", "http://h:0", "http://h:70000",
        "http://h:1/x", "http://:80", "http://h:8a"}) {
    EXPECT_THROW(Endpoint::parse(bad, Protocol::kRest), std::invalid_argument)
        << bad;
  }
}

TEST(EchoTest, PayloadComesBackIdentical) {
  for (Protocol p : {Protocol::kRest, Protocol::kEnvelope}) {
    auto server = start_server(p);
    ProtocolClient client(endpoint_of(*server));
    std::string digits;
    for (int i = 0; i < 100; ++i) digits += static_cast<char>('0' + i % 10);
    EXPECT_EQ(echo_roundtrip(client, digits), digits);
    EXPECT_EQ(echo_roundtrip(client, ""), "");
    const std::string odd = "a b/c?d#e%f&g<h>\"'\xC3\xA9";
    EXPECT_EQ(echo_roundtrip(client, odd), odd);
  }
}

TEST(EchoTest, ServerDownFailsInPushPhase) {
  ProtocolClient client({"127.0.0.1", dead_port(), Protocol::kRest});
  try {
    echo_roundtrip(client, "x");
    FAIL();
  } catch (const RoundTripError& e) {
    EXPECT_EQ(e.phase(), "push");
  }
}

TEST(RemoteEvaluateTest, MatchesLocalEvaluation) {
  for (Protocol p : {Protocol::kRest, Protocol::kEnvelope}) {
    auto server = start_server(p);
    ProtocolClient client(endpoint_of(*server));
    for (const Genome& g : random_batch(3, 200)) {
      EXPECT_NEAR(remote_evaluate(client, g).value,
                  evaluate_genome(g, SearchDomain{}).value, 1e-12);
    }
  }
}

TEST(RemoteEvaluateTest, WrongLengthIsPermanent) {
  for (Protocol p : {Protocol::kRest, Protocol::kEnvelope}) {
    auto server = start_server(p);
    Injector inj;
    WorkerPool pool(
        {{endpoint_of(*server)}, 1, {3, 1ms}, true, injecting_factory(inj)});
    const std::vector<Genome> batch = {Genome(10)};
    try {
      pool.evaluate_batch(batch);
      FAIL();
    } catch (const BatchError& e) {
      EXPECT_EQ(e.genome_index(), 0u);
      EXPECT_NE(std::string(e.what()).find("Client"), std::string::npos)
          << e.what();
    }
    EXPECT_EQ(inj.calls, 1) << protocol_name(p);

    ProtocolClient client(endpoint_of(*server));
    EXPECT_THROW(remote_evaluate(client, Genome(10)), EvaluationError);
  }
}

class StaticTransport final : public Transport {
 public:
  explicit StaticTransport(HttpReply reply) : reply_(std::move(reply)) {}
  HttpReply send(const HttpCall&) override { return reply_; }

 private:
  HttpReply reply_;
};

TEST(ProtocolClientTest, MapsRepliesToErrors) {
  const Endpoint rest{"h", 1, Protocol::kRest};
  const Endpoint env{"h", 1, Protocol::kEnvelope};
  {
    ProtocolClient c(rest,
                     std::make_unique<StaticTransport>(HttpReply{200, "nan?"}));
    EXPECT_THROW(remote_evaluate(c, Genome(2)), ProtocolError);
  }
  {
    ProtocolClient c(rest,
                     std::make_unique<StaticTransport>(HttpReply{404, "no"}));
    const RpcResponse r = c.call(RpcRequest::pop());
    ASSERT_TRUE(r.is_fault());
    EXPECT_EQ(r.fault().code, "Client");
  }
  {
    ProtocolClient c(rest,
                     std::make_unique<StaticTransport>(HttpReply{503, ""}));
    EXPECT_EQ(c.call(RpcRequest::pop()).fault().code, "Server");
  }
  {
    ProtocolClient c(
        env, std::make_unique<StaticTransport>(HttpReply{502, "<html/>"}));
    EXPECT_THROW(c.call(RpcRequest::pop()), TransportError);
  }
  {
    ProtocolClient c(env,
                     std::make_unique<StaticTransport>(HttpReply{200, "junk"}));
    EXPECT_THROW(c.call(RpcRequest::pop()), ProtocolError);
  }
  {
    ProtocolClient c(
        env, std::make_unique<StaticTransport>(
                 HttpReply{200, encode_envelope_response(
                                    Method::kPush, RpcResponse::ok("nope"))}));
    try {
      echo_roundtrip(c, "x");
      FAIL();
    } catch (const RoundTripError& e) {
      EXPECT_EQ(e.phase(), "push");
    }
  }
}

TEST(WorkerPoolTest, RejectsBadConfig) {
  EXPECT_THROW(WorkerPool(WorkerPoolConfig{}), std::invalid_argument);
  const Endpoint e{"127.0.0.1", 1, Protocol::kRest};
  EXPECT_THROW(WorkerPool({{e}, 0}), std::invalid_argument);
  EXPECT_THROW(WorkerPool({{e}, 1, {0, 1ms}}), std::invalid_argument);
  EXPECT_THROW(WorkerPool({{e, {"127.0.0.1", 2, Protocol::kEnvelope}}}),
               std::invalid_argument);
  WorkerPool pool({{e}});
  EXPECT_THROW(pool.evaluate_batch({}), std::invalid_argument);
}

TEST(WorkerPoolTest, RecoversFromTransientFailures) {
  auto server = start_server(Protocol::kRest);
  Injector inj;
  inj.failures_left = 2;
  WorkerPool pool(
      {{endpoint_of(*server)}, 1, {3, 1ms}, true, injecting_factory(inj)});
  const std::vector<Genome> batch = random_batch(5, 10);
  const std::vector<Fitness> got = pool.evaluate_batch(batch);
  EXPECT_EQ(got, local_evaluator(SearchDomain{})(batch));
  EXPECT_EQ(inj.calls, 12);
}

TEST(WorkerPoolTest, RetriesReachALateServer) {
  // Reserve a port, then bring the server up after the first attempt fails.
  const std::uint16_t port = dead_port();
  WorkerPool pool({{{"127.0.0.1", port, Protocol::kEnvelope}}});
  std::unique_ptr<Server> server;
  std::jthread starter([&] {
    std::this_thread::sleep_for(50ms);
    ServerConfig cfg;
    cfg.protocol = Protocol::kEnvelope;
    cfg.port = port;
    server = std::make_unique<Server>(cfg);
    server->start();
  });
  const std::vector<Genome> batch = random_batch(6, 3);
  const std::vector<Fitness> got = pool.evaluate_batch(batch);
  starter.join();
  EXPECT_EQ(got, local_evaluator(SearchDomain{})(batch));
}

TEST(WorkerPoolTest, ExhaustedRetriesNameGenomeAndEndpoint) {
  const Endpoint down{"127.0.0.1", dead_port(), Protocol::kRest};
  WorkerPool pool({{down}, 1, {2, 1ms}});
  try {
    pool.evaluate_batch(random_batch(7, 4));
    FAIL();
  } catch (const BatchError& e) {
    EXPECT_EQ(e.genome_index(), 0u);
    EXPECT_EQ(e.endpoint(), down.url());
    EXPECT_NE(std::string(e.what()).find("2 attempt"), std::string::npos)
        << e.what();
  }
}

TEST(WorkerPoolTest, LowestFailingIndexIsReported) {
  auto good = start_server(Protocol::kRest);
  const Endpoint down{"127.0.0.1", dead_port(), Protocol::kRest};
  // Round-robin: odd indices go to the dead endpoint.
  WorkerPool pool({{endpoint_of(*good), down}, 1, {1, 1ms}});
  try {
    pool.evaluate_batch(random_batch(8, 6));
    FAIL();
  } catch (const BatchError& e) {
    EXPECT_EQ(e.genome_index(), 1u);
    EXPECT_EQ(e.endpoint(), down.url());
  }
}

TEST(WorkerPoolTest, OneAndFourEndpointsAgree) {
  std::vector<std::unique_ptr<Server>> servers;
  std::vector<Endpoint> endpoints;
  for (int i = 0; i < 4; ++i) {
    servers.push_back(start_server(Protocol::kRest));
    endpoints.push_back(endpoint_of(*servers.back()));
  }
  const std::vector<Genome> batch = random_batch(9, 50);
  WorkerPool one({{endpoints[0]}});
  WorkerPool four({endpoints});
  const std::vector<Fitness> a = one.evaluate_batch(batch);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_EQ(a, four.evaluate_batch(batch));
  EXPECT_EQ(a, local_evaluator(SearchDomain{})(batch));

  ProtocolClient direct(endpoints[2]);
  const std::vector<Genome> single = {batch[7]};
  EXPECT_EQ(one.evaluate_batch(single).front(),
            remote_evaluate(direct, batch[7]));
}

TEST(WorkerPoolTest, PositionalUnderShuffledCompletionAndFaults) {
  std::vector<std::unique_ptr<Server>> servers;
  std::vector<Endpoint> endpoints;
  for (int i = 0; i < 3; ++i) {
    servers.push_back(start_server(Protocol::kEnvelope));
    endpoints.push_back(endpoint_of(*servers.back()));
  }
  Injector inj;
  inj.jitter = true;
  WorkerPool pool({endpoints, 2, {3, 1ms}, true, injecting_factory(inj)});
  const BatchEvaluator local = local_evaluator(SearchDomain{});
  for (std::uint64_t round = 0; round < 5; ++round) {
    inj.failures_left = static_cast<int>(round);
    const std::vector<Genome> batch = random_batch(100 + round, 37);
    ASSERT_EQ(pool.evaluate_batch(batch), local(batch));
  }
  EXPECT_LE(inj.max_in_flight, 6);
}

TEST(WorkerPoolTest, InFlightLimitPerEndpointHolds) {
  auto server = start_server(Protocol::kRest);
  Injector inj;
  inj.jitter = true;
  WorkerPool pool(
      {{endpoint_of(*server)}, 1, {}, true, injecting_factory(inj)});
  pool.evaluate_batch(random_batch(11, 20));
  EXPECT_EQ(inj.max_in_flight, 1);

  Injector inj3;
  inj3.jitter = true;
  WorkerPool pool3(
      {{endpoint_of(*server)}, 3, {}, true, injecting_factory(inj3)});
  pool3.evaluate_batch(random_batch(12, 60));
  EXPECT_LE(inj3.max_in_flight, 3);
}

TEST(WorkerPoolTest, GaIsTransportTransparent) {
  GAConfig cfg;
  cfg.population_size = 16;
  cfg.generations = 5;
  cfg.seed = 21;
  const GAResult local = run_ga(cfg, local_evaluator(cfg.domain));
  for (Protocol p : {Protocol::kRest, Protocol::kEnvelope}) {
    auto server = start_server(p);
    WorkerPool pool({{endpoint_of(*server)}});
    const GAResult remote = run_ga(cfg, pool.evaluator());
    EXPECT_EQ(remote.best.genome, local.best.genome) << protocol_name(p);
    EXPECT_EQ(remote.per_generation_best, local.per_generation_best);
  }
}

}  // namespace
}  // namespace farmbench
