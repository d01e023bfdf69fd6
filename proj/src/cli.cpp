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

#include "farmbench/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "farmbench/client.hpp"

namespace farmbench::cli {

namespace {

const std::map<std::string, Protocol> kProtocols = {
    {"envelope", Protocol::kEnvelope}, {"rest", Protocol::kRest}};

const std::map<std::string, ReportFormat> kFormats = {
    {"table", ReportFormat::kTable},
    {"csv", ReportFormat::kCsv},
    {"json", ReportFormat::kJson}};

// Without --format, --out picks the format from its extension.
ReportFormat resolve_format(const std::string& format_flag,
                            const std::optional<std::filesystem::path>& out) {
  if (!format_flag.empty()) return kFormats.at(format_flag);
  if (out) {
    const std::string ext = out->extension().string();
    if (ext == ".json") return ReportFormat::kJson;
    if (ext == ".csv") return ReportFormat::kCsv;
  }
  return ReportFormat::kTable;
}

std::uint16_t env_port() {
  const char* raw = std::getenv("FARMBENCH_PORT");
  if (raw == nullptr || *raw == '\0') return 0;
  const std::string_view s(raw);
  unsigned v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || v == 0 || v > 65535) {
    throw UsageError("FARMBENCH_PORT must be a port in [1, 65535], got '" +
                     std::string(s) + "'");
  }
  return static_cast<std::uint16_t>(v);
}

void emit(std::span<const BenchReport> reports, ReportFormat format,
          const std::optional<std::filesystem::path>& path, std::ostream& out) {
  if (path) {
    write_report_file(reports, format, *path);
  } else {
    emit_report(reports, format, out);
  }
}

int run_serve(const ServeCommand& cmd, std::ostream& out) {
  serve(cmd.server, [&](std::uint16_t port) {
    out << protocol_name(cmd.server.protocol) << " server listening on "
        << cmd.server.host << ":" << port << std::endl;
  });
  out << "server stopped" << std::endl;
  return kExitOk;
}

int run_bench_echo(const BenchEchoCommand& cmd, std::ostream& out) {
  ProtocolClient client(Endpoint::parse(cmd.target, cmd.protocol),
                        cmd.keep_alive);
  const TrialStats stats = run_echo_experiment(client, cmd.echo);
  const BenchReport report =
      make_echo_report(cmd.protocol, cmd.echo.payload_len, stats);
  emit(std::span(&report, 1), cmd.format, cmd.out, out);
  return kExitOk;
}

int run_bench_ga(const BenchGaCommand& cmd, std::ostream& out) {
  WorkerPoolConfig pool_cfg;
  for (const std::string& t : cmd.targets) {
    pool_cfg.endpoints.push_back(Endpoint::parse(t, cmd.protocol));
  }
  pool_cfg.max_in_flight = cmd.in_flight;
  pool_cfg.keep_alive = cmd.keep_alive;
  WorkerPool pool(std::move(pool_cfg));
  const GaExperiment exp =
      run_ga_experiment(cmd.protocol, cmd.ga, pool.evaluator(), cmd.repeats);
  emit(std::span(&exp.report, 1), cmd.format, cmd.out, out);
  return kExitOk;
}

int run_report(const ReportCommand& cmd, std::ostream& out) {
  const std::vector<BenchReport> reports = read_report_file(cmd.in);
  emit(reports, cmd.format, cmd.out, out);
  return kExitOk;
}

}  // namespace

Command parse_args(int argc, const char* const* argv) {
  CLI::App app{
      "Master-slave GA and echo benchmarks over envelope and rest "
      "protocols",
      "farmbench"};
  app.require_subcommand(1);

  // serve
  ServeCommand serve_cmd;
  std::string serve_protocol;
  unsigned serve_port = 0;
  bool serve_no_keepalive = false;
  auto* serve = app.add_subcommand("serve", "Run a Demo/evaluator server");
  serve->add_option("--protocol", serve_protocol, "envelope or rest")
      ->required()
      ->check(CLI::IsMember(kProtocols));
  serve
      ->add_option("--port", serve_port,
                   "Port (default: FARMBENCH_PORT, else rest 3000 / "
                   "envelope 8000)")
      ->check(CLI::Range(1u, 65535u));
  serve->add_option("--host", serve_cmd.server.host, "Bind address")
      ->capture_default_str();
  serve
      ->add_option("--bits", serve_cmd.server.domain.bits_per_axis,
                   "Bits per axis")
      ->capture_default_str()
      ->check(CLI::Range(1, 63));
  serve->add_option("--lo", serve_cmd.server.domain.lo, "Axis lower bound")
      ->capture_default_str();
  serve->add_option("--hi", serve_cmd.server.domain.hi, "Axis upper bound")
      ->capture_default_str();
  serve
      ->add_option("--threads", serve_cmd.server.concurrency,
                   "Concurrent request limit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  serve->add_flag("--no-keepalive", serve_no_keepalive,
                  "Close each connection after one request");

  // bench-echo
  BenchEchoCommand echo_cmd;
  std::string echo_protocol;
  std::string echo_format;
  std::string echo_out;
  bool echo_any_len = false;
  bool echo_no_keepalive = false;
  auto* echo = app.add_subcommand("bench-echo", "Time push/pop round trips");
  echo->add_option("--protocol", echo_protocol, "envelope or rest")
      ->required()
      ->check(CLI::IsMember(kProtocols));
  echo->add_option("--target", echo_cmd.target, "Server URL")->required();
  echo->add_option("--len", echo_cmd.echo.payload_len, "Payload length")
      ->capture_default_str();
  echo->add_flag("--allow-any-len", echo_any_len,
                 "Accept payload lengths other than 100 and 1000");
  echo->add_option("--iterations", echo_cmd.echo.iterations,
                   "Round trips per trial")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  echo->add_option("--trials", echo_cmd.echo.trials, "Timed trials")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{2}, std::size_t{1'000'000}));
  echo->add_option("--warmup", echo_cmd.echo.warmup,
                   "Untimed round trips before each trial")
      ->capture_default_str();
  echo->add_flag("--no-keepalive", echo_no_keepalive,
                 "Open a new connection per request");
  echo->add_option("--format", echo_format, "table, csv or json")
      ->check(CLI::IsMember(kFormats));
  echo->add_option("--out", echo_out, "Write the report to a file");

  // bench-ga
  BenchGaCommand ga_cmd;
  std::string ga_protocol;
  std::string ga_format;
  std::string ga_out;
  bool ga_no_keepalive = false;
  auto* ga = app.add_subcommand("bench-ga", "Run the master-slave GA");
  ga->add_option("--protocol", ga_protocol, "envelope or rest")
      ->required()
      ->check(CLI::IsMember(kProtocols));
  ga->add_option("--targets", ga_cmd.targets, "Slave URLs, comma separated")
      ->required()
      ->delimiter(',');
  ga->add_option("--generations", ga_cmd.ga.generations, "Generations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ga->add_option("--population", ga_cmd.ga.population_size, "Population size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ga->add_option("--repeats", ga_cmd.repeats, "Seeded runs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ga->add_option("--seed", ga_cmd.ga.seed, "Seed of the first run")
      ->capture_default_str();
  ga->add_option("--mutation-rate", ga_cmd.ga.mutation_rate,
                 "Per-offspring mutation probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  ga->add_option("--crossover-rate", ga_cmd.ga.crossover_rate,
                 "Per-pair crossover probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  ga->add_option("--selection-rate", ga_cmd.ga.selection_rate,
                 "Surviving fraction per generation")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  ga->add_option("--bits", ga_cmd.ga.domain.bits_per_axis, "Bits per axis")
      ->capture_default_str()
      ->check(CLI::Range(1, 63));
  ga->add_option("--lo", ga_cmd.ga.domain.lo, "Axis lower bound")
      ->capture_default_str();
  ga->add_option("--hi", ga_cmd.ga.domain.hi, "Axis upper bound")
      ->capture_default_str();
  ga->add_option("--in-flight", ga_cmd.in_flight,
                 "Concurrent requests per slave")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ga->add_flag("--no-keepalive", ga_no_keepalive,
               "Open a new connection per request");
  ga->add_option("--format", ga_format, "table, csv or json")
      ->check(CLI::IsMember(kFormats));
  ga->add_option("--out", ga_out, "Write the report to a file");

  // report
  ReportCommand report_cmd;
  std::string report_in;
  std::string report_format = "table";
  std::string report_out;
  auto* report = app.add_subcommand("report", "Re-render a saved report");
  report->add_option("--in", report_in, "JSON or CSV report file")->required();
  report->add_option("--format", report_format, "table, csv or json")
      ->capture_default_str()
      ->check(CLI::IsMember(kFormats));
  report->add_option("--out", report_out, "Write to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    return HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const auto optional_path =
      [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };

  try {
    if (serve->parsed()) {
      serve_cmd.server.protocol = kProtocols.at(serve_protocol);
      serve_cmd.server.keep_alive = !serve_no_keepalive;
      std::uint16_t port = static_cast<std::uint16_t>(serve_port);
      if (port == 0) port = env_port();
      if (port == 0) port = default_port(serve_cmd.server.protocol);
      serve_cmd.server.port = port;
      serve_cmd.server.domain.validate();
      return serve_cmd;
    }
    if (echo->parsed()) {
      echo_cmd.protocol = kProtocols.at(echo_protocol);
      echo_cmd.keep_alive = !echo_no_keepalive;
      if (!echo_any_len && echo_cmd.echo.payload_len != 100 &&
          echo_cmd.echo.payload_len != 1000) {
        throw UsageError("--len must be 100 or 1000 (use --allow-any-len)");
      }
      Endpoint::parse(echo_cmd.target, echo_cmd.protocol);
      echo_cmd.out = optional_path(echo_out);
      echo_cmd.format = resolve_format(echo_format, echo_cmd.out);
      return echo_cmd;
    }
    if (ga->parsed()) {
      ga_cmd.protocol = kProtocols.at(ga_protocol);
      ga_cmd.keep_alive = !ga_no_keepalive;
      for (const std::string& t : ga_cmd.targets) {
        Endpoint::parse(t, ga_cmd.protocol);
      }
      ga_cmd.ga.validate();
      ga_cmd.out = optional_path(ga_out);
      ga_cmd.format = resolve_format(ga_format, ga_cmd.out);
      return ga_cmd;
    }
    report_cmd.in = report_in;
    report_cmd.format = kFormats.at(report_format);
    report_cmd.out = optional_path(report_out);
    return report_cmd;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int run(const Command& cmd, std::ostream& out, std::ostream& err) {
  try {
    return std::visit(
        [&](const auto& c) -> int {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, ServeCommand>) {
            return run_serve(c, out);
          } else if constexpr (std::is_same_v<T, BenchEchoCommand>) {
            return run_bench_echo(c, out);
          } else if constexpr (std::is_same_v<T, BenchGaCommand>) {
            return run_bench_ga(c, out);
          } else if constexpr (std::is_same_v<T, ReportCommand>) {
            return run_report(c, out);
          } else {
            out << c.text;
            return kExitOk;
          }
        },
        cmd);
  } catch (const std::exception& e) {
    err << "farmbench: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  Command cmd;
  try {
    cmd = parse_args(argc, argv);
  } catch (const UsageError& e) {
    err << "farmbench: " << e.what() << "\n"
        << "Run with --help for usage.\n";
    return kExitUsage;
  }
  return run(cmd, out, err);
}

}  // namespace farmbench::cli
