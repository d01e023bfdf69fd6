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

// Command line front end. Exit codes: 0 success, 1 runtime or transport
// error, 2 usage error.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "farmbench/ga.hpp"
#include "farmbench/harness.hpp"
#include "farmbench/server.hpp"

namespace farmbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServeCommand {
  ServerConfig server;
};

struct BenchEchoCommand {
  Protocol protocol = Protocol::kRest;
  std::string target;
  EchoOptions echo;
  bool keep_alive = true;
  ReportFormat format = ReportFormat::kTable;
  std::optional<std::filesystem::path> out;
};

struct BenchGaCommand {
  Protocol protocol = Protocol::kRest;
  std::vector<std::string> targets;
  GAConfig ga;
  std::size_t repeats = 10;
  std::size_t in_flight = 1;
  bool keep_alive = true;
  ReportFormat format = ReportFormat::kTable;
  std::optional<std::filesystem::path> out;
};

struct ReportCommand {
  std::filesystem::path in;
  ReportFormat format = ReportFormat::kTable;
  std::optional<std::filesystem::path> out;
};

struct HelpRequested {
  std::string text;
};

using Command = std::variant<ServeCommand, BenchEchoCommand, BenchGaCommand,
                             ReportCommand, HelpRequested>;

/// Validates every option before returning. Throws UsageError. The serve
/// port falls back to FARMBENCH_PORT, then to the protocol default.
Command parse_args(int argc, const char* const* argv);

/// Runs a parsed command; returns the exit code.
int run(const Command& cmd, std::ostream& out, std::ostream& err);

/// parse_args + run with exit-code mapping.
int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err);

}  // namespace farmbench::cli
