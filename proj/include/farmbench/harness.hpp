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

// Experiment runners and report I/O.
//
// Echo experiment: each trial times `iterations` consecutive push/pop round
// trips after a few untimed warm-up round trips. GA experiment: `repeats`
// runs of the GA with seeds seed, seed + 1, ... against one evaluator.
// Reported dispersion is the sample standard deviation (n - 1).

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "farmbench/client.hpp"
#include "farmbench/ga.hpp"
#include "farmbench/server.hpp"

namespace farmbench {

class StatisticsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrialStats {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> stddev;  // absent when n < 2

  friend bool operator==(const TrialStats&, const TrialStats&) = default;
};

/// Arithmetic mean and sample standard deviation. Throws StatisticsError
/// for fewer than two samples.
TrialStats mean_stddev(std::span<const double> samples);

/// Like mean_stddev but accepts a single sample (no stddev).
TrialStats summarize(std::span<const double> samples);

struct BenchReport {
  std::string experiment;  // "echo" or "ga"
  std::string protocol;
  std::string workload;  // "len=100" or "gen=20;pop=50"
  TrialStats time;
  std::optional<TrialStats> accuracy;  // present iff experiment == "ga"
  std::string host;
  std::string timestamp;  // ISO 8601, UTC

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

std::string echo_workload(std::size_t payload_len);
std::string ga_workload(std::size_t generations, std::size_t population);

/// "01234567890" repeated and truncated to `length`.
std::string make_payload(std::size_t length);

/// Fills host and timestamp with the current machine and time.
void stamp_environment(BenchReport& report);

struct EchoOptions {
  std::size_t payload_len = 100;
  std::size_t iterations = 100;
  std::size_t trials = 50;
  std::size_t warmup = 5;
};

/// Seconds per trial (all iterations). Every echo must come back
/// byte-identical; a failed trial is re-run once, a second failure throws.
TrialStats run_echo_experiment(ProtocolClient& client, const EchoOptions& opt);

BenchReport make_echo_report(Protocol protocol, std::size_t payload_len,
                             const TrialStats& stats);

struct GaExperiment {
  BenchReport report;
  std::vector<GAResult> runs;
};

/// Raised when a GA run fails mid-experiment. `partial` summarizes the runs
/// that finished; its time.n is below the requested repeat count.
class ExperimentAborted : public std::runtime_error {
 public:
  ExperimentAborted(const std::string& what, std::optional<BenchReport> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}

  const std::optional<BenchReport>& partial() const { return partial_; }

 private:
  std::optional<BenchReport> partial_;
};

GaExperiment run_ga_experiment(Protocol protocol, const GAConfig& cfg,
                               const BatchEvaluator& evaluator,
                               std::size_t repeats = 10);

enum class ReportFormat { kTable, kCsv, kJson };

std::optional<ReportFormat> report_format_from_name(std::string_view name);

/// Throws std::invalid_argument on an empty report list.
void emit_report(std::span<const BenchReport> reports, ReportFormat format,
                 std::ostream& out);

std::string render_report(std::span<const BenchReport> reports,
                          ReportFormat format);

/// Writes to a sibling temporary file and renames it into place, so a failed
/// write never leaves a partial file. Throws std::runtime_error on I/O errors.
void write_report_file(std::span<const BenchReport> reports,
                       ReportFormat format, const std::filesystem::path& path);

/// Parses emitted JSON or CSV (detected from the first non-blank byte).
std::vector<BenchReport> parse_reports(std::string_view text);

std::vector<BenchReport> read_report_file(const std::filesystem::path& path);

}  // namespace farmbench
