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

#include "farmbench/harness.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace farmbench {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

constexpr std::string_view kCsvHeader =
    "experiment,protocol,workload,n,time_mean_s,time_stddev_s,acc_mean,"
    "acc_stddev,host,timestamp";

std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
    throw std::invalid_argument("bad number '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
    throw std::invalid_argument("bad count '" + std::string(s) + "'");
  }
  return v;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_data = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      row_has_data = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_has_data = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (row_has_data || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      row_has_data = false;
    } else {
      field += c;
      row_has_data = true;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
  if (row_has_data || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

json stats_to_json(const TrialStats& s) {
  return {{"n", s.n},
          {"mean", s.mean},
          {"stddev", s.stddev ? json(*s.stddev) : json(nullptr)}};
}

TrialStats stats_from_json(const json& j) {
  TrialStats s;
  s.n = j.at("n").get<std::size_t>();
  s.mean = j.at("mean").get<double>();
  if (!j.at("stddev").is_null()) s.stddev = j.at("stddev").get<double>();
  return s;
}

std::string format_pm(const TrialStats& s, int precision) {
  char buf[96];
  if (s.stddev) {
    std::snprintf(buf, sizeof buf, "%.*f ± %.*f", precision, s.mean, precision,
                  *s.stddev);
  } else {
    std::snprintf(buf, sizeof buf, "%.*f (n=%zu)", precision, s.mean, s.n);
  }
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  // Count UTF-8 code points so "±" occupies one column.
  std::size_t cols = 0;
  for (const char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++cols;
  }
  if (cols < width) s.append(width - cols, ' ');
  return s;
}

// Rows are protocols (and metric for GA), columns are workloads.
void emit_table(std::span<const BenchReport> reports, std::ostream& out) {
  std::vector<std::string> experiments;
  for (const BenchReport& r : reports) {
    if (std::find(experiments.begin(), experiments.end(), r.experiment) ==
        experiments.end()) {
      experiments.push_back(r.experiment);
    }
  }
  constexpr std::size_t kLabel = 24;
  constexpr std::size_t kCell = 28;
  for (const std::string& exp : experiments) {
    std::vector<std::string> workloads;
    std::vector<std::string> protocols;
    std::map<std::pair<std::string, std::string>, const BenchReport*> cells;
    for (const BenchReport& r : reports) {
      if (r.experiment != exp) continue;
      if (std::find(workloads.begin(), workloads.end(), r.workload) ==
          workloads.end()) {
        workloads.push_back(r.workload);
      }
      if (std::find(protocols.begin(), protocols.end(), r.protocol) ==
          protocols.end()) {
        protocols.push_back(r.protocol);
      }
      cells[{r.protocol, r.workload}] = &r;
    }
    out << "[" << exp << "]\n" << pad("", kLabel);
    for (const std::string& w : workloads) out << pad(w, kCell);
    out << "\n";
    for (const std::string& p : protocols) {
      const auto row = [&](const std::string& label, bool accuracy_row) {
        out << pad(label, kLabel);
        for (const std::string& w : workloads) {
          const auto it = cells.find({p, w});
          std::string cell = "-";
          if (it != cells.end()) {
            const BenchReport& r = *it->second;
            if (!accuracy_row) {
              cell = format_pm(r.time, 2);
            } else if (r.accuracy) {
              cell = format_pm(*r.accuracy, 6);
            }
          }
          out << pad(cell, kCell);
        }
        out << "\n";
      };
      if (exp == "ga") {
        row(p + " accuracy", true);
        row(p + " time (sec.)", false);
      } else {
        row(p + " time (sec.)", false);
      }
    }
    out << "\n";
  }
  out << "±: sample standard deviation (n - 1)\n";
}

void emit_csv(std::span<const BenchReport> reports, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const BenchReport& r : reports) {
    out << csv_field(r.experiment) << ',' << csv_field(r.protocol) << ','
        << csv_field(r.workload) << ',' << r.time.n << ','
        << shortest(r.time.mean) << ','
        << (r.time.stddev ? shortest(*r.time.stddev) : "") << ','
        << (r.accuracy ? shortest(r.accuracy->mean) : "") << ','
        << (r.accuracy && r.accuracy->stddev ? shortest(*r.accuracy->stddev)
                                             : "")
        << ',' << csv_field(r.host) << ',' << csv_field(r.timestamp) << "\n";
  }
}

void emit_json(std::span<const BenchReport> reports, std::ostream& out) {
  json arr = json::array();
  for (const BenchReport& r : reports) {
    arr.push_back(
        {{"experiment", r.experiment},
         {"protocol", r.protocol},
         {"workload", r.workload},
         {"time", stats_to_json(r.time)},
         {"accuracy", r.accuracy ? stats_to_json(*r.accuracy) : json(nullptr)},
         {"host", r.host},
         {"timestamp", r.timestamp}});
  }
  out << arr.dump(2) << "\n";
}

std::vector<BenchReport> parse_json_reports(std::string_view text) {
  const json arr = json::parse(text);
  if (!arr.is_array()) {
    throw std::invalid_argument("report JSON must be an array");
  }
  std::vector<BenchReport> out;
  for (const json& j : arr) {
    BenchReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.protocol = j.at("protocol").get<std::string>();
    r.workload = j.at("workload").get<std::string>();
    r.time = stats_from_json(j.at("time"));
    if (!j.at("accuracy").is_null()) {
      r.accuracy = stats_from_json(j.at("accuracy"));
    }
    r.host = j.at("host").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<BenchReport> parse_csv_reports(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw std::invalid_argument("empty CSV report");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    if (i) header += ',';
    header += rows[0][i];
  }
  if (header != kCsvHeader) {
    throw std::invalid_argument("unexpected CSV header: " + header);
  }
  std::vector<BenchReport> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 10) {
      throw std::invalid_argument("CSV row " + std::to_string(i) + " has " +
                                  std::to_string(f.size()) + " fields");
    }
    BenchReport r;
    r.experiment = f[0];
    r.protocol = f[1];
    r.workload = f[2];
    r.time.n = parse_count(f[3]);
    r.time.mean = parse_double(f[4]);
    if (!f[5].empty()) r.time.stddev = parse_double(f[5]);
    if (!f[6].empty()) {
      TrialStats acc;
      acc.n = r.time.n;
      acc.mean = parse_double(f[6]);
      if (!f[7].empty()) acc.stddev = parse_double(f[7]);
      r.accuracy = acc;
    }
    r.host = f[8];
    r.timestamp = f[9];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TrialStats mean_stddev(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw StatisticsError("standard deviation needs at least 2 samples, got " +
                          std::to_string(samples.size()));
  }
  return summarize(samples);
}

TrialStats summarize(std::span<const double> samples) {
  if (samples.empty()) throw StatisticsError("no samples");
  TrialStats s;
  s.n = samples.size();
  double sum = 0.0;
  for (const double x : samples) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0.0;
    for (const double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::string echo_workload(std::size_t payload_len) {
  return "len=" + std::to_string(payload_len);
}

std::string ga_workload(std::size_t generations, std::size_t population) {
  return "gen=" + std::to_string(generations) +
         ";pop=" + std::to_string(population);
}

std::string make_payload(std::size_t length) {
  constexpr std::string_view kDigits = "01234567890";
  std::string out;
  out.reserve(length);
  while (out.size() < length) {
    out.append(
        kDigits.substr(0, std::min(kDigits.size(), length - out.size())));
  }
  return out;
}

void stamp_environment(BenchReport& report) {
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) != 0) host[0] = '\0';
  report.host = host;
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  report.timestamp = stamp;
}

TrialStats run_echo_experiment(ProtocolClient& client, const EchoOptions& opt) {
  if (opt.iterations == 0) {
    throw StatisticsError("echo experiment needs at least one iteration");
  }
  if (opt.trials < 2) {
    throw StatisticsError("echo experiment needs at least two trials");
  }
  const std::string payload = make_payload(opt.payload_len);
  const auto roundtrip = [&] {
    const std::string echoed = echo_roundtrip(client, payload);
    if (echoed != payload) {
      throw RoundTripError("pop", "echo differs from the pushed payload");
    }
  };
  const auto timed_trial = [&]() -> double {
    for (std::size_t i = 0; i < opt.warmup; ++i) roundtrip();
    const auto start = Clock::now();
    for (std::size_t i = 0; i < opt.iterations; ++i) roundtrip();
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  std::vector<double> seconds;
  seconds.reserve(opt.trials);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    try {
      seconds.push_back(timed_trial());
    } catch (const RpcError&) {
      seconds.push_back(timed_trial());  // one re-run; a second failure throws
    }
  }
  return mean_stddev(seconds);
}

BenchReport make_echo_report(Protocol protocol, std::size_t payload_len,
                             const TrialStats& stats) {
  BenchReport r;
  r.experiment = "echo";
  r.protocol = std::string(protocol_name(protocol));
  r.workload = echo_workload(payload_len);
  r.time = stats;
  stamp_environment(r);
  return r;
}

GaExperiment run_ga_experiment(Protocol protocol, const GAConfig& cfg,
                               const BatchEvaluator& evaluator,
                               std::size_t repeats) {
  if (repeats == 0) throw StatisticsError("GA experiment needs repeats >= 1");
  cfg.validate();
  GaExperiment exp;
  std::vector<double> times;
  std::vector<double> accuracies;

  const auto summarize_into = [&](BenchReport& r) {
    r.experiment = "ga";
    r.protocol = std::string(protocol_name(protocol));
    r.workload = ga_workload(cfg.generations, cfg.population_size);
    r.time = summarize(times);
    r.accuracy = summarize(accuracies);
    stamp_environment(r);
  };

  for (std::size_t k = 0; k < repeats; ++k) {
    GAConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + k;
    try {
      exp.runs.push_back(run_ga(run_cfg, evaluator));
    } catch (const std::exception& e) {
      std::optional<BenchReport> partial;
      if (!times.empty()) {
        partial.emplace();
        summarize_into(*partial);
      }
      throw ExperimentAborted("GA run " + std::to_string(k) + " (seed " +
                                  std::to_string(run_cfg.seed) +
                                  ") failed: " + e.what(),
                              std::move(partial));
    }
    times.push_back(exp.runs.back().wall_time_s);
    accuracies.push_back(exp.runs.back().best_accuracy);
  }
  summarize_into(exp.report);
  return exp;
}

std::optional<ReportFormat> report_format_from_name(std::string_view name) {
  if (name == "table") return ReportFormat::kTable;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  return std::nullopt;
}

void emit_report(std::span<const BenchReport> reports, ReportFormat format,
                 std::ostream& out) {
  if (reports.empty()) throw std::invalid_argument("no reports to emit");
  switch (format) {
    case ReportFormat::kTable:
      emit_table(reports, out);
      break;
    case ReportFormat::kCsv:
      emit_csv(reports, out);
      break;
    case ReportFormat::kJson:
      emit_json(reports, out);
      break;
  }
}

std::string render_report(std::span<const BenchReport> reports,
                          ReportFormat format) {
  std::ostringstream out;
  emit_report(reports, format, out);
  return out.str();
}

void write_report_file(std::span<const BenchReport> reports,
                       ReportFormat format, const std::filesystem::path& path) {
  const std::string text = render_report(reports, format);
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << text;
    f.flush();
    if (!f) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw std::runtime_error("cannot rename into " + path.string() + ": " +
                             ec.message());
  }
}

std::vector<BenchReport> parse_reports(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    throw std::invalid_argument("empty report input");
  }
  return text[first] == '[' ? parse_json_reports(text)
                            : parse_csv_reports(text);
}

std::vector<BenchReport> read_report_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_reports(buf.str());
}

}  // namespace farmbench
