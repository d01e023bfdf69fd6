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

#include "farmbench/genome.hpp"

#include <algorithm>
#include <cmath>

namespace farmbench {

namespace {

double axis_value(std::uint64_t n, const SearchDomain& d) {
  const std::uint64_t max = (std::uint64_t{1} << d.bits_per_axis) - 1;
  const double t = static_cast<double>(n) / static_cast<double>(max);
  return std::clamp(d.lo + t * (d.hi - d.lo), d.lo, d.hi);
}

}  // namespace

void SearchDomain::validate() const {
  if (!(lo < hi)) {
    throw std::invalid_argument("search domain requires lo < hi");
  }
  if (bits_per_axis < 1 || bits_per_axis > 63) {
    throw std::invalid_argument("bits per axis must be in [1, 63], got " +
                                std::to_string(bits_per_axis));
  }
}

double SearchDomain::resolution() const {
  const std::uint64_t max = (std::uint64_t{1} << bits_per_axis) - 1;
  return (hi - lo) / static_cast<double>(max);
}

Genome::Genome(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] > 1) {
      throw DecodeError("genome element " + std::to_string(i) +
                        " is not a bit");
    }
  }
}

Genome Genome::from_string(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '0' && c != '1') {
      throw DecodeError("genome character at offset " + std::to_string(i) +
                        " is not 0 or 1");
    }
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return Genome(std::move(bits));
}

std::string Genome::to_string() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i] = '1';
  }
  return out;
}

std::uint64_t bits_to_uint(std::span<const std::uint8_t> bits) {
  std::uint64_t n = 0;
  for (const std::uint8_t b : bits) n = (n << 1) | b;
  return n;
}

Phenotype decode(const Genome& g, const SearchDomain& d) {
  if (g.size() != d.genome_length()) {
    throw DecodeError("genome length mismatch: expected " +
                      std::to_string(d.genome_length()) + ", got " +
                      std::to_string(g.size()));
  }
  const auto half = static_cast<std::size_t>(d.bits_per_axis);
  const auto bits = g.bits();
  return {axis_value(bits_to_uint(bits.first(half)), d),
          axis_value(bits_to_uint(bits.subspan(half)), d)};
}

Fitness sombrero(const Phenotype& p) {
  const double r = std::hypot(p.x, p.y);
  if (r == 0.0) return {2.0};
  return {1.0 + std::sin(r) / r};
}

Genome random_genome(Rng& rng, const SearchDomain& d) {
  Genome g(d.genome_length());
  for (std::size_t i = 0; i < g.size(); ++i) g.set(i, (rng() >> 63) != 0);
  return g;
}

}  // namespace farmbench
