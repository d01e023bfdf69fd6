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

// Bitstring genomes, their decoding onto a 2-D search domain, and the
// sombrero fitness f(x, y) = 1 + sin(r) / r.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace farmbench {

/// Seeded random stream shared by the genome and GA operators.
using Rng = std::mt19937_64;

class DecodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Axis bounds plus the number of bits used to encode each axis.
struct SearchDomain {
  double lo = -10.0;
  double hi = 10.0;
  int bits_per_axis = 32;

  /// Throws std::invalid_argument unless lo < hi and 1 <= bits <= 63.
  void validate() const;

  std::size_t genome_length() const {
    return 2 * static_cast<std::size_t>(bits_per_axis);
  }

  /// Distance between adjacent decodable values on one axis.
  double resolution() const;

  friend bool operator==(const SearchDomain&, const SearchDomain&) = default;
};

/// Fixed-length bitstring. Every element is 0 or 1.
class Genome {
 public:
  Genome() = default;
  explicit Genome(std::size_t length) : bits_(length, 0) {}
  explicit Genome(std::vector<std::uint8_t> bits);

  /// Parses the wire form: ASCII '0'/'1', most significant bit first.
  static Genome from_string(std::string_view text);
  std::string to_string() const;

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool bit) { bits_.at(i) = bit ? 1 : 0; }
  void flip(std::size_t i) { bits_.at(i) ^= 1; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const Genome&, const Genome&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct Phenotype {
  double x = 0.0;
  double y = 0.0;
};

/// Sombrero value; lies in [1 + min sin(r)/r, 2] ~ [0.7828, 2].
struct Fitness {
  double value = 0.0;

  friend auto operator<=>(const Fitness&, const Fitness&) = default;
};

/// Lower bound of 1 + sin(r)/r over r >= 0 (first minimum near r = 4.4934).
inline constexpr double kSombreroMin = 0.78276;
inline constexpr double kSombreroMax = 2.0;

/// Reads `bits` as an unsigned big-endian integer.
std::uint64_t bits_to_uint(std::span<const std::uint8_t> bits);

/// Maps the x half and the y half of `g` linearly onto [lo, hi].
/// Throws DecodeError if the length does not match the domain.
Phenotype decode(const Genome& g, const SearchDomain& d);

Fitness sombrero(const Phenotype& p);

/// f - 1: the sin(r)/r term, equal to 1 exactly at the origin.
inline double accuracy(Fitness f) { return f.value - 1.0; }

/// sombrero(decode(g, d)).
inline Fitness evaluate_genome(const Genome& g, const SearchDomain& d) {
  return sombrero(decode(g, d));
}

Genome random_genome(Rng& rng, const SearchDomain& d);

}  // namespace farmbench
