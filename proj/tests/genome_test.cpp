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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace farmbench {
namespace {

// Values computed once with 40-digit arithmetic.
constexpr double kSombrero34 = 0.8082151450673723062213691187688;
constexpr double kSinc5 = -0.1917848549326276937786308812312;
constexpr double kSombreroCorner = 1.070709805274679272330190986944878;
constexpr double kHalfStepX16 = 0.000152590218966964217593652246891;

SearchDomain domain16() { return {-10.0, 10.0, 16}; }

// Reference decoder: accumulates the integer one bit at a time from the wire
// string, then maps it with long double arithmetic.
long double oracle_axis(const std::string& half, long double lo,
                        long double hi) {
  unsigned long long n = 0;
  for (char c : half) n = n * 2 + static_cast<unsigned>(c - '0');
  const long double max = std::ldexp(1.0L, static_cast<int>(half.size())) - 1;
  return lo + static_cast<long double>(n) / max * (hi - lo);
}

long double oracle_sombrero(long double x, long double y) {
  const long double r = std::sqrt(x * x + y * y);
  if (r == 0.0L) return 2.0L;
  return 1.0L + std::sin(r) / r;
}

TEST(SearchDomainTest, DefaultResolutionSupportsMicroAccuracy) {
  const SearchDomain d;
  EXPECT_EQ(d.lo, -10.0);
  EXPECT_EQ(d.hi, 10.0);
  EXPECT_EQ(d.bits_per_axis, 32);
  EXPECT_EQ(d.genome_length(), 64u);
  EXPECT_LE(d.resolution(), 1e-5);
  EXPECT_NEAR(d.resolution(), 20.0 / 4294967295.0, 1e-20);
}

TEST(SearchDomainTest, RejectsBadDomains) {
  EXPECT_THROW((SearchDomain{1.0, 1.0, 8}.validate()), std::invalid_argument);
  EXPECT_THROW((SearchDomain{2.0, 1.0, 8}.validate()), std::invalid_argument);
  EXPECT_THROW((SearchDomain{-1.0, 1.0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((SearchDomain{-1.0, 1.0, 64}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((SearchDomain{-1.0, 1.0, 63}.validate()));
}

TEST(GenomeTest, WireFormRoundTrips) {
  const Genome g = Genome::from_string("0110001");
  EXPECT_EQ(g.size(), 7u);
  EXPECT_EQ(g[1], 1);
  EXPECT_EQ(g[3], 0);
  EXPECT_EQ(g.to_string(), "0110001");
  EXPECT_THROW(Genome::from_string("01X0"), std::invalid_argument);
  EXPECT_TRUE(Genome::from_string("").empty());
}

TEST(DecodeTest, AllZeroMapsToLowerCorner) {
  const Phenotype p = decode(Genome(32), domain16());
  EXPECT_EQ(p.x, -10.0);
  EXPECT_EQ(p.y, -10.0);
}

TEST(DecodeTest, AllOneMapsToUpperCorner) {
  const Phenotype p =
      decode(Genome::from_string(std::string(32, '1')), domain16());
  EXPECT_EQ(p.x, 10.0);
  EXPECT_EQ(p.y, 10.0);
}

TEST(DecodeTest, LeadingBitIsMostSignificant) {
  const std::string half = "1" + std::string(15, '0');
  const Phenotype p =
      decode(Genome::from_string(half + std::string(16, '0')), domain16());
  const long double expected = oracle_axis(half, -10.0L, 10.0L);
  EXPECT_NEAR(p.x, static_cast<double>(expected), 1e-15);
  EXPECT_NEAR(p.x, kHalfStepX16, 1e-15);
  EXPECT_EQ(p.y, -10.0);
}

TEST(DecodeTest, LengthMismatchNamesBothLengths) {
  try {
    decode(Genome(31), domain16());
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("32"), std::string::npos) << msg;
    EXPECT_NE(msg.find("31"), std::string::npos) << msg;
  }
}

TEST(DecodeTest, MatchesOracleOnRandomGenomes) {
  Rng rng(11);
  for (int bits : {1, 3, 16, 32, 53, 63}) {
    const SearchDomain d{-3.5, 7.25, bits};
    for (int k = 0; k < 200; ++k) {
      const Genome g = random_genome(rng, d);
      const std::string s = g.to_string();
      const Phenotype p = decode(g, d);
      const auto b = static_cast<std::size_t>(bits);
      EXPECT_NEAR(
          p.x, static_cast<double>(oracle_axis(s.substr(0, b), -3.5L, 7.25L)),
          1e-12);
      EXPECT_NEAR(p.y,
                  static_cast<double>(oracle_axis(s.substr(b), -3.5L, 7.25L)),
                  1e-12);
      EXPECT_GE(p.x, d.lo);
      EXPECT_LE(p.x, d.hi);
      EXPECT_GE(p.y, d.lo);
      EXPECT_LE(p.y, d.hi);
    }
  }
}

TEST(DecodeTest, InjectiveOnEqualLengths) {
  const SearchDomain d{-10.0, 10.0, 5};
  std::set<std::pair<double, double>> seen;
  for (unsigned k = 0; k < 1024; ++k) {
    Genome g(10);
    for (std::size_t i = 0; i < 10; ++i) g.set(i, (k >> (9 - i)) & 1u);
    const Phenotype p = decode(g, d);
    EXPECT_TRUE(seen.emplace(p.x, p.y).second) << g.to_string();
  }
}

TEST(SombreroTest, Examples) {
  EXPECT_EQ(sombrero({0.0, 0.0}).value, 2.0);
  EXPECT_NEAR(sombrero({std::numbers::pi, 0.0}).value, 1.0, 1e-15);
  EXPECT_NEAR(sombrero({3.0, 4.0}).value, kSombrero34, 1e-15);
}

TEST(SombreroTest, RadiallySymmetric) {
  Rng rng(5);
  std::uniform_real_distribution<double> radius(0.0, 30.0);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  for (int k = 0; k < 5000; ++k) {
    const double r = radius(rng);
    const double a = angle(rng);
    const double b = angle(rng);
    const Fitness f1 = sombrero({r * std::cos(a), r * std::sin(a)});
    const Fitness f2 = sombrero({r * std::cos(b), r * std::sin(b)});
    ASSERT_LE(std::abs(f1.value - f2.value), 1e-12) << "r=" << r;
  }
}

TEST(SombreroTest, StaysWithinGlobalBounds) {
  Rng rng(6);
  std::uniform_real_distribution<double> coord(-1e3, 1e3);
  for (int k = 0; k < 20000; ++k) {
    const double v = sombrero({coord(rng), coord(rng)}).value;
    ASSERT_GE(v, 0.78);
    ASSERT_LE(v, 2.0);
  }
  // Global minimum sits at the first root of tan(r) = r.
  const double r_min = 4.493409457909064;
  EXPECT_NEAR(sombrero({r_min, 0.0}).value, 0.782766, 1e-6);
  EXPECT_GE(sombrero({r_min, 0.0}).value, kSombreroMin);
  // Tiny radii must not suffer cancellation.
  EXPECT_NEAR(sombrero({1e-9, 0.0}).value, 2.0, 1e-15);
}

TEST(AccuracyTest, Examples) {
  EXPECT_EQ(accuracy(Fitness{2.0}), 1.0);
  EXPECT_EQ(accuracy(Fitness{1.0}), 0.0);
  EXPECT_NEAR(accuracy(sombrero({3.0, 4.0})), kSinc5, 1e-15);
  EXPECT_EQ(accuracy(sombrero({0.0, 0.0})), 1.0);
}

TEST(AccuracyTest, OneOnlyAtTheOrigin) {
  // Over an 8-bit-per-axis grid containing no exact origin, accuracy 1 is
  // reached only at the four centre cells (within decode resolution).
  const SearchDomain d{-1.0, 1.0, 8};
  for (unsigned k = 0; k < (1u << 16); ++k) {
    Genome g(16);
    for (std::size_t i = 0; i < 16; ++i) g.set(i, (k >> (15 - i)) & 1u);
    const Phenotype p = decode(g, d);
    const double acc = accuracy(sombrero(p));
    const bool near_origin =
        std::abs(p.x) <= d.resolution() && std::abs(p.y) <= d.resolution();
    if (!near_origin) {
      ASSERT_LT(acc, 1.0 - 1e-6) << g.to_string();
    } else {
      ASSERT_GT(acc, 1.0 - 1e-4);
    }
  }
  EXPECT_EQ(accuracy(sombrero({0.0, 0.0})), 1.0);
}

TEST(SombreroTest, CornerMatchesHighPrecisionValue) {
  EXPECT_NEAR(evaluate_genome(Genome(64), SearchDomain{}).value,
              kSombreroCorner, 1e-15);
}

TEST(OracleTest, AllFourBitGenomesMatchBruteForce) {
  const SearchDomain d{-10.0, 10.0, 4};
  for (unsigned k = 0; k < 256; ++k) {
    std::string s;
    for (int i = 7; i >= 0; --i) s += ((k >> i) & 1u) ? '1' : '0';
    const Genome g = Genome::from_string(s);
    const auto bits = g.bits();
    EXPECT_EQ(bits_to_uint(bits.subspan(0, 4)), k >> 4);
    EXPECT_EQ(bits_to_uint(bits.subspan(4)), k & 15u);
    const long double x = -10.0L + (k >> 4) * 20.0L / 15.0L;
    const long double y = -10.0L + (k & 15u) * 20.0L / 15.0L;
    EXPECT_NEAR(evaluate_genome(g, d).value,
                static_cast<double>(oracle_sombrero(x, y)), 1e-12)
        << s;
  }
}

TEST(RandomGenomeTest, DeterministicForSeed) {
  Rng a(1234);
  Rng b(1234);
  const Genome ga = random_genome(a, domain16());
  EXPECT_EQ(ga.size(), 32u);
  EXPECT_EQ(ga, random_genome(b, domain16()));
  Rng c(1235);
  EXPECT_NE(ga, random_genome(c, domain16()));
}

TEST(RandomGenomeTest, BitsAreBalanced) {
  Rng rng(77);
  std::size_t ones = 0;
  std::size_t total = 0;
  for (int k = 0; k < 10000; ++k) {
    const Genome g = random_genome(rng, domain16());
    for (auto bit : g.bits()) {
      ASSERT_LE(bit, 1);
      ones += bit;
    }
    total += g.size();
  }
  const double frac = static_cast<double>(ones) / static_cast<double>(total);
  EXPECT_GE(frac, 0.48);
  EXPECT_LE(frac, 0.52);
}

TEST(RandomGenomeTest, OneBitPerAxis) {
  Rng rng(1);
  EXPECT_EQ(random_genome(rng, SearchDomain{-1.0, 1.0, 1}).size(), 2u);
}

}  // namespace
}  // namespace farmbench
