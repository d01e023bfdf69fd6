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

// Generational GA run by the master process. Fitness evaluation is delegated
// to a batch evaluator, which may be local or a pool of remote slaves.
//
// One generation: evaluate every individual without a fitness, keep the top
// selection_rate fraction (truncation), then refill the population with
// offspring of roulette-chosen survivors (two-point crossover with
// probability crossover_rate, bitflip mutation at 1/length per bit with
// probability mutation_rate). While mutation is enabled, a child that is a
// copy of one of its parents is always mutated. Survivors keep their fitness
// and are never re-evaluated.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "farmbench/genome.hpp"

namespace farmbench {

class OperatorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by run_ga when the evaluator fails; carries the generation index.
class EvaluationAborted : public std::runtime_error {
 public:
  EvaluationAborted(std::size_t generation, const std::string& what)
      : std::runtime_error("evaluation failed in generation " +
                           std::to_string(generation) + ": " + what),
        generation_(generation) {}

  std::size_t generation() const { return generation_; }

 private:
  std::size_t generation_;
};

struct GAConfig {
  std::size_t population_size = 50;
  std::size_t generations = 20;
  double mutation_rate = 0.2;
  double crossover_rate = 0.8;
  double selection_rate = 0.4;
  std::uint64_t seed = 1;
  SearchDomain domain;

  /// Throws std::invalid_argument on out-of-range rates, empty sizes, or
  /// fewer than two survivors.
  void validate() const;

  /// ceil(selection_rate * population_size).
  std::size_t survivor_count() const;
};

struct Individual {
  Genome genome;
  std::optional<Fitness> fitness;
};

using Population = std::vector<Individual>;

/// Evaluates a batch of genomes; result i belongs to genome i.
using BatchEvaluator =
    std::function<std::vector<Fitness>(std::span<const Genome>)>;

/// In-process evaluator over `domain`.
BatchEvaluator local_evaluator(const SearchDomain& domain);

struct GAResult {
  Individual best;
  double best_accuracy = 0.0;
  double wall_time_s = 0.0;
  std::vector<double> per_generation_best;
  std::size_t evaluations = 0;
};

/// Called after each generation is evaluated, before selection.
using GenerationObserver =
    std::function<void(std::size_t generation, const Population& population)>;

/// Children swap the segment [cut1, cut2).
std::pair<Genome, Genome> two_point_crossover(const Genome& a, const Genome& b,
                                              std::size_t cut1,
                                              std::size_t cut2);

Genome bitflip_mutation(const Genome& g, Rng& rng, double per_bit_prob);

/// The ceil(selection_rate * |pop|) fittest, best first; ties keep the lower
/// population index first.
Population select_survivors(const Population& pop, double selection_rate);

/// Produces population_size - |survivors| unevaluated offspring.
Population breed(const Population& survivors, Rng& rng, const GAConfig& cfg);

GAResult run_ga(const GAConfig& cfg, const BatchEvaluator& evaluator,
                const GenerationObserver& observer = {});

}  // namespace farmbench
