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

#include "farmbench/ga.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace farmbench {

namespace {

bool in_unit_interval(double p) { return p >= 0.0 && p <= 1.0; }

std::size_t truncation_count(double rate, std::size_t n) {
  // The epsilon absorbs representation error, e.g. 0.4 * 50.
  return static_cast<std::size_t>(
      std::ceil(rate * static_cast<double>(n) - 1e-9));
}

}  // namespace

void GAConfig::validate() const {
  domain.validate();
  if (population_size == 0) {
    throw std::invalid_argument("population size must be positive");
  }
  if (generations == 0) {
    throw std::invalid_argument("generations must be positive");
  }
  if (!in_unit_interval(mutation_rate) || !in_unit_interval(crossover_rate) ||
      !in_unit_interval(selection_rate)) {
    throw std::invalid_argument("rates must lie in [0, 1]");
  }
  if (survivor_count() < 2) {
    throw std::invalid_argument(
        "selection rate keeps fewer than two parents (population " +
        std::to_string(population_size) + ")");
  }
}

std::size_t GAConfig::survivor_count() const {
  return truncation_count(selection_rate, population_size);
}

BatchEvaluator local_evaluator(const SearchDomain& domain) {
  return [domain](std::span<const Genome> batch) {
    std::vector<Fitness> out;
    out.reserve(batch.size());
    for (const Genome& g : batch) out.push_back(evaluate_genome(g, domain));
    return out;
  };
}

std::pair<Genome, Genome> two_point_crossover(const Genome& a, const Genome& b,
                                              std::size_t cut1,
                                              std::size_t cut2) {
  if (a.size() != b.size()) {
    throw OperatorError(
        "crossover parents differ in length: " + std::to_string(a.size()) +
        " vs " + std::to_string(b.size()));
  }
  if (!(cut1 < cut2) || cut2 > a.size()) {
    throw OperatorError("crossover cuts must satisfy 0 <= cut1 < cut2 <= " +
                        std::to_string(a.size()));
  }
  Genome c = a;
  Genome d = b;
  for (std::size_t i = cut1; i < cut2; ++i) {
    c.set(i, b[i] != 0);
    d.set(i, a[i] != 0);
  }
  return {std::move(c), std::move(d)};
}

Genome bitflip_mutation(const Genome& g, Rng& rng, double per_bit_prob) {
  if (!in_unit_interval(per_bit_prob)) {
    throw OperatorError("per-bit flip probability must lie in [0, 1]");
  }
  Genome out = g;
  std::bernoulli_distribution flip(per_bit_prob);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (flip(rng)) out.flip(i);
  }
  return out;
}

Population select_survivors(const Population& pop, double selection_rate) {
  if (!in_unit_interval(selection_rate)) {
    throw std::invalid_argument("selection rate must lie in [0, 1]");
  }
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (!pop[i].fitness) {
      throw std::logic_error("select_survivors: individual " +
                             std::to_string(i) + " has no fitness");
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&pop](std::size_t l, std::size_t r) {
                     return pop[l].fitness->value > pop[r].fitness->value;
                   });
  order.resize(
      std::min(order.size(), truncation_count(selection_rate, pop.size())));
  Population out;
  out.reserve(order.size());
  for (const std::size_t i : order) out.push_back(pop[i]);
  return out;
}

Population breed(const Population& survivors, Rng& rng, const GAConfig& cfg) {
  if (survivors.size() < 2) {
    throw OperatorError("breeding needs at least two survivors, got " +
                        std::to_string(survivors.size()));
  }
  std::vector<double> weights;
  weights.reserve(survivors.size());
  for (const Individual& ind : survivors) {
    if (!ind.fitness) {
      throw std::logic_error("breed: survivor without fitness");
    }
    weights.push_back(ind.fitness->value);
  }
  std::discrete_distribution<std::size_t> roulette(weights.begin(),
                                                   weights.end());
  std::bernoulli_distribution do_crossover(cfg.crossover_rate);
  std::bernoulli_distribution do_mutation(cfg.mutation_rate);

  const std::size_t wanted = cfg.population_size > survivors.size()
                                 ? cfg.population_size - survivors.size()
                                 : 0;
  const std::size_t length = survivors.front().genome.size();
  std::uniform_int_distribution<std::size_t> cut_point(0, length);

  Population offspring;
  offspring.reserve(wanted + 1);
  while (offspring.size() < wanted) {
    const Genome& mother = survivors[roulette(rng)].genome;
    const Genome& father = survivors[roulette(rng)].genome;
    Genome a = mother;
    Genome b = father;
    if (do_crossover(rng)) {
      std::size_t cut1 = cut_point(rng);
      std::size_t cut2 = cut_point(rng);
      while (cut2 == cut1) cut2 = cut_point(rng);
      if (cut1 > cut2) std::swap(cut1, cut2);
      std::tie(a, b) = two_point_crossover(a, b, cut1, cut2);
    }
    const double per_bit = 1.0 / static_cast<double>(length);
    for (Genome* child : {&a, &b}) {
      if (do_mutation(rng)) *child = bitflip_mutation(*child, rng, per_bit);
      // With mutation enabled, a child equal to a parent is mutated until it
      // differs; a clone would only repeat a known evaluation.
      if (cfg.mutation_rate > 0.0) {
        while (*child == mother || *child == father) {
          *child = bitflip_mutation(*child, rng, per_bit);
        }
      }
    }
    offspring.push_back({std::move(a), std::nullopt});
    offspring.push_back({std::move(b), std::nullopt});
  }
  offspring.resize(wanted);
  return offspring;
}

GAResult run_ga(const GAConfig& cfg, const BatchEvaluator& evaluator,
                const GenerationObserver& observer) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);

  Population pop;
  pop.reserve(cfg.population_size);
  for (std::size_t i = 0; i < cfg.population_size; ++i) {
    pop.push_back({random_genome(rng, cfg.domain), std::nullopt});
  }

  GAResult result;
  bool have_best = false;
  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    std::vector<std::size_t> pending;
    std::vector<Genome> batch;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!pop[i].fitness) {
        pending.push_back(i);
        batch.push_back(pop[i].genome);
      }
    }
    if (!batch.empty()) {
      std::vector<Fitness> scores;
      try {
        scores = evaluator(batch);
      } catch (const std::exception& e) {
        throw EvaluationAborted(gen, e.what());
      }
      if (scores.size() != batch.size()) {
        throw EvaluationAborted(
            gen, "evaluator returned " + std::to_string(scores.size()) +
                     " results for " + std::to_string(batch.size()) +
                     " genomes");
      }
      for (std::size_t k = 0; k < pending.size(); ++k) {
        pop[pending[k]].fitness = scores[k];
      }
      result.evaluations += batch.size();
    }

    for (const Individual& ind : pop) {
      if (!have_best || ind.fitness->value > result.best.fitness->value) {
        result.best = ind;
        have_best = true;
      }
    }
    result.per_generation_best.push_back(accuracy(*result.best.fitness));
    if (observer) observer(gen, pop);

    if (gen + 1 < cfg.generations) {
      Population next = select_survivors(pop, cfg.selection_rate);
      Population children = breed(next, rng, cfg);
      next.insert(next.end(), std::make_move_iterator(children.begin()),
                  std::make_move_iterator(children.end()));
      pop = std::move(next);
    }
  }

  result.best_accuracy = accuracy(*result.best.fitness);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace farmbench
