// Copyright 2026 the sosmax authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOSMAX_ROUNDING_HPP
#define SOSMAX_ROUNDING_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "sosmax/basis.hpp"

namespace sosmax {

struct RoundingConfig {
  int q_min = 4;        // minimum eigenvector count
  int num_rounds = 50;  // random unit-sphere samples
  double zero_tol = 1e-6;
  std::uint64_t rng_seed = 1;
  std::vector<double> xi;  // per-component weights; empty = all ones
};

struct RoundingResult {
  std::vector<std::int8_t> best_x;
  double best_value = std::numeric_limits<double>::infinity();  // falsified weight
  bool has_consensus = false;
  std::vector<double> consensus;  // mean over best-attaining roundings
};

/// Sign rounding of random null-space combinations of a (near-)PSD iterate.
/// Basis rows 1..n must be the singletons; candidates are scored by
/// count_unsat on `prop` unless a custom evaluator is supplied.
RoundingResult round_assignments(
    const Eigen::MatrixXd& m_tilde, const MonomialBasis& basis, const Proposition& prop,
    const RoundingConfig& cfg,
    const std::function<double(std::span<const std::int8_t>)>& evaluator = {});

struct LocalSearchResult {
  std::vector<std::int8_t> x;
  double soft_falsified = std::numeric_limits<double>::infinity();
  bool hard_feasible = false;
};

/// Configuration-checking stochastic local search (greedy weighted flips,
/// focused random walk, restarts). Hard clauses dominate every soft weight.
/// The budget converts to a fixed flip count so runs are seed-deterministic.
LocalSearchResult local_search_lb(const Proposition& prop, double seconds, std::uint64_t seed);

}  // namespace sosmax

#endif  // SOSMAX_ROUNDING_HPP
