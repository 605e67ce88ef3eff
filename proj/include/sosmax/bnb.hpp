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

#ifndef SOSMAX_BNB_HPP
#define SOSMAX_BNB_HPP

#include <iosfwd>
#include <memory>

#include "sosmax/prsm.hpp"
#include "sosmax/rounding.hpp"

namespace sosmax {

struct SolverConfig {
  BasisSpec basis;
  PrsmParams prsm;
  RoundingConfig rounding;
  double time_limit = 0.0;  // seconds; 0 = none
  double ls_budget = 5.0;   // initial local-search seconds
  std::uint64_t seed = 1;
  int node_iters = 200;        // per-node PRSM budget
  int extend_iters = 200;      // extra budget when the gap is small
  double extend_margin = 1.5;  // extend when UB <= LB + margin
  std::ostream* progress = nullptr;  // line-delimited JSON per node
};

struct SolveStats {
  long long nodes = 0;
  long long probes = 0;
  long long prsm_iterations = 0;
  int max_depth = 0;
  double wall_seconds = 0;
};

struct SolveResult {
  bool optimal = false;
  bool timed_out = false;
  bool hard_unsat = false;
  double best_satisfied = 0;              // satisfied weight, input-instance level
  double best_unsatisfied = 0;            // matching falsified weight
  double upper_bound = 0;                 // floored anytime bound on best_satisfied
  double upper_bound_real = 0;
  std::vector<std::int8_t> assignment;    // over original variable ids
  SolveStats stats;
};

/// Exact MAX-SAT search: depth-first stack, PRSM bounds with warm starts,
/// eigenvector rounding for incumbents, multi-probe pruning along the
/// branching order.
SolveResult solve_maxsat(const Proposition& prop, const SolverConfig& cfg);

/// Probe count for a node: min(max(3, floor(6 GAP + 1/2)), 6) with
/// GAP = m' - p_empty' + <I, M~> - LB - 1.
int compute_bmax(double m_prime, double p_empty_prime, double trace_mtilde, double lb);
int compute_bmax_from_gap(double gap);

struct BranchOrder {
  std::vector<int> sigma;  // signed literals, ascending child-bound order
  std::vector<double> u;   // matching bound values (node-local)
};

/// Child bounds u_b for every candidate literal, computed without performing
/// the unit resolutions; candidates restricted by the rounding consensus
/// when one is available.
BranchOrder branch_order(const Eigen::MatrixXd& m_tilde, const MonomialBasis& basis,
                         const Proposition& prop, const PolyCoeffs& f,
                         const std::vector<double>* consensus);

/// Maps rows of a parent-basis iterate onto a child basis by monomial
/// identity; monomials new to the child start at zero. `to_parent` maps
/// child var ids to parent var ids (index 0 unused).
PrsmState warm_start_restrict(const PrsmState& state, const MonomialBasis& parent_basis,
                              const MonomialBasis& child_basis,
                              std::span<const int> to_parent);

/// Fills a full original-id assignment from a node-level one plus the pins
/// accumulated in the node's log.
std::vector<std::int8_t> lift_assignment(const Proposition& node,
                                         std::span<const std::int8_t> x_node);

}  // namespace sosmax

#endif  // SOSMAX_BNB_HPP
