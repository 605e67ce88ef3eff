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

#ifndef SOSMAX_WPMS_HPP
#define SOSMAX_WPMS_HPP

#include "sosmax/bnb.hpp"

namespace sosmax {

/// Hard-clause incidence over the matching groups: group gamma couples to
/// every hard clause whose variable set contains gamma, signed by the parity
/// of gamma's intersection with the clause's unnegated variables.
struct HardStructure {
  int num_hard = 0;
  std::vector<std::int32_t> coupled;      // group indices with incidences
  std::vector<std::int32_t> inc_offset;   // per coupled group, into the arrays below
  std::vector<std::int32_t> inc_clause;
  std::vector<std::int8_t> inc_sign;
  std::vector<char> group_coupled;        // flag per group

  bool empty() const { return num_hard == 0; }
};

HardStructure build_hard_structure(const Proposition& prop, const MatchGroups& groups);

/// The (M, c) subproblem: free groups project as usual; coupled groups carry
/// one shared residual each and solve jointly with c through the KKT system
/// (reduced to its hard-clause Schur complement, LU with partial pivoting,
/// least-squares fallback when ill-conditioned).
/// `x` holds Z - (S+I)/beta on entry and the minimizer M on exit.
void subproblem_mc(Eigen::MatrixXd& x, Eigen::VectorXd& c, const MatchGroups& groups,
                   const HardStructure& hard, double beta);

/// PRSM with the M-update replaced by subproblem_mc; the objective and the
/// certified bound gain the multiplier sum 1^T c.
PrsmState prsm_solve_wpms(const MatchGroups& groups, const HardStructure& hard,
                          const PolyCoeffs& f_soft, const PrsmOptions& opt,
                          const PrsmState* warm = nullptr);

/// Adds all SAT-resolution implied hard clauses of length <= max_len and
/// unit-resolves implied hard units. hard_unsat reports an empty resolvent.
struct StrengthenResult {
  Proposition prop;
  std::vector<int> old_to_new;
  bool hard_unsat = false;
  int added = 0;
};
StrengthenResult strengthen_resolution(const Proposition& prop, int max_len);

/// Extends hard clauses supported inside the top-Q variable set by each
/// unnegated top-Q variable; creates no monomials outside SOS_p^Q.
Proposition strengthen_top_q(const Proposition& prop, int q);

struct WpmsConfig {
  double theta_start = 0.0;    // phase-I basis fraction
  double gap_switch = 10.0;    // escalate to theta=1 at or above this gap
  int b_max_w = 15;            // phase-II bad-node eliminations per node
  int n_min = 70;              // stop eliminating below this many variables
  int s_max = 1750;            // bound only when |SOS_s^1| fits
  int resolution_max_len = 2;  // preprocessing closure length
  PrsmParams prsm;
  RoundingConfig rounding;
  double ls_budget = 5.0;
  double time_limit = 0.0;
  std::uint64_t seed = 1;
  int node_iters = 200;
  std::ostream* progress = nullptr;  // search-tree export, line-delimited JSON
};

/// Two-phase exact weighted partial MAX-SAT search. Reports hard_unsat when
/// the hard clauses admit no assignment.
SolveResult solve_wpms(const Proposition& prop, const WpmsConfig& cfg);

}  // namespace sosmax

#endif  // SOSMAX_WPMS_HPP
