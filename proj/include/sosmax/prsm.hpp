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

#ifndef SOSMAX_PRSM_HPP
#define SOSMAX_PRSM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sosmax/basis.hpp"

namespace sosmax {

/// Step factors must lie in the convergence region
///   gamma1 + gamma2 > 0, |gamma1| < 1,
///   0 < gamma2 < (1+sqrt 5)/2, |gamma1| < 1 + gamma2 - gamma2^2.
bool in_convergence_region(double gamma1, double gamma2);

struct PrsmParams {
  double gamma1 = 0.5;
  double gamma2 = 0.9 * (1.0 + std::sqrt(5.0)) / 2.0;
  double beta = 0.0;  // 0: use the default 2s/5 for matrix order s
  int max_iter = 2000;
  int check_every = 10;
  int certify_every = 100;  // full-precision eigensolve cadence
  double tol_residual = 1e-6;
  bool single_precision_eig = false;
  double time_limit = 0.0;  // seconds; 0 = none

  void validate() const;
  double effective_beta(int order) const { return beta > 0 ? beta : 0.4 * order; }
};

struct BoundRecord {
  int iter = 0;
  double ub_real = 0;
  double ub_floor = 0;
  bool certified = false;
  double lambda_min = 0;
};

struct PrsmState {
  Eigen::MatrixXd M, Z, Q;  // Q maintains S/beta
  Eigen::VectorXd c;        // hard-clause multipliers; empty outside wpms
  int iter = 0;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<BoundRecord> ub_trace;
  bool early_stopped = false;

  int order() const { return static_cast<int>(M.rows()); }
  double objective() const { return M.trace() + (c.size() ? c.sum() : 0.0); }
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Projection onto the PSD cone via a full symmetric eigendecomposition,
/// reconstructing from whichever side of the spectrum has fewer eigenpairs.
/// Returns the projected matrix and the smallest eigenvalue of the input.
std::pair<Eigen::MatrixXd, double> project_psd(const Eigen::MatrixXd& x,
                                               bool single_precision = false);

double smallest_eigenvalue(const Eigen::MatrixXd& m);

/// A few inverse-free Lanczos steps on sigma*I - M; cheap, not certified.
double estimate_lambda_min(const Eigen::MatrixXd& m, int steps = 24);

/// Projection onto the coefficient-matching affine set. The diagonal is
/// untouched; unit groups pin their two entries, every other group shifts
/// its members by the shared constraint residual over the ordered count.
void project_affine_inplace(Eigen::MatrixXd& m, const MatchGroups& groups);
Eigen::MatrixXd project_affine(Eigen::MatrixXd m, const MatchGroups& groups);

/// Data needed to turn a Gram-matrix iterate into an objective bound:
/// bound = total_weight - p_empty + <I, M - lambda_min I> (+ 1^T c).
struct BoundContext {
  double total_weight = 0;
  double p_empty = 0;
  bool integral = true;
};

struct UpperBound {
  double real = std::numeric_limits<double>::infinity();
  double floored = std::numeric_limits<double>::infinity();
  bool certified = false;
};

UpperBound valid_upper_bound(const Eigen::MatrixXd& m, double lambda_min, bool certified,
                             const BoundContext& ctx, double linear_term = 0.0);

/// Custom M-update hook for the splitting loop: consumes Z - I/beta - Q and
/// must leave the next M (feasible for its affine set) in place, returning
/// the extra linear objective term (hard-clause multipliers' sum).
using MUpdate = std::function<double(Eigen::MatrixXd&, Eigen::VectorXd&)>;

struct PrsmOptions {
  PrsmParams params;
  BoundContext bound;
  std::optional<double> lb_for_early_stop;  // floored-UB prune threshold
};

/// Compact splitting scheme (the loop invariant Q = S/beta):
///   Z <- P_psd(M + Q); Q += g1 (M - Z);
///   M <- P_affine(Z - I/beta - Q); Q += g2 (M - Z).
/// Cold start: M = P_affine(0), Z = Q = 0. Resumable via `warm`.
PrsmState prsm_solve(const MatchGroups& groups, const PolyCoeffs& f, const PrsmOptions& opt,
                     const PrsmState* warm = nullptr);

/// Same loop with a caller-supplied M-update (the WPMS (M,c) subproblem).
PrsmState prsm_solve_custom(const MatchGroups& groups, const MUpdate& m_update,
                            const PrsmOptions& opt, const PrsmState* warm = nullptr);

/// Last certified bound of a finished solve, recomputing one if the final
/// iterate was never certified.
UpperBound certified_bound(PrsmState& state, const BoundContext& ctx);

}  // namespace sosmax

#endif  // SOSMAX_PRSM_HPP
