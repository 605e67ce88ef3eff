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

#include "sosmax/prsm.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>

namespace sosmax {

namespace {
// Guards the floor of a certified bound against the last float of rounding;
// optima sit at least 1 below the next integer so the slack is harmless.
constexpr double kFloorSlack = 1e-6;
constexpr double kDivergenceNorm = 1e12;
}  // namespace

bool in_convergence_region(double g1, double g2) {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  return g1 + g2 > 0 && std::abs(g1) < 1 && g2 > 0 && g2 < golden &&
         std::abs(g1) < 1 + g2 - g2 * g2;
}

void PrsmParams::validate() const {
  if (!in_convergence_region(gamma1, gamma2))
    throw std::invalid_argument("prsm: (gamma1, gamma2) outside the convergence region");
  if (beta < 0) throw std::invalid_argument("prsm: beta must be positive");
  if (max_iter < 1 || check_every < 1) throw std::invalid_argument("prsm: bad iteration counts");
  if (tol_residual < 0) throw std::invalid_argument("prsm: negative tolerance");
}

template <typename Scalar>
static std::pair<Eigen::MatrixXd, double> project_psd_impl(const Eigen::MatrixXd& x) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat sym = ((x + x.transpose()) * 0.5).cast<Scalar>();
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("project_psd: eigendecomposition failed");
  const auto& vals = es.eigenvalues();
  const int n = static_cast<int>(vals.size());
  int num_neg = 0;
  while (num_neg < n && vals[num_neg] < 0) ++num_neg;
  const int num_pos = n - num_neg;
  Eigen::MatrixXd out;
  if (num_pos <= num_neg) {
    Mat vp = es.eigenvectors().rightCols(num_pos);
    out = (vp * vals.tail(num_pos).asDiagonal() * vp.transpose()).template cast<double>();
  } else {
    Mat vn = es.eigenvectors().leftCols(num_neg);
    Mat corr = vn * vals.head(num_neg).asDiagonal() * vn.transpose();
    out = (sym - corr).template cast<double>();
  }
  out = (out + out.transpose()) * 0.5;  // re-symmetrize in double
  double lmin = n > 0 ? static_cast<double>(vals[0]) : 0.0;
  if (!std::isfinite(lmin)) throw std::runtime_error("project_psd: non-finite spectrum");
  return {std::move(out), lmin};
}

std::pair<Eigen::MatrixXd, double> project_psd(const Eigen::MatrixXd& x, bool single_precision) {
  return single_precision ? project_psd_impl<float>(x) : project_psd_impl<double>(x);
}

double smallest_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("smallest_eigenvalue: eigendecomposition failed");
  return es.eigenvalues()[0];
}

double estimate_lambda_min(const Eigen::MatrixXd& m, int steps) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) return 0.0;
  if (n <= 8 || steps >= n) return smallest_eigenvalue(m);
  // Gershgorin upper bound keeps sigma*I - M positive definite.
  double sigma = (m.cwiseAbs().rowwise().sum()).maxCoeff();
  steps = std::min(steps, n - 1);

  Eigen::MatrixXd v(n, steps + 1);
  Eigen::VectorXd alpha(steps), beta(steps);
  // Deterministic start vector; no per-call randomness needed.
  for (int i = 0; i < n; ++i) v(i, 0) = 1.0 + 0.37 * ((i * 2654435761u) % 97) / 97.0;
  v.col(0).normalize();
  int k = 0;
  for (; k < steps; ++k) {
    Eigen::VectorXd w = sigma * v.col(k) - m * v.col(k);
    alpha[k] = v.col(k).dot(w);
    w -= alpha[k] * v.col(k);
    if (k > 0) w -= beta[k - 1] * v.col(k - 1);
    w -= v.leftCols(k + 1) * (v.leftCols(k + 1).transpose() * w);  // full reorth
    beta[k] = w.norm();
    if (beta[k] < 1e-12) {
      ++k;
      break;
    }
    v.col(k + 1) = w / beta[k];
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  return sigma - es.eigenvalues()[k - 1];
}

void project_affine_inplace(Eigen::MatrixXd& m, const MatchGroups& g) {
  const std::int64_t ng = g.groups();
  for (std::int64_t k = 0; k < g.unit_count; ++k) {
    const std::int64_t t = g.offset[k];
    m(g.rows[t], g.cols[t]) = m(g.cols[t], g.rows[t]) = g.coeff[k];
  }
  for (std::int64_t k = g.unit_count; k < ng; ++k) {
    double sum = 0;
    for (std::int64_t t = g.offset[k]; t < g.offset[k + 1]; ++t) sum += m(g.rows[t], g.cols[t]);
    const double corr = (2.0 * sum - g.coeff[k]) / static_cast<double>(g.ordered_count(k));
    for (std::int64_t t = g.offset[k]; t < g.offset[k + 1]; ++t) {
      m(g.rows[t], g.cols[t]) -= corr;
      m(g.cols[t], g.rows[t]) = m(g.rows[t], g.cols[t]);
    }
  }
}

Eigen::MatrixXd project_affine(Eigen::MatrixXd m, const MatchGroups& g) {
  project_affine_inplace(m, g);
  return m;
}

UpperBound valid_upper_bound(const Eigen::MatrixXd& m, double lambda_min, bool certified,
                             const BoundContext& ctx, double linear_term) {
  UpperBound ub;
  const double shifted_trace = m.trace() - lambda_min * static_cast<double>(m.rows());
  ub.real = ctx.total_weight - ctx.p_empty + shifted_trace + linear_term;
  ub.floored = ctx.integral ? std::floor(ub.real + kFloorSlack) : ub.real;
  ub.certified = certified;
  return ub;
}

namespace {

struct LoopControl {
  const PrsmOptions& opt;
  PrsmState& st;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  bool out_of_time() const {
    if (opt.params.time_limit <= 0) return false;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
           opt.params.time_limit;
  }
};

}  // namespace

PrsmState prsm_solve_custom(const MatchGroups& groups, const MUpdate& m_update,
                            const PrsmOptions& opt, const PrsmState* warm) {
  opt.params.validate();
  const int s = groups.basis_size;
  const double beta = opt.params.effective_beta(s);
  const double inv_beta = 1.0 / beta;

  PrsmState st;
  if (warm && warm->order() == s) {
    st = *warm;
    st.early_stopped = false;
  } else {
    if (warm) throw std::invalid_argument("prsm: warm state has wrong order");
    st.M = Eigen::MatrixXd::Zero(s, s);
    Eigen::VectorXd c0;
    m_update(st.M, c0);  // projection of the zero matrix
    st.c = std::move(c0);
    st.Z = Eigen::MatrixXd::Zero(s, s);
    st.Q = Eigen::MatrixXd::Zero(s, s);
  }

  LoopControl ctl{opt, st};
  const int last_iter = st.iter + opt.params.max_iter;
  double linear_term = st.c.size() ? st.c.sum() : 0.0;

  while (st.iter < last_iter) {
    ++st.iter;
    auto [z, zmin] = project_psd(st.M + st.Q, opt.params.single_precision_eig);
    st.Z = std::move(z);
    (void)zmin;
    st.Q += opt.params.gamma1 * (st.M - st.Z);
    st.M = st.Z - st.Q;
    st.M.diagonal().array() -= inv_beta;
    Eigen::VectorXd c;
    linear_term = m_update(st.M, c);
    st.c = std::move(c);
    st.Q += opt.params.gamma2 * (st.M - st.Z);

    const double mnorm = st.M.norm();
    if (!std::isfinite(mnorm) || mnorm > kDivergenceNorm)
      throw DivergenceError("prsm: iterates diverged (check step parameters)");

    const bool checkpoint = st.iter % opt.params.check_every == 0 || st.iter == last_iter;
    if (!checkpoint) continue;

    st.residual = (st.M - st.Z).norm() / (1.0 + mnorm);

    double est = estimate_lambda_min(st.M);
    UpperBound cand = valid_upper_bound(st.M, est, false, opt.bound, linear_term);
    bool want_certify = st.iter == last_iter ||
                        st.iter % opt.params.certify_every == 0 ||
                        st.residual < opt.params.tol_residual ||
                        (opt.lb_for_early_stop && cand.floored <= *opt.lb_for_early_stop);
    if (want_certify) {
      const double lmin = smallest_eigenvalue(st.M);
      UpperBound ub = valid_upper_bound(st.M, lmin, true, opt.bound, linear_term);
      st.ub_trace.push_back({st.iter, ub.real, ub.floored, true, lmin});
      if (opt.lb_for_early_stop && ub.floored <= *opt.lb_for_early_stop) {
        st.early_stopped = true;
        return st;
      }
    } else {
      st.ub_trace.push_back({st.iter, cand.real, cand.floored, false, est});
    }

    if (st.residual < opt.params.tol_residual) return st;
    if (ctl.out_of_time()) return st;
  }
  return st;
}

PrsmState prsm_solve(const MatchGroups& groups, const PolyCoeffs& f, const PrsmOptions& opt,
                     const PrsmState* warm) {
  (void)f;  // targets already attached to the groups
  MUpdate update = [&groups](Eigen::MatrixXd& m, Eigen::VectorXd&) {
    project_affine_inplace(m, groups);
    return 0.0;
  };
  return prsm_solve_custom(groups, update, opt, warm);
}

UpperBound certified_bound(PrsmState& state, const BoundContext& ctx) {
  for (auto it = state.ub_trace.rbegin(); it != state.ub_trace.rend(); ++it)
    if (it->certified && it->iter == state.iter)
      return {it->ub_real, it->ub_floor, true};
  const double lmin = smallest_eigenvalue(state.M);
  const double linear = state.c.size() ? state.c.sum() : 0.0;
  UpperBound ub = valid_upper_bound(state.M, lmin, true, ctx, linear);
  state.ub_trace.push_back({state.iter, ub.real, ub.floored, true, lmin});
  return ub;
}

}  // namespace sosmax
