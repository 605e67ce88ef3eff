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

#include "sosmax/rounding.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

namespace sosmax {

RoundingResult round_assignments(
    const Eigen::MatrixXd& m_tilde, const MonomialBasis& basis, const Proposition& prop,
    const RoundingConfig& cfg,
    const std::function<double(std::span<const std::int8_t>)>& evaluator) {
  if (cfg.q_min < 1 || cfg.num_rounds < 1)
    throw std::invalid_argument("round_assignments: bad config");
  const int s = basis.size();
  const int n = basis.n;
  if (m_tilde.rows() != s) throw std::invalid_argument("round_assignments: size mismatch");
  for (int i = 1; i <= n; ++i)
    if (!(basis.monomials[i] == BasisMono{0, i}))
      throw std::invalid_argument("round_assignments: basis lacks singleton rows");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_tilde);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("round_assignments: eigendecomposition failed");
  const Eigen::VectorXd& vals = es.eigenvalues();  // ascending
  const double thr = cfg.zero_tol * std::max(1.0, vals[s - 1]);
  int zero_mult = 0;
  while (zero_mult < s && std::abs(vals[zero_mult]) <= thr) ++zero_mult;
  const int q = std::min(s, std::max(zero_mult, cfg.q_min));
  Eigen::MatrixXd v = es.eigenvectors().leftCols(q);

  // Rows of the degree >= 2 monomials drive the mixing rotation.
  const int p = s - n - 1;
  Eigen::MatrixXd u;
  if (p > 0) {
    Eigen::MatrixXd b = v.bottomRows(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esb(b.transpose() * b);
    u = esb.eigenvectors();
  } else {
    u = Eigen::MatrixXd::Identity(q, q);
  }

  Eigen::VectorXd xi = Eigen::VectorXd::Ones(q);
  for (int i = 0; i < std::min<int>(q, static_cast<int>(cfg.xi.size())); ++i) xi[i] = cfg.xi[i];

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  RoundingResult out;
  std::vector<std::int8_t> x(n);
  std::vector<std::vector<std::int8_t>> best_set;
  const double value_eps = prop.integral_weights ? 0.0 : 1e-9;

  for (int round = 0; round < cfg.num_rounds; ++round) {
    Eigen::VectorXd lambda(q);
    double norm = 0;
    do {
      for (int i = 0; i < q; ++i) lambda[i] = gauss(rng);
      norm = lambda.norm();
    } while (norm == 0);
    lambda /= norm;
    Eigen::VectorXd proj = v * (u * xi.cwiseProduct(lambda).eval());
    const double s0 = proj[0] >= 0 ? 1.0 : -1.0;
    for (int i = 1; i <= n; ++i) x[i - 1] = static_cast<std::int8_t>(s0 * proj[i] >= 0 ? 1 : -1);
    const double value = evaluator ? evaluator(x) : count_unsat(prop, x);
    if (value < out.best_value - value_eps) {
      out.best_value = value;
      out.best_x = x;
      best_set.clear();
      best_set.push_back(x);
    } else if (value <= out.best_value + value_eps) {
      best_set.push_back(x);
    }
  }

  if (!best_set.empty()) {
    out.has_consensus = true;
    out.consensus.assign(n, 0.0);
    for (const auto& bx : best_set)
      for (int i = 0; i < n; ++i) out.consensus[i] += bx[i];
    for (int i = 0; i < n; ++i) out.consensus[i] /= static_cast<double>(best_set.size());
  }
  return out;
}

namespace {

struct ClauseView {
  const Clause* c;
  double weight;  // effective weight; hard clauses dominate
  int sat_count;
};

}  // namespace

LocalSearchResult local_search_lb(const Proposition& prop, double seconds, std::uint64_t seed) {
  LocalSearchResult res;
  const int n = prop.n;
  res.x.assign(n, 1);
  if (n == 0 || prop.clauses.empty()) {
    res.soft_falsified = prop.clauses.empty() ? 0.0 : count_unsat_soft(prop, res.x);
    res.hard_feasible = prop.clauses.empty() ? true : hard_satisfied(prop, res.x);
    return res;
  }

  const double hard_weight = prop.soft_weight_total() + 1.0;
  const std::size_t m = prop.clauses.size();
  std::vector<ClauseView> cls(m);
  std::vector<std::vector<int>> occ(n + 1);  // clauses touching each var
  for (std::size_t j = 0; j < m; ++j) {
    cls[j] = {&prop.clauses[j], prop.clauses[j].hard ? hard_weight : prop.clauses[j].weight, 0};
    for (int v : prop.clauses[j].vars) occ[v].push_back(static_cast<int>(j));
  }
  std::vector<std::vector<int>> neighbors(n + 1);
  {
    std::vector<char> mark(n + 1, 0);
    for (int v = 1; v <= n; ++v) {
      for (int j : occ[v])
        for (int w : prop.clauses[j].vars)
          if (w != v && !mark[w]) {
            mark[w] = 1;
            neighbors[v].push_back(w);
          }
      for (int w : neighbors[v]) mark[w] = 0;
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<std::int8_t> x(n);
  std::vector<double> gain(n + 1, 0.0);  // effective weight gained by flipping v
  std::vector<char> cc(n + 1, 1);        // configuration-changed flags
  std::vector<int> unsat;                // indices of unsatisfied clauses
  std::vector<int> unsat_pos(m);
  double soft_unsat_w = 0;
  int hard_unsat_ct = 0;

  auto rebuild = [&]() {
    unsat.clear();
    soft_unsat_w = 0;
    hard_unsat_ct = 0;
    std::fill(gain.begin(), gain.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const Clause& c = *cls[j].c;
      int k = 0;
      for (int t = 0; t < c.len(); ++t) k += x[c.vars[t] - 1] == c.signs[t];
      cls[j].sat_count = k;
      if (k == 0) {
        unsat_pos[j] = static_cast<int>(unsat.size());
        unsat.push_back(static_cast<int>(j));
        if (c.hard)
          ++hard_unsat_ct;
        else
          soft_unsat_w += c.weight;
        for (int v : c.vars) gain[v] += cls[j].weight;
      } else if (k == 1) {
        for (int t = 0; t < c.len(); ++t)
          if (x[c.vars[t] - 1] == c.signs[t]) gain[c.vars[t]] -= cls[j].weight;
      }
    }
  };

  auto flip = [&](int v) {
    x[v - 1] = static_cast<std::int8_t>(-x[v - 1]);
    for (int j : occ[v]) {
      const Clause& c = *cls[j].c;
      const double w = cls[j].weight;
      const int old_sat = cls[j].sat_count;
      bool v_now_sat = false;
      for (int t = 0; t < c.len(); ++t)
        if (c.vars[t] == v) v_now_sat = x[v - 1] == c.signs[t];
      const int new_sat = old_sat + (v_now_sat ? 1 : -1);
      cls[j].sat_count = new_sat;
      if (old_sat == 0) {
        // v became the lone satisfier
        int pos = unsat_pos[j];
        unsat_pos[unsat.back()] = pos;
        std::swap(unsat[pos], unsat.back());
        unsat.pop_back();
        if (c.hard)
          --hard_unsat_ct;
        else
          soft_unsat_w -= c.weight;
        for (int w2 : c.vars) gain[w2] -= w;
        gain[v] -= w;  // flipping v back would unsatisfy the clause
      } else if (new_sat == 0) {
        unsat_pos[j] = static_cast<int>(unsat.size());
        unsat.push_back(j);
        if (c.hard)
          ++hard_unsat_ct;
        else
          soft_unsat_w += c.weight;
        for (int w2 : c.vars) gain[w2] += w;
        gain[v] += w;  // v no longer carries the lone-satisfier penalty
      } else if (old_sat == 1 && new_sat == 2) {
        // the previous lone satisfier is no longer critical
        for (int t = 0; t < c.len(); ++t) {
          int w2 = c.vars[t];
          if (w2 != v && x[w2 - 1] == c.signs[t]) gain[w2] += w;
        }
      } else if (old_sat == 2 && new_sat == 1) {
        for (int t = 0; t < c.len(); ++t) {
          int w2 = c.vars[t];
          if (w2 != v && x[w2 - 1] == c.signs[t]) gain[w2] -= w;
        }
      }
    }
    cc[v] = 0;
    for (int w2 : neighbors[v]) cc[w2] = 1;
  };

  // Seconds convert to a deterministic flip budget.
  const long long max_flips =
      std::max<long long>(50'000, static_cast<long long>(seconds * 500'000));
  const long long restart_after = std::max<long long>(20'000, 200LL * n);

  std::uniform_int_distribution<int> coin(0, 1);
  long long since_improvement = 0;
  double best_cost = std::numeric_limits<double>::infinity();

  auto randomize = [&]() {
    for (int i = 0; i < n; ++i) x[i] = coin(rng) ? 1 : -1;
    std::fill(cc.begin(), cc.end(), 1);
    rebuild();
  };
  randomize();

  for (long long step = 0; step < max_flips; ++step) {
    const double cost = soft_unsat_w + hard_unsat_ct * hard_weight;
    if (hard_unsat_ct == 0 && (!res.hard_feasible || soft_unsat_w < res.soft_falsified)) {
      res.soft_falsified = soft_unsat_w;
      res.hard_feasible = true;
      res.x = x;
    }
    if (cost < best_cost - 1e-12) {
      best_cost = cost;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (unsat.empty()) break;  // every clause satisfied

    // Greedy flip among configuration-changed vars with positive gain.
    int best_v = 0;
    double best_gain = 1e-12;
    for (int v = 1; v <= n; ++v)
      if (cc[v] && gain[v] > best_gain) {
        best_gain = gain[v];
        best_v = v;
      }
    if (best_v != 0) {
      flip(best_v);
    } else {
      // Focused random walk on an unsatisfied clause.
      const Clause& c = *cls[unsat[rng() % unsat.size()]].c;
      flip(c.vars[rng() % c.vars.size()]);
    }
    if (since_improvement > restart_after) {
      randomize();
      since_improvement = 0;
      best_cost = std::numeric_limits<double>::infinity();
    }
  }

  if (!res.hard_feasible) {
    // Keep something total even when no feasible point was seen.
    res.x = x;
    res.soft_falsified = soft_unsat_w;
    res.hard_feasible = hard_unsat_ct == 0;
  }
  return res;
}

}  // namespace sosmax
