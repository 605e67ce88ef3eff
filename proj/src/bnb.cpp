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

#include "sosmax/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

namespace sosmax {

int compute_bmax_from_gap(double gap) {
  int probes = static_cast<int>(std::floor(6.0 * gap + 0.5));
  return std::min(std::max(3, probes), 6);
}

int compute_bmax(double m_prime, double p_empty_prime, double trace_mtilde, double lb) {
  return compute_bmax_from_gap(m_prime - p_empty_prime + trace_mtilde - lb - 1.0);
}

BranchOrder branch_order(const Eigen::MatrixXd& m_tilde, const MonomialBasis& basis,
                         const Proposition& prop, const PolyCoeffs& f,
                         const std::vector<double>* consensus) {
  const int n = prop.n;
  // Trace decrement per variable: rows of monomials containing it.
  std::vector<double> diag_sum(n + 1, 0.0);
  for (int i = 0; i < basis.size(); ++i) {
    BasisMono m = basis.monomials[i];
    if (m.lo != 0) diag_sum[m.lo] += m_tilde(i, i);
    if (m.hi != 0) diag_sum[m.hi] += m_tilde(i, i);
  }
  // Constant-part shift of the child bound per signed literal: satisfied
  // clauses lose their slack, shrunk and falsified clauses add theirs.
  std::vector<double> penalty_pos(n + 1, 0.0), penalty_neg(n + 1, 0.0);
  for (const auto& c : prop.clauses) {
    const double slack = std::ldexp(c.weight, -c.len());
    for (int k = 0; k < c.len(); ++k) {
      if (c.signs[k] > 0) {
        penalty_pos[c.vars[k]] -= slack;
        penalty_neg[c.vars[k]] += slack;
      } else {
        penalty_pos[c.vars[k]] += slack;
        penalty_neg[c.vars[k]] -= slack;
      }
    }
  }

  const double base = f.total_weight - f.constant + m_tilde.trace();
  auto u_of = [&](int b) {
    const int v = std::abs(b);
    return base - diag_sum[v] - (b > 0 ? penalty_pos[v] : penalty_neg[v]);
  };

  std::vector<int> candidates;
  if (consensus) {
    for (int v = 1; v <= n; ++v) {
      // Unanimous roundings exclude the agreeing branch direction.
      if ((*consensus)[v - 1] == 1.0) candidates.push_back(-v);
      if ((*consensus)[v - 1] == -1.0) candidates.push_back(v);
    }
  }
  if (candidates.empty()) {
    for (int v = 1; v <= n; ++v) {
      candidates.push_back(v);
      candidates.push_back(-v);
    }
  }

  BranchOrder out;
  out.sigma = std::move(candidates);
  std::stable_sort(out.sigma.begin(), out.sigma.end(), [&](int a, int b) {
    const double ua = u_of(a), ub = u_of(b);
    if (ua != ub) return ua < ub;
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a > b;  // positive sign first
  });
  out.u.reserve(out.sigma.size());
  for (int b : out.sigma) out.u.push_back(u_of(b));
  return out;
}

PrsmState warm_start_restrict(const PrsmState& state, const MonomialBasis& parent_basis,
                              const MonomialBasis& child_basis,
                              std::span<const int> to_parent) {
  const int s_new = child_basis.size();
  std::vector<int> src(s_new, -1);
  for (int i = 0; i < s_new; ++i) {
    BasisMono m = child_basis.monomials[i];
    BasisMono pm{m.lo == 0 ? 0 : to_parent[m.lo], m.hi == 0 ? 0 : to_parent[m.hi]};
    if (pm.lo > pm.hi) std::swap(pm.lo, pm.hi);
    src[i] = parent_basis.index_of(pm);
  }
  PrsmState out;
  out.M = Eigen::MatrixXd::Zero(s_new, s_new);
  out.Z = Eigen::MatrixXd::Zero(s_new, s_new);
  out.Q = Eigen::MatrixXd::Zero(s_new, s_new);
  for (int i = 0; i < s_new; ++i) {
    if (src[i] < 0) continue;
    for (int j = 0; j < s_new; ++j) {
      if (src[j] < 0) continue;
      out.M(i, j) = state.M(src[i], src[j]);
      out.Z(i, j) = state.Z(src[i], src[j]);
      out.Q(i, j) = state.Q(src[i], src[j]);
    }
  }
  return out;
}

std::vector<std::int8_t> lift_assignment(const Proposition& node,
                                         std::span<const std::int8_t> x_node) {
  std::vector<std::int8_t> full(std::max(node.orig_n, 1), 1);
  for (const auto& [v, s] : node.assignment_log) full[v - 1] = s;
  for (int i = 0; i < node.n; ++i) full[node.orig_var[i] - 1] = x_node[i];
  return full;
}

namespace {

struct Node {
  Proposition prop;
  std::shared_ptr<const PrsmState> parent_state;
  std::shared_ptr<const MonomialBasis> parent_basis;
  std::vector<int> to_parent;  // node var -> var space of parent_basis
  double inherited_ub = std::numeric_limits<double>::infinity();
  int depth = 0;
};

std::vector<int> invert_map(std::span<const int> old_to_new, int n_new) {
  std::vector<int> inv(n_new + 1, 0);
  for (int v = 1; v < static_cast<int>(old_to_new.size()); ++v)
    if (old_to_new[v] != 0) inv[old_to_new[v]] = v;
  return inv;
}

std::vector<int> compose_to_parent(std::span<const int> first_old_to_new,
                                   std::span<const int> second_old_to_new, int n_final) {
  std::vector<int> inv2 = invert_map(second_old_to_new, n_final);
  std::vector<int> inv1 = invert_map(first_old_to_new,
                                     static_cast<int>(first_old_to_new.size()));
  std::vector<int> out(n_final + 1, 0);
  for (int v = 1; v <= n_final; ++v) out[v] = inv1[inv2[v]];
  return out;
}

struct Searcher {
  const SolverConfig& cfg;
  SolveResult result;
  SolveStats& stats;
  double lb_sat = -std::numeric_limits<double>::infinity();
  std::vector<std::int8_t> best_assignment;
  std::vector<Node> stack;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  long long node_counter = 0;

  explicit Searcher(const SolverConfig& c) : cfg(c), stats(result.stats) {}

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  bool out_of_time() const { return cfg.time_limit > 0 && elapsed() > cfg.time_limit; }

  void offer_incumbent(const Proposition& node, std::span<const std::int8_t> x_node) {
    const double sat = node.satisfied_weight +
                       (node.soft_weight_total() - count_unsat(node, x_node));
    if (sat > lb_sat) {
      lb_sat = sat;
      best_assignment = lift_assignment(node, x_node);
    }
  }

  void log_node(const Node& node, double ub, double lb) {
    if (!cfg.progress) return;
    nlohmann::json j;
    j["node"] = node_counter;
    j["depth"] = node.depth;
    j["vars"] = node.prop.n;
    j["clauses"] = node.prop.clause_count();
    j["lb"] = lb;
    j["ub"] = ub;
    j["open"] = stack.size();
    j["time"] = elapsed();
    (*cfg.progress) << j.dump() << '\n';
  }
};

struct ChildPieces {
  Node node;
  std::shared_ptr<MonomialBasis> basis;
  PolyCoeffs poly;
  MatchGroups groups;
  std::shared_ptr<PrsmState> state;
  UpperBound ub;  // node-local satisfied bound
};

}  // namespace

SolveResult solve_maxsat(const Proposition& prop0, const SolverConfig& cfg) {
  if (prop0.has_hard)
    throw std::invalid_argument("solve_maxsat: hard clauses present; use the wpms solver");
  cfg.prsm.validate();

  Searcher sr(cfg);
  Proposition root = prop0;
  finalize_var_map(root);

  // Initial incumbent from local search.
  {
    LocalSearchResult ls = local_search_lb(root, cfg.ls_budget, cfg.seed);
    if (!ls.x.empty() && root.n > 0)
      sr.offer_incumbent(root, ls.x);
    else
      sr.offer_incumbent(root, std::vector<std::int8_t>(root.n, 1));
  }

  const double root_total = root.satisfied_weight + root.soft_weight_total();
  sr.stack.push_back({root, nullptr, nullptr, {}, root_total, 0});

  auto solve_node_prsm = [&](const Node& node, const MonomialBasis& basis,
                             const PolyCoeffs& f, const MatchGroups& groups, int iters,
                             bool allow_extend) -> std::pair<PrsmState, UpperBound> {
    PrsmOptions opt;
    opt.params = cfg.prsm;
    opt.params.max_iter = iters;
    opt.bound = {f.total_weight, f.constant, node.prop.integral_weights};
    opt.lb_for_early_stop = sr.lb_sat - node.prop.satisfied_weight;
    if (cfg.time_limit > 0)
      opt.params.time_limit = std::max(0.1, cfg.time_limit - sr.elapsed());

    PrsmState warm_storage;
    const PrsmState* warm = nullptr;
    if (node.parent_state && node.parent_basis) {
      warm_storage =
          warm_start_restrict(*node.parent_state, *node.parent_basis, basis, node.to_parent);
      warm = &warm_storage;
    }
    PrsmState st = prsm_solve(groups, f, opt, warm);
    sr.stats.prsm_iterations += st.iter - (warm ? warm_storage.iter : 0);
    UpperBound ub = certified_bound(st, opt.bound);
    if (allow_extend && !st.early_stopped && ub.floored > *opt.lb_for_early_stop &&
        ub.real <= *opt.lb_for_early_stop + cfg.extend_margin && cfg.extend_iters > 0) {
      const int before = st.iter;
      opt.params.max_iter = cfg.extend_iters;
      st = prsm_solve(groups, f, opt, &st);
      sr.stats.prsm_iterations += st.iter - before;
      ub = certified_bound(st, opt.bound);
    }
    return {std::move(st), ub};
  };

  while (!sr.stack.empty()) {
    if (sr.out_of_time()) {
      sr.result.timed_out = true;
      break;
    }
    Node node = std::move(sr.stack.back());
    sr.stack.pop_back();
    ++sr.node_counter;
    ++sr.stats.nodes;
    sr.stats.max_depth = std::max(sr.stats.max_depth, node.depth);

    if (node.inherited_ub <= sr.lb_sat) continue;

    if (node.prop.clauses.empty()) {
      sr.offer_incumbent(node.prop, std::vector<std::int8_t>(node.prop.n, 1));
      continue;
    }

    auto basis = std::make_shared<MonomialBasis>(build_basis(node.prop, cfg.basis));
    PolyCoeffs f = build_polynomial(node.prop);
    MatchGroups groups = build_matching(*basis, f);

    auto [state_raw, ub] =
        solve_node_prsm(node, *basis, f, groups, cfg.node_iters, /*allow_extend=*/true);
    auto state = std::make_shared<PrsmState>(std::move(state_raw));

    const double node_ub_sat = node.prop.satisfied_weight + ub.floored;
    const double node_ub_cap = std::min(node.inherited_ub, node_ub_sat);

    // Rounding for an incumbent and the branching consensus.
    const double lambda_min = state->ub_trace.back().lambda_min;
    Eigen::MatrixXd m_tilde = state->M;
    m_tilde.diagonal().array() -= std::min(lambda_min, 0.0);
    RoundingConfig rc = cfg.rounding;
    rc.rng_seed = cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(sr.node_counter));
    RoundingResult rounded = round_assignments(m_tilde, *basis, node.prop, rc);
    if (!rounded.best_x.empty()) sr.offer_incumbent(node.prop, rounded.best_x);

    sr.log_node(node, node_ub_cap, sr.lb_sat);
    if (node_ub_cap <= sr.lb_sat) continue;  // pruned

    // Consensus only counts if the roundings reached the incumbent value.
    const std::vector<double>* consensus = nullptr;
    if (rounded.has_consensus) {
      const double batch_sat = node.prop.satisfied_weight +
                               node.prop.soft_weight_total() - rounded.best_value;
      if (batch_sat >= sr.lb_sat - 1e-9) consensus = &rounded.consensus;
    }

    BranchOrder order = branch_order(m_tilde, *basis, node.prop, f, consensus);
    if (order.sigma.empty()) continue;

    const double lb_local = sr.lb_sat - node.prop.satisfied_weight;
    const int b_max = compute_bmax_from_gap(order.u.front() - lb_local - 1.0);

    // Probe the most promising children; a certified bound at or below the
    // incumbent removes the probed branch from the search.
    int b_star = 0;
    std::optional<ChildPieces> first_child;
    for (int j = 0; j < std::min<int>(b_max, static_cast<int>(order.sigma.size())); ++j) {
      if (sr.out_of_time()) break;
      const int lit = order.sigma[j];
      TransformResult ur = unit_res(node.prop, std::vector<int>{lit});
      TransformResult pp = preprocess(ur.prop, false);
      ChildPieces child;
      child.node.prop = std::move(pp.prop);
      child.node.depth = node.depth + 1;
      child.node.to_parent = compose_to_parent(ur.old_to_new, pp.old_to_new, child.node.prop.n);
      child.node.parent_state = state;
      child.node.parent_basis = basis;
      child.node.inherited_ub = node_ub_cap;
      ++sr.stats.probes;
      if (child.node.prop.clauses.empty()) {
        sr.offer_incumbent(child.node.prop, std::vector<std::int8_t>(child.node.prop.n, 1));
        const double exact = child.node.prop.satisfied_weight;
        if (exact <= sr.lb_sat) {
          ++b_star;
          continue;
        }
        // The empty child realizes a value above the incumbent: it became
        // the incumbent just now, so it is exhausted either way.
        ++b_star;
        continue;
      }
      child.basis = std::make_shared<MonomialBasis>(build_basis(child.node.prop, cfg.basis));
      child.poly = build_polynomial(child.node.prop);
      child.groups = build_matching(*child.basis, child.poly);
      auto [cstate, cub] = solve_node_prsm(child.node, *child.basis, child.poly, child.groups,
                                           std::max(1, cfg.node_iters / 2),
                                           /*allow_extend=*/false);
      child.state = std::make_shared<PrsmState>(std::move(cstate));
      child.ub = cub;
      const double child_ub_sat = child.node.prop.satisfied_weight + cub.floored;
      if (child_ub_sat <= sr.lb_sat) {
        ++b_star;
        continue;
      }
      if (j == 0) first_child = std::move(child);
      break;
    }

    if (b_star > 0) {
      // All probed branches are exhausted; dive into their joint complement.
      std::vector<int> negated(order.sigma.begin(), order.sigma.begin() + b_star);
      for (int& lit : negated) lit = -lit;
      TransformResult ur = unit_res(node.prop, negated);
      TransformResult pp = preprocess(ur.prop, false);
      Node next;
      next.prop = std::move(pp.prop);
      next.depth = node.depth + 1;
      next.to_parent = compose_to_parent(ur.old_to_new, pp.old_to_new, next.prop.n);
      next.parent_state = state;
      next.parent_basis = basis;
      next.inherited_ub = node_ub_cap;
      sr.stack.push_back(std::move(next));
    } else {
      // Push both children on the first literal; the probed one resumes
      // from its own iterate.
      const int lit = order.sigma.front();
      TransformResult ur = unit_res(node.prop, std::vector<int>{-lit});
      TransformResult pp = preprocess(ur.prop, false);
      Node other;
      other.prop = std::move(pp.prop);
      other.depth = node.depth + 1;
      other.to_parent = compose_to_parent(ur.old_to_new, pp.old_to_new, other.prop.n);
      other.parent_state = state;
      other.parent_basis = basis;
      other.inherited_ub = node_ub_cap;
      sr.stack.push_back(std::move(other));

      if (first_child) {
        Node ready = std::move(first_child->node);
        ready.parent_state = first_child->state;
        ready.parent_basis = first_child->basis;
        ready.to_parent.assign(ready.prop.n + 1, 0);
        for (int v = 1; v <= ready.prop.n; ++v) ready.to_parent[v] = v;
        ready.inherited_ub = std::min(node_ub_cap,
                                      ready.prop.satisfied_weight + first_child->ub.floored);
        sr.stack.push_back(std::move(ready));
      }
    }
  }

  sr.result.best_satisfied = sr.lb_sat;
  sr.result.assignment = std::move(sr.best_assignment);
  if (sr.result.timed_out || !sr.stack.empty()) {
    double ub = sr.lb_sat;
    for (const auto& nd : sr.stack) ub = std::max(ub, nd.inherited_ub);
    sr.result.upper_bound = ub;
    sr.result.upper_bound_real = ub;
    sr.result.optimal = ub <= sr.lb_sat;
    sr.result.timed_out = !sr.result.optimal;
  } else {
    sr.result.upper_bound = sr.lb_sat;
    sr.result.upper_bound_real = sr.lb_sat;
    sr.result.optimal = true;
  }
  const double total = root.satisfied_weight + root.soft_weight_total() + root.falsified_weight;
  sr.result.best_unsatisfied = total - sr.result.best_satisfied;
  sr.result.stats.wall_seconds = sr.elapsed();
  return sr.result;
}

}  // namespace sosmax
