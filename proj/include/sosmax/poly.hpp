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

#ifndef SOSMAX_POLY_HPP
#define SOSMAX_POLY_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sosmax/cnf.hpp"

namespace sosmax {

/// Monomials over +-1 variables are square free, so a term is identified by
/// its (sorted) variable subset. Subsets of size <= 4 pack into one 64-bit
/// key, 16 bits per variable, first variable in the most significant slot so
/// that key order is (degree-compatible) lexicographic order.
using TermKey = std::uint64_t;

constexpr int kMaxPackedVars = 4;

TermKey pack_term(std::span<const int> sorted_vars);
int unpack_term(TermKey key, int out_vars[kMaxPackedVars]);  // returns degree
int term_degree(TermKey key);

/// Sparse coefficients of the objective polynomial, stored in per-degree
/// layers: dense vectors for degrees one and two, hash maps above.
struct PolyCoeffs {
  int n = 0;
  int max_degree = 0;
  double total_weight = 0;  // sum of folded-in clause weights
  double constant = 0;      // coefficient of the empty monomial

  std::vector<double> deg1;           // index by var, size n + 1
  bool deg2_dense = false;
  std::vector<double> deg2;           // (n+1)*(n+1) row-major when dense
  std::unordered_map<TermKey, double> deg2_sparse;
  std::vector<std::unordered_map<TermKey, double>> higher;  // degree 3 upward

  double coeff(TermKey key) const;
  double coeff(std::span<const int> sorted_vars) const;
  std::size_t term_count() const;
  /// Visits every stored nonzero term as (key, coefficient).
  void for_each_term(const std::function<void(TermKey, double)>& fn) const;
};

/// Expands sum_j w_j 2^{-l_j} prod_{i in C_j} (1 - a_{j,i} x_i) into sparse
/// coefficients. Hard clauses are skipped when soft_only is set.
PolyCoeffs build_polynomial(const Proposition& prop, bool soft_only = false);

/// Evaluates constant + sum of terms at x in {-1,+1}^n (x is 0-indexed).
double evaluate(const PolyCoeffs& f, std::span<const std::int8_t> x);

/// Direct clause-by-clause falsified weight; the oracle `evaluate` is
/// checked against. Hard clauses count with their stored weight.
double count_unsat(const Proposition& prop, std::span<const std::int8_t> x);
double count_unsat_soft(const Proposition& prop, std::span<const std::int8_t> x);
bool hard_satisfied(const Proposition& prop, std::span<const std::int8_t> x);

/// Debug dump: {"constant": c, "terms": {"1 2": coeff, ...}}.
std::string coeffs_to_json(const PolyCoeffs& f);

}  // namespace sosmax

#endif  // SOSMAX_POLY_HPP
