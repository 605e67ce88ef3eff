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

#ifndef SOSMAX_CNF_HPP
#define SOSMAX_CNF_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sosmax {

struct Literal {
  int var = 0;  // 1-based
  bool negated = false;
};

/// A clause as a sorted variable set plus the matching +-1 sign pattern.
/// signs[k] is -1 when vars[k] appears negated.
struct Clause {
  std::vector<int> vars;
  std::vector<std::int8_t> signs;
  double weight = 1.0;
  bool hard = false;

  int len() const { return static_cast<int>(vars.size()); }
  bool operator==(const Clause& o) const {
    return vars == o.vars && signs == o.signs && hard == o.hard && weight == o.weight;
  }
};

/// Builds a normalized clause from signed DIMACS-style literals.
/// Returns false (and leaves `out` empty) for tautologies.
bool make_clause(std::span<const int> literals, double weight, bool hard, Clause& out);

struct Proposition {
  int n = 0;
  std::vector<Clause> clauses;
  // Variables fixed so far, in original (parse-time) ids, with the chosen +-1.
  std::vector<std::pair<int, std::int8_t>> assignment_log;
  // Soft weight already decided by the transformations applied so far.
  double falsified_weight = 0.0;
  double satisfied_weight = 0.0;
  // Current var id (1-based) -> original var id.
  std::vector<int> orig_var;
  int orig_n = 0;  // variable count before any transformation
  bool integral_weights = true;
  bool weighted = false;
  bool has_hard = false;
  double top_weight = 0.0;  // wcnf `top`; 0 when parsed from plain cnf

  int clause_count() const { return static_cast<int>(clauses.size()); }
  int max_clause_len() const;
  double soft_weight_total() const;
  int soft_count() const;
  int hard_count() const;
  /// Original var id of current variable v (1-based).
  int original_id(int v) const { return orig_var.empty() ? v : orig_var[v - 1]; }
};

/// Sets up identity var bookkeeping for a hand-built proposition.
void finalize_var_map(Proposition& p);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DimacsFormat { cnf, wcnf };

Proposition parse_dimacs(std::istream& in, DimacsFormat format);
Proposition parse_dimacs(const std::string& text, DimacsFormat format);
Proposition parse_dimacs_file(const std::string& path);

std::string to_dimacs(const Proposition& p);

struct TransformResult {
  Proposition prop;
  // old current-var id (1-based) -> new current-var id, 0 when eliminated.
  std::vector<int> old_to_new;
  bool hard_unsat = false;
};

/// Substitutes x_{|b|} = sign(b) for every listed literal simultaneously,
/// removes satisfied clauses, deletes falsified literals, and compacts the
/// variable range (order preserving).
TransformResult unit_res(const Proposition& p, std::span<const int> literals);

/// Iterates to a fixpoint: drops tautologies and duplicate hard clauses,
/// fixes single-occurrence variables to satisfy their clause, resolves unit
/// clauses (all of them under `strict` SAT semantics, hard ones otherwise),
/// and compacts unused variables.
TransformResult preprocess(const Proposition& p, bool strict);

struct ResolutionClosure {
  std::vector<Clause> implied;        // new clauses only, deduplicated
  std::vector<int> unit_literals;     // signed literals of implied unit clauses
  bool hard_unsat = false;            // an empty resolvent was derived
};

/// SAT-resolution closure over hard clauses, keeping resolvents of length
/// <= max_len. The empty resolvent is reported via hard_unsat and a
/// zero-length clause in `implied`.
ResolutionClosure sat_resolution_closure(std::span<const Clause> hard, int max_len);

/// Unsatisfiable chain fixture with k variables, k+1 clauses and optimum
/// exactly one unsatisfied clause.
Proposition generate_phi_k(int k);

/// Uniform random MAX-k-SAT: m clauses of exactly k distinct variables.
Proposition generate_random_ksat(int n, int m, int k, std::uint64_t seed);

/// Random weighted partial instance: soft weights in [1, max_weight],
/// `hard` clauses marked hard. Clause length is exactly k.
Proposition generate_random_wpms(int n, int m_soft, int m_hard, int k,
                                 int max_weight, std::uint64_t seed);

}  // namespace sosmax

#endif  // SOSMAX_CNF_HPP
