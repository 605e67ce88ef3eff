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

#ifndef SOSMAX_BASIS_HPP
#define SOSMAX_BASIS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sosmax/poly.hpp"

namespace sosmax {

enum class BasisKind { sos_p, sos_p_q, sos_s };

std::string basis_kind_name(BasisKind k);

/// A basis monomial has degree at most two: (0,0) is the empty monomial,
/// (0,i) the singleton x_i, (i,j) with i<j the pair x_i x_j.
struct BasisMono {
  int lo = 0;
  int hi = 0;
  int degree() const { return (lo != 0) + (hi != 0); }
  bool operator==(const BasisMono& o) const { return lo == o.lo && hi == o.hi; }
};

/// Ordered monomial list: the empty monomial, then all singletons, then the
/// selected quadratics in lexicographic order.
struct MonomialBasis {
  int n = 0;
  BasisKind kind = BasisKind::sos_p;
  int q_param = 0;
  double theta_param = 1.0;
  std::vector<BasisMono> monomials;

  int size() const { return static_cast<int>(monomials.size()); }
  int quadratic_count() const { return size() - n - 1; }
  /// Row index of a monomial, -1 when absent. Singleton lookups are O(1).
  int index_of(BasisMono m) const;

 private:
  friend MonomialBasis make_basis(int n, BasisKind kind, int q, double theta,
                                  std::vector<std::uint32_t>&& pair_codes);
  std::unordered_map<std::uint32_t, int> pair_index_;
};

/// Per-clause occurrence weights w(i): soft weights plus the mean soft
/// weight for every hard occurrence (plain counts on unweighted instances).
std::vector<double> occurrence_weights(const Proposition& prop);

MonomialBasis build_sosp(const Proposition& prop);
MonomialBasis build_sospq(const Proposition& prop, int q);
MonomialBasis build_soss(const Proposition& prop, double theta);

struct BasisSpec {
  BasisKind kind = BasisKind::sos_p;
  int q = 0;
  double theta = 1.0;
};
MonomialBasis build_basis(const Proposition& prop, const BasisSpec& spec);

class RepresentationError : public std::runtime_error {
 public:
  explicit RepresentationError(const std::string& what) : std::runtime_error(what) {}
};

/// Coefficient-matching groups over the upper triangle of X = x x^T.
/// Groups are ordered units first, then by (degree, lex) of gamma; each
/// stores its strict-upper-triangle entry positions. Ordered-pair counts are
/// twice the stored pair counts. Unit groups store the pre-halved target.
struct MatchGroups {
  int basis_size = 0;
  int unit_count = 0;
  std::vector<TermKey> gamma;
  std::vector<double> coeff;
  std::vector<std::int64_t> offset;  // size groups()+1
  std::vector<std::int32_t> rows, cols;

  std::int64_t groups() const { return static_cast<std::int64_t>(gamma.size()); }
  std::int64_t pair_count(std::int64_t g) const { return offset[g + 1] - offset[g]; }
  std::int64_t ordered_count(std::int64_t g) const { return 2 * pair_count(g); }
  /// Total monomial occurrences in X, diagonal included.
  std::int64_t occurrences() const {
    return static_cast<std::int64_t>(basis_size) * basis_size;
  }
  std::string stats_json() const;
  std::string dump_json() const;
};

/// The parsing step: products via packed XOR, degree buckets, leading-index
/// subdivision, coefficient attachment, representation check.
MatchGroups build_matching(const MonomialBasis& basis, const PolyCoeffs& f);

/// gamma key -> group index, built on demand (used by the hard-clause
/// structure and by tests).
std::unordered_map<TermKey, std::int32_t> build_group_index(const MatchGroups& g);

}  // namespace sosmax

#endif  // SOSMAX_BASIS_HPP
