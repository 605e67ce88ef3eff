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

#include "sosmax/poly.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sosmax {

namespace {
constexpr int kDenseDeg2Limit = 1024;  // dense (n+1)^2 table up to this n
// Degree-2 bases represent polynomials of degree at most four, so longer
// clauses cannot enter the pipeline anyway.
constexpr int kMaxExpandLen = kMaxPackedVars;
}  // namespace

TermKey pack_term(std::span<const int> sorted_vars) {
  if (sorted_vars.size() > kMaxPackedVars)
    throw std::invalid_argument("pack_term: degree above 4");
  TermKey key = 0;
  int shift = 48;
  for (int v : sorted_vars) {
    if (v <= 0 || v > 0xffff) throw std::invalid_argument("pack_term: var id out of range");
    key |= static_cast<TermKey>(v) << shift;
    shift -= 16;
  }
  return key;
}

int unpack_term(TermKey key, int out_vars[kMaxPackedVars]) {
  int d = 0;
  for (int shift = 48; shift >= 0; shift -= 16) {
    int v = static_cast<int>((key >> shift) & 0xffff);
    if (v == 0) break;
    out_vars[d++] = v;
  }
  return d;
}

int term_degree(TermKey key) {
  int d = 0;
  for (int shift = 48; shift >= 0; shift -= 16)
    d += ((key >> shift) & 0xffff) != 0;
  return d;
}

double PolyCoeffs::coeff(TermKey key) const {
  int vars[kMaxPackedVars];
  int d = unpack_term(key, vars);
  switch (d) {
    case 0:
      return constant;
    case 1:
      return deg1.empty() ? 0.0 : deg1[vars[0]];
    case 2:
      if (deg2_dense) return deg2[static_cast<std::size_t>(vars[0]) * (n + 1) + vars[1]];
      if (auto it = deg2_sparse.find(key); it != deg2_sparse.end()) return it->second;
      return 0.0;
    default: {
      int layer = d - 3;
      if (layer >= static_cast<int>(higher.size())) return 0.0;
      if (auto it = higher[layer].find(key); it != higher[layer].end()) return it->second;
      return 0.0;
    }
  }
}

double PolyCoeffs::coeff(std::span<const int> sorted_vars) const {
  return coeff(pack_term(sorted_vars));
}

std::size_t PolyCoeffs::term_count() const {
  std::size_t c = 0;
  for (double v : deg1) c += v != 0.0;
  if (deg2_dense) {
    for (double v : deg2) c += v != 0.0;
  } else {
    c += deg2_sparse.size();
  }
  for (const auto& layer : higher) c += layer.size();
  return c;
}

void PolyCoeffs::for_each_term(const std::function<void(TermKey, double)>& fn) const {
  for (int v = 1; v < static_cast<int>(deg1.size()); ++v)
    if (deg1[v] != 0.0) fn(static_cast<TermKey>(v) << 48, deg1[v]);
  if (deg2_dense) {
    for (int a = 1; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b) {
        double c = deg2[static_cast<std::size_t>(a) * (n + 1) + b];
        if (c != 0.0) fn((static_cast<TermKey>(a) << 48) | (static_cast<TermKey>(b) << 32), c);
      }
  } else {
    for (const auto& [k, c] : deg2_sparse)
      if (c != 0.0) fn(k, c);
  }
  for (const auto& layer : higher)
    for (const auto& [k, c] : layer)
      if (c != 0.0) fn(k, c);
}

namespace {

// Exact accumulation of clause expansions. All contributions are multiples
// of 2^-max_len; with integral weights they are summed as scaled 64-bit
// integers and converted to double once.
struct Accumulator {
  bool exact;
  int scale_len;
  std::unordered_map<TermKey, std::int64_t> int_terms;
  std::unordered_map<TermKey, double> dbl_terms;
  std::int64_t int_constant = 0;
  double dbl_constant = 0;

  void add(TermKey key, double w, int len, int sign) {
    if (exact) {
      std::int64_t c = static_cast<std::int64_t>(w) * (1LL << (scale_len - len)) * sign;
      if (key == 0)
        int_constant += c;
      else
        int_terms[key] += c;
    } else {
      double c = sign * std::ldexp(w, -len);
      if (key == 0)
        dbl_constant += c;
      else
        dbl_terms[key] += c;
    }
  }
};

}  // namespace

PolyCoeffs build_polynomial(const Proposition& prop, bool soft_only) {
  PolyCoeffs f;
  f.n = prop.n;
  f.deg1.assign(prop.n + 1, 0.0);

  int max_len = 0;
  double wmax = 0;
  for (const auto& c : prop.clauses) {
    if (soft_only && c.hard) continue;
    max_len = std::max(max_len, c.len());
    wmax = std::max(wmax, c.weight);
  }
  if (max_len > kMaxExpandLen)
    throw std::invalid_argument("build_polynomial: clause length " + std::to_string(max_len) +
                                " is not representable by degree-two monomial bases");
  f.max_degree = max_len;
  f.deg2_dense = prop.n <= kDenseDeg2Limit;
  if (f.deg2_dense) f.deg2.assign(static_cast<std::size_t>(prop.n + 1) * (prop.n + 1), 0.0);
  if (max_len > 2) f.higher.resize(max_len - 2);

  Accumulator acc;
  acc.scale_len = max_len;
  // 2^scale * w * m must stay well inside the 64-bit range for exactness.
  acc.exact = prop.integral_weights &&
              std::ldexp(wmax * std::max<std::size_t>(prop.clauses.size(), 1), max_len) < 9.0e17;

  int vars[kMaxPackedVars + 1];
  for (const auto& c : prop.clauses) {
    if (soft_only && c.hard) continue;
    f.total_weight += c.weight;
    int l = c.len();
    // Subsets of the clause, enumerated by bitmask; sign is
    // (-1)^{|gamma|} * prod_{i in gamma} a_i.
    for (unsigned mask = 0; mask < (1u << l); ++mask) {
      int d = 0;
      int sign = 1;
      for (int k = 0; k < l; ++k) {
        if (mask & (1u << k)) {
          vars[d++] = c.vars[k];
          sign *= -c.signs[k];
        }
      }
      acc.add(d == 0 ? 0 : pack_term(std::span<const int>(vars, d)), c.weight, l, sign);
    }
  }

  auto store = [&](TermKey key, double value) {
    if (value == 0.0) return;
    int vs[kMaxPackedVars];
    int d = unpack_term(key, vs);
    switch (d) {
      case 1:
        f.deg1[vs[0]] = value;
        break;
      case 2:
        if (f.deg2_dense)
          f.deg2[static_cast<std::size_t>(vs[0]) * (f.n + 1) + vs[1]] = value;
        else
          f.deg2_sparse[key] = value;
        break;
      default:
        f.higher[d - 3][key] = value;
        break;
    }
  };

  if (acc.exact) {
    f.constant = std::ldexp(static_cast<double>(acc.int_constant), -max_len);
    for (const auto& [k, v] : acc.int_terms)
      store(k, std::ldexp(static_cast<double>(v), -max_len));
  } else {
    f.constant = acc.dbl_constant;
    for (const auto& [k, v] : acc.dbl_terms) store(k, v);
  }
  return f;
}

double evaluate(const PolyCoeffs& f, std::span<const std::int8_t> x) {
  if (static_cast<int>(x.size()) != f.n)
    throw std::invalid_argument("evaluate: assignment dimension mismatch");
  double total = f.constant;
  int vars[kMaxPackedVars];
  f.for_each_term([&](TermKey key, double c) {
    int d = unpack_term(key, vars);
    int prod = 1;
    for (int i = 0; i < d; ++i) prod *= x[vars[i] - 1];
    total += c * prod;
  });
  return total;
}

double count_unsat(const Proposition& prop, std::span<const std::int8_t> x) {
  if (static_cast<int>(x.size()) != prop.n)
    throw std::invalid_argument("count_unsat: assignment dimension mismatch");
  double w = 0;
  for (const auto& c : prop.clauses) {
    bool sat = false;
    for (int k = 0; k < c.len() && !sat; ++k) sat = x[c.vars[k] - 1] == c.signs[k];
    if (!sat) w += c.weight;
  }
  return w;
}

double count_unsat_soft(const Proposition& prop, std::span<const std::int8_t> x) {
  double w = 0;
  for (const auto& c : prop.clauses) {
    if (c.hard) continue;
    bool sat = false;
    for (int k = 0; k < c.len() && !sat; ++k) sat = x[c.vars[k] - 1] == c.signs[k];
    if (!sat) w += c.weight;
  }
  return w;
}

bool hard_satisfied(const Proposition& prop, std::span<const std::int8_t> x) {
  for (const auto& c : prop.clauses) {
    if (!c.hard) continue;
    bool sat = false;
    for (int k = 0; k < c.len() && !sat; ++k) sat = x[c.vars[k] - 1] == c.signs[k];
    if (!sat) return false;
  }
  return true;
}

std::string coeffs_to_json(const PolyCoeffs& f) {
  nlohmann::json j;
  j["n"] = f.n;
  j["constant"] = f.constant;
  j["total_weight"] = f.total_weight;
  nlohmann::json terms = nlohmann::json::object();
  int vars[kMaxPackedVars];
  f.for_each_term([&](TermKey key, double c) {
    int d = unpack_term(key, vars);
    std::ostringstream name;
    for (int i = 0; i < d; ++i) name << (i ? " " : "") << vars[i];
    terms[name.str()] = c;
  });
  j["terms"] = std::move(terms);
  return j.dump(2);
}

}  // namespace sosmax
