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

#include "sosmax/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sosmax {

std::string basis_kind_name(BasisKind k) {
  switch (k) {
    case BasisKind::sos_p:
      return "sosp";
    case BasisKind::sos_p_q:
      return "sospq";
    case BasisKind::sos_s:
      return "soss";
  }
  return "?";
}

namespace {

inline std::uint32_t pair_code(int n, int lo, int hi) {
  return static_cast<std::uint32_t>(lo) * static_cast<std::uint32_t>(n + 1) +
         static_cast<std::uint32_t>(hi);
}

}  // namespace

int MonomialBasis::index_of(BasisMono m) const {
  if (m.lo == 0) return m.hi;  // empty monomial and singletons lead the list
  auto it = pair_index_.find(pair_code(n, m.lo, m.hi));
  return it == pair_index_.end() ? -1 : it->second;
}

MonomialBasis make_basis(int n, BasisKind kind, int q, double theta,
                         std::vector<std::uint32_t>&& pair_codes) {
  MonomialBasis b;
  b.n = n;
  b.kind = kind;
  b.q_param = q;
  b.theta_param = theta;
  std::sort(pair_codes.begin(), pair_codes.end());
  pair_codes.erase(std::unique(pair_codes.begin(), pair_codes.end()), pair_codes.end());
  b.monomials.reserve(1 + n + pair_codes.size());
  b.monomials.push_back({0, 0});
  for (int i = 1; i <= n; ++i) b.monomials.push_back({0, i});
  for (std::uint32_t code : pair_codes) {
    int lo = static_cast<int>(code / (n + 1));
    int hi = static_cast<int>(code % (n + 1));
    b.pair_index_.emplace(code, b.size());
    b.monomials.push_back({lo, hi});
  }
  return b;
}

std::vector<double> occurrence_weights(const Proposition& prop) {
  double soft_total = 0;
  int soft_count = 0;
  for (const auto& c : prop.clauses)
    if (!c.hard) {
      soft_total += c.weight;
      ++soft_count;
    }
  double mean_soft = soft_count > 0 ? soft_total / soft_count : 1.0;
  std::vector<double> w(prop.n + 1, 0.0);
  for (const auto& c : prop.clauses) {
    double inc = c.hard ? mean_soft : c.weight;
    for (int v : c.vars) w[v] += inc;
  }
  return w;
}

namespace {

std::vector<std::uint32_t> clause_pair_codes(const Proposition& prop) {
  std::vector<std::uint32_t> codes;
  for (const auto& c : prop.clauses)
    for (int a = 0; a < c.len(); ++a)
      for (int b = a + 1; b < c.len(); ++b)
        codes.push_back(pair_code(prop.n, c.vars[a], c.vars[b]));
  return codes;
}

std::vector<int> top_q_vars(const Proposition& prop, int q) {
  std::vector<double> w = occurrence_weights(prop);
  std::vector<int> order(prop.n);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return w[a] > w[b] || (w[a] == w[b] && a < b); });
  order.resize(q);
  return order;
}

}  // namespace

MonomialBasis build_sosp(const Proposition& prop) {
  return make_basis(prop.n, BasisKind::sos_p, 0, 1.0, clause_pair_codes(prop));
}

MonomialBasis build_sospq(const Proposition& prop, int q) {
  if (q < 0 || q > prop.n) throw std::invalid_argument("build_sospq: Q out of range");
  std::vector<std::uint32_t> codes = clause_pair_codes(prop);
  std::vector<int> top = top_q_vars(prop, q);
  std::sort(top.begin(), top.end());
  for (std::size_t a = 0; a < top.size(); ++a)
    for (std::size_t b = a + 1; b < top.size(); ++b)
      codes.push_back(pair_code(prop.n, top[a], top[b]));
  return make_basis(prop.n, BasisKind::sos_p_q, q, 1.0, std::move(codes));
}

MonomialBasis build_soss(const Proposition& prop, double theta) {
  if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("build_soss: theta out of range");
  std::vector<std::uint32_t> codes = clause_pair_codes(prop);
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  std::size_t keep = static_cast<std::size_t>(std::ceil(theta * codes.size()));
  std::vector<double> w = occurrence_weights(prop);
  std::stable_sort(codes.begin(), codes.end(), [&](std::uint32_t a, std::uint32_t b) {
    double wa = w[a / (prop.n + 1)] + w[a % (prop.n + 1)];
    double wb = w[b / (prop.n + 1)] + w[b % (prop.n + 1)];
    return wa > wb || (wa == wb && a < b);
  });
  codes.resize(keep);
  return make_basis(prop.n, BasisKind::sos_s, 0, theta, std::move(codes));
}

MonomialBasis build_basis(const Proposition& prop, const BasisSpec& spec) {
  switch (spec.kind) {
    case BasisKind::sos_p:
      return build_sosp(prop);
    case BasisKind::sos_p_q:
      return build_sospq(prop, std::min(spec.q, prop.n));
    case BasisKind::sos_s:
      return build_soss(prop, spec.theta);
  }
  throw std::invalid_argument("build_basis: bad kind");
}

namespace {

// Symmetric difference of two degree <= 2 monomials, packed. Vars of each
// monomial are sorted; a shared var cancels (x_i^2 = 1).
inline TermKey product_key(BasisMono a, BasisMono b) {
  int v[4];
  int d = 0;
  int av[2] = {a.lo, a.hi};
  int bv[2] = {b.lo, b.hi};
  int i = a.lo == 0 ? 1 : 0, j = b.lo == 0 ? 1 : 0;
  if (a.hi == 0) i = 2;
  if (b.hi == 0) j = 2;
  while (i < 2 && j < 2) {
    if (av[i] == bv[j]) {
      ++i;
      ++j;
    } else if (av[i] < bv[j]) {
      v[d++] = av[i++];
    } else {
      v[d++] = bv[j++];
    }
  }
  while (i < 2) v[d++] = av[i++];
  while (j < 2) v[d++] = bv[j++];
  TermKey key = 0;
  int shift = 48;
  for (int t = 0; t < d; ++t, shift -= 16) key |= static_cast<TermKey>(v[t]) << shift;
  return key;
}

struct PairRecord {
  TermKey key;
  std::int32_t row, col;
};

}  // namespace

MatchGroups build_matching(const MonomialBasis& basis, const PolyCoeffs& f) {
  if (basis.n != f.n)
    throw std::invalid_argument("build_matching: basis and polynomial dimension differ");
  const int s = basis.size();
  const std::int64_t total_pairs = static_cast<std::int64_t>(s) * (s - 1) / 2;

  // All strict upper-triangle products, keyed by the packed product monomial.
  std::vector<PairRecord> pairs;
  pairs.reserve(total_pairs);
  for (std::int32_t r = 0; r < s; ++r) {
    BasisMono mr = basis.monomials[r];
    for (std::int32_t c = r + 1; c < s; ++c) {
      pairs.push_back({product_key(mr, basis.monomials[c]), r, c});
    }
  }

  // Degree buckets, then leading-variable buckets (two leading variables for
  // degree four), then an ordinary sort of the small buckets.
  std::array<std::vector<std::int64_t>, 5> by_degree;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(pairs.size()); ++i)
    by_degree[term_degree(pairs[i].key)].push_back(i);

  struct GroupDraft {
    TermKey key;
    std::int64_t begin, end;  // range in `order`
  };
  std::vector<std::int64_t> order;
  order.reserve(pairs.size());
  std::vector<GroupDraft> drafts;

  for (int deg = 1; deg <= 4; ++deg) {
    auto& idx = by_degree[deg];
    if (idx.empty()) continue;
    // Keys put the leading variable(s) in the top bits, so ordering by key
    // is the leading-index subdivision with the remaining slots as tie key.
    std::sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
      if (pairs[a].key != pairs[b].key) return pairs[a].key < pairs[b].key;
      return a < b;
    });
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j < idx.size() && pairs[idx[j]].key == pairs[idx[i]].key) ++j;
      drafts.push_back({pairs[idx[i]].key, static_cast<std::int64_t>(order.size()),
                        static_cast<std::int64_t>(order.size() + (j - i))});
      for (std::size_t t = i; t < j; ++t) order.push_back(idx[t]);
      i = j;
    }
  }

  // Units first, then by (degree, lex) which is the order drafts were made in.
  std::vector<std::int32_t> unit_drafts, rest_drafts;
  for (std::int32_t g = 0; g < static_cast<std::int32_t>(drafts.size()); ++g) {
    if (drafts[g].end - drafts[g].begin == 1)
      unit_drafts.push_back(g);
    else
      rest_drafts.push_back(g);
  }

  MatchGroups out;
  out.basis_size = s;
  out.unit_count = static_cast<int>(unit_drafts.size());
  const std::int64_t ng = static_cast<std::int64_t>(drafts.size());
  out.gamma.reserve(ng);
  out.coeff.reserve(ng);
  out.offset.reserve(ng + 1);
  out.rows.resize(pairs.size());
  out.cols.resize(pairs.size());
  out.offset.push_back(0);

  std::size_t hit_terms = 0;
  auto emit = [&](std::int32_t g, bool unit) {
    const GroupDraft& d = drafts[g];
    double p = f.coeff(d.key);
    if (p != 0.0) ++hit_terms;
    out.gamma.push_back(d.key);
    out.coeff.push_back(unit ? p / 2.0 : p);
    std::int64_t base = out.offset.back();
    for (std::int64_t t = d.begin; t < d.end; ++t) {
      out.rows[base + (t - d.begin)] = pairs[order[t]].row;
      out.cols[base + (t - d.begin)] = pairs[order[t]].col;
    }
    out.offset.push_back(base + (d.end - d.begin));
  };
  for (std::int32_t g : unit_drafts) emit(g, true);
  for (std::int32_t g : rest_drafts) emit(g, false);

  // Representation check: every nonzero coefficient must have a group.
  if (hit_terms != f.term_count()) {
    std::unordered_map<TermKey, char> present;
    present.reserve(drafts.size());
    for (const auto& d : drafts) present.emplace(d.key, 1);
    std::ostringstream msg;
    msg << "basis does not represent the polynomial; missing monomials:";
    int listed = 0;
    f.for_each_term([&](TermKey key, double) {
      if (present.count(key) || listed >= 8) return;
      int vars[kMaxPackedVars];
      int d = unpack_term(key, vars);
      msg << " {";
      for (int i = 0; i < d; ++i) msg << (i ? "," : "") << vars[i];
      msg << "}";
      ++listed;
    });
    throw RepresentationError(msg.str());
  }
  return out;
}

std::unordered_map<TermKey, std::int32_t> build_group_index(const MatchGroups& g) {
  std::unordered_map<TermKey, std::int32_t> index;
  index.reserve(g.gamma.size());
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(g.gamma.size()); ++i)
    index.emplace(g.gamma[i], i);
  return index;
}

std::string MatchGroups::stats_json() const {
  nlohmann::json j;
  j["basis_size"] = basis_size;
  j["groups"] = groups();
  j["unit_groups"] = unit_count;
  j["unit_fraction"] = groups() ? static_cast<double>(unit_count) / groups() : 0.0;
  j["occurrences"] = occurrences();
  std::map<std::int64_t, std::int64_t> hist;
  for (std::int64_t g = 0; g < groups(); ++g) hist[ordered_count(g)]++;
  nlohmann::json h = nlohmann::json::object();
  for (auto& [size, count] : hist) h[std::to_string(size)] = count;
  j["ordered_size_histogram"] = std::move(h);
  return j.dump(2);
}

std::string MatchGroups::dump_json() const {
  nlohmann::json j = nlohmann::json::array();
  int vars[kMaxPackedVars];
  for (std::int64_t g = 0; g < groups(); ++g) {
    nlohmann::json e;
    int d = unpack_term(gamma[g], vars);
    std::ostringstream name;
    for (int i = 0; i < d; ++i) name << (i ? " " : "") << vars[i];
    e["gamma"] = name.str();
    e["coeff"] = coeff[g];
    e["unit"] = g < unit_count;
    nlohmann::json ps = nlohmann::json::array();
    for (std::int64_t t = offset[g]; t < offset[g + 1]; ++t)
      ps.push_back({rows[t], cols[t]});
    e["pairs"] = std::move(ps);
    j.push_back(std::move(e));
  }
  return j.dump(2);
}

}  // namespace sosmax
