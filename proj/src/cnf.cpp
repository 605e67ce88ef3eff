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

#include "sosmax/cnf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace sosmax {

int Proposition::max_clause_len() const {
  int k = 0;
  for (const auto& c : clauses) k = std::max(k, c.len());
  return k;
}

double Proposition::soft_weight_total() const {
  double w = 0;
  for (const auto& c : clauses)
    if (!c.hard) w += c.weight;
  return w;
}

int Proposition::soft_count() const {
  int k = 0;
  for (const auto& c : clauses) k += !c.hard;
  return k;
}

int Proposition::hard_count() const {
  int k = 0;
  for (const auto& c : clauses) k += c.hard;
  return k;
}

void finalize_var_map(Proposition& p) {
  if (static_cast<int>(p.orig_var.size()) != p.n) {
    p.orig_var.resize(p.n);
    for (int i = 0; i < p.n; ++i) p.orig_var[i] = i + 1;
  }
  if (p.orig_n == 0) p.orig_n = p.n;
}

bool make_clause(std::span<const int> literals, double weight, bool hard, Clause& out) {
  out.vars.clear();
  out.signs.clear();
  std::vector<std::pair<int, std::int8_t>> lits;
  lits.reserve(literals.size());
  for (int l : literals) lits.emplace_back(std::abs(l), l < 0 ? -1 : 1);
  std::sort(lits.begin(), lits.end());
  for (std::size_t i = 0; i < lits.size(); ++i) {
    if (i > 0 && lits[i].first == lits[i - 1].first) {
      if (lits[i].second != lits[i - 1].second) return false;  // tautology
      continue;  // duplicate literal
    }
    out.vars.push_back(lits[i].first);
    out.signs.push_back(lits[i].second);
  }
  out.weight = weight;
  out.hard = hard;
  return true;
}

namespace {

bool is_integral(double w) {
  return std::floor(w) == w && std::abs(w) < 9.0e15;
}

struct HeaderInfo {
  DimacsFormat format;
  int n = 0;
  long long m = 0;
  double top = 0.0;
};

HeaderInfo parse_header(const std::string& line) {
  std::istringstream ss(line);
  std::string p, fmt;
  HeaderInfo h{};
  if (!(ss >> p >> fmt) || p != "p") throw ParseError("malformed problem line: " + line);
  if (fmt == "cnf") {
    h.format = DimacsFormat::cnf;
    if (!(ss >> h.n >> h.m)) throw ParseError("malformed cnf header: " + line);
  } else if (fmt == "wcnf") {
    h.format = DimacsFormat::wcnf;
    if (!(ss >> h.n >> h.m)) throw ParseError("malformed wcnf header: " + line);
    if (!(ss >> h.top)) h.top = 0.0;  // classic weighted (no hard clauses)
    if (h.top < 0) throw ParseError("negative top weight");
  } else {
    throw ParseError("unknown DIMACS format '" + fmt + "'");
  }
  if (h.n < 0 || h.m < 0) throw ParseError("negative counts in header");
  return h;
}

}  // namespace

Proposition parse_dimacs(std::istream& in, DimacsFormat format) {
  Proposition prop;
  std::string line;
  bool have_header = false;
  HeaderInfo header{};
  std::vector<int> lits;

  auto flush_clause = [&](std::span<const int> ls, double w, bool hard) {
    Clause c;
    if (!make_clause(ls, w, hard, c)) {
      // Trivially satisfied; dropped but still counted toward the objective.
      if (!hard) prop.satisfied_weight += w;
      return;
    }
    if (c.len() == 0) throw ParseError("empty clause in input");
    prop.integral_weights = prop.integral_weights && is_integral(w);
    prop.has_hard = prop.has_hard || hard;
    prop.clauses.push_back(std::move(c));
  };

  while (std::getline(in, line)) {
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;
    char first = line[i];
    if (first == 'c' || first == '%') continue;
    if (first == 'h')
      throw ParseError(
          "2022-style 'h' hard-clause lines are not supported; "
          "use the classic 'p wcnf n m top' encoding");
    if (first == 'p') {
      if (have_header) throw ParseError("duplicate problem line");
      header = parse_header(line.substr(i));
      if (format != header.format) {
        // Trust the file's own header; callers pass the expected format.
        format = header.format;
      }
      prop.n = header.n;
      prop.weighted = header.format == DimacsFormat::wcnf;
      prop.top_weight = header.top;
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError("clause data before problem line");

    std::istringstream ss(line.substr(i));
    double w = 1.0;
    if (format == DimacsFormat::wcnf) {
      if (!(ss >> w)) throw ParseError("missing clause weight: " + line);
      if (w < 0) throw ParseError("negative clause weight");
    }
    lits.clear();
    long long tok;
    bool terminated = false;
    while (ss >> tok) {
      if (tok == 0) {
        terminated = true;
        break;
      }
      int v = static_cast<int>(std::abs(tok));
      if (v > prop.n) throw ParseError("literal index out of range: " + std::to_string(tok));
      lits.push_back(static_cast<int>(tok));
    }
    // Tolerate clauses wrapped across lines.
    while (!terminated) {
      if (!std::getline(in, line)) throw ParseError("missing terminating 0");
      std::istringstream cont(line);
      while (cont >> tok) {
        if (tok == 0) {
          terminated = true;
          break;
        }
        int v = static_cast<int>(std::abs(tok));
        if (v > prop.n) throw ParseError("literal index out of range: " + std::to_string(tok));
        lits.push_back(static_cast<int>(tok));
      }
    }
    bool hard = format == DimacsFormat::wcnf && header.top > 0 && w >= header.top;
    flush_clause(lits, w, hard);
  }
  if (!have_header) throw ParseError("missing problem line");
  finalize_var_map(prop);
  return prop;
}

Proposition parse_dimacs(const std::string& text, DimacsFormat format) {
  std::istringstream ss(text);
  return parse_dimacs(ss, format);
}

Proposition parse_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file: " + path);
  DimacsFormat fmt = DimacsFormat::cnf;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".wcnf") fmt = DimacsFormat::wcnf;
  return parse_dimacs(in, fmt);
}

std::string to_dimacs(const Proposition& p) {
  std::ostringstream out;
  bool wcnf = p.weighted || p.has_hard;
  double top = p.top_weight;
  if (wcnf && top <= 0) {
    top = p.soft_weight_total() + 1;
    if (!p.integral_weights) top = std::ceil(top);
  }
  auto put_weight = [&](double w) {
    if (is_integral(w))
      out << static_cast<long long>(w);
    else
      out << w;
  };
  if (wcnf) {
    out << "p wcnf " << p.n << ' ' << p.clauses.size() << ' ';
    put_weight(top);
    out << '\n';
  } else {
    out << "p cnf " << p.n << ' ' << p.clauses.size() << '\n';
  }
  for (const auto& c : p.clauses) {
    if (wcnf) {
      put_weight(c.hard ? top : c.weight);
      out << ' ';
    }
    for (int k = 0; k < c.len(); ++k) out << (c.signs[k] < 0 ? -c.vars[k] : c.vars[k]) << ' ';
    out << "0\n";
  }
  return out.str();
}

namespace {

// Substitutes the (current-id) assignments into p. assign[v] in {-1,0,+1}.
// Does not compact variables; reports clauses kept / dropped weights.
struct SubstOutcome {
  std::vector<Clause> clauses;
  double satisfied = 0;
  double falsified = 0;
  bool hard_unsat = false;
};

SubstOutcome substitute(const Proposition& p, const std::vector<std::int8_t>& assign) {
  SubstOutcome out;
  out.clauses.reserve(p.clauses.size());
  Clause nc;
  for (const auto& c : p.clauses) {
    bool satisfied = false;
    nc.vars.clear();
    nc.signs.clear();
    for (int k = 0; k < c.len(); ++k) {
      std::int8_t a = assign[c.vars[k]];
      if (a == 0) {
        nc.vars.push_back(c.vars[k]);
        nc.signs.push_back(c.signs[k]);
      } else if (a == c.signs[k]) {
        satisfied = true;
        break;
      }
      // else: literal falsified, dropped
    }
    if (satisfied) {
      if (!c.hard) out.satisfied += c.weight;
      continue;
    }
    if (nc.vars.empty()) {
      if (c.hard)
        out.hard_unsat = true;
      else
        out.falsified += c.weight;
      continue;
    }
    nc.weight = c.weight;
    nc.hard = c.hard;
    out.clauses.push_back(nc);
  }
  return out;
}

// Compacts variable ids to 1..n' keeping only vars occurring in `clauses`
// (or pinning them, see caller). Returns the old->new map.
std::vector<int> compact(Proposition& p, std::vector<Clause> clauses, int old_n) {
  std::vector<char> used(old_n + 1, 0);
  for (const auto& c : clauses)
    for (int v : c.vars) used[v] = 1;
  std::vector<int> old_to_new(old_n + 1, 0);
  int next = 0;
  std::vector<int> new_orig;
  for (int v = 1; v <= old_n; ++v) {
    if (used[v]) {
      old_to_new[v] = ++next;
      new_orig.push_back(p.orig_var[v - 1]);
    }
  }
  for (auto& c : clauses)
    for (auto& v : c.vars) v = old_to_new[v];
  p.clauses = std::move(clauses);
  p.n = next;
  p.orig_var = std::move(new_orig);
  return old_to_new;
}

}  // namespace

TransformResult unit_res(const Proposition& p, std::span<const int> literals) {
  TransformResult res;
  res.prop = p;
  finalize_var_map(res.prop);
  std::vector<std::int8_t> assign(p.n + 1, 0);
  for (int b : literals) {
    int v = std::abs(b);
    if (v < 1 || v > p.n) throw std::invalid_argument("unit_res: literal out of range");
    std::int8_t s = b < 0 ? -1 : 1;
    if (assign[v] != 0 && assign[v] != s)
      throw std::invalid_argument("unit_res: variable listed twice with opposite signs");
    assign[v] = s;
  }
  SubstOutcome sub = substitute(res.prop, assign);
  res.hard_unsat = sub.hard_unsat;
  res.prop.satisfied_weight += sub.satisfied;
  res.prop.falsified_weight += sub.falsified;
  for (int v = 1; v <= p.n; ++v)
    if (assign[v] != 0) res.prop.assignment_log.emplace_back(res.prop.orig_var[v - 1], assign[v]);
  // Vars whose clauses all disappeared are pinned true so the log stays total.
  std::vector<char> used(p.n + 1, 0);
  for (const auto& c : sub.clauses)
    for (int v : c.vars) used[v] = 1;
  for (int v = 1; v <= p.n; ++v)
    if (assign[v] == 0 && !used[v]) res.prop.assignment_log.emplace_back(res.prop.orig_var[v - 1], 1);
  res.old_to_new = compact(res.prop, std::move(sub.clauses), p.n);
  return res;
}

TransformResult preprocess(const Proposition& p, bool strict) {
  TransformResult res;
  res.prop = p;
  finalize_var_map(res.prop);
  res.old_to_new.resize(p.n + 1);
  for (int v = 0; v <= p.n; ++v) res.old_to_new[v] = v;

  bool changed = true;
  while (changed) {
    changed = false;
    Proposition& q = res.prop;

    // Tautologies and duplicate hard clauses.
    {
      std::vector<Clause> kept;
      kept.reserve(q.clauses.size());
      std::set<std::pair<std::vector<int>, std::vector<std::int8_t>>> hard_seen;
      for (auto& c : q.clauses) {
        bool taut = false;
        for (int k = 0; k + 1 < c.len(); ++k)
          if (c.vars[k] == c.vars[k + 1]) taut = true;
        if (taut) {
          if (!c.hard) q.satisfied_weight += c.weight;
          changed = true;
          continue;
        }
        if (c.hard && !hard_seen.insert({c.vars, c.signs}).second) {
          changed = true;
          continue;
        }
        kept.push_back(std::move(c));
      }
      q.clauses = std::move(kept);
    }

    // Forced assignments from unit clauses. On a sign conflict, hard beats
    // soft and two hard units are unsatisfiable; a losing soft unit is left
    // to be falsified by the substitution below.
    std::vector<std::int8_t> forced(q.n + 1, 0);
    std::vector<char> forced_hard(q.n + 1, 0);
    bool any_forced = false;
    for (const auto& c : q.clauses) {
      if (c.len() != 1) continue;
      if (!strict && !c.hard) continue;
      int v = c.vars[0];
      std::int8_t s = c.signs[0];
      if (forced[v] == -s) {
        if (c.hard && forced_hard[v]) {
          res.hard_unsat = true;
          return res;
        }
        if (c.hard) {
          forced[v] = s;
          forced_hard[v] = 1;
        }
        continue;
      }
      forced[v] = s;
      forced_hard[v] = forced_hard[v] || c.hard;
      any_forced = true;
    }

    // A variable contained in exactly one clause is set to satisfy it.
    if (!any_forced) {
      std::vector<int> occ(q.n + 1, 0);
      std::vector<int> last_clause(q.n + 1, -1);
      for (std::size_t j = 0; j < q.clauses.size(); ++j)
        for (int v : q.clauses[j].vars) {
          occ[v]++;
          last_clause[v] = static_cast<int>(j);
        }
      std::vector<char> clause_taken(q.clauses.size(), 0);
      for (int v = 1; v <= q.n; ++v) {
        if (occ[v] != 1) continue;
        int j = last_clause[v];
        if (clause_taken[j]) continue;  // another single-occurrence var already satisfies it
        const Clause& c = q.clauses[j];
        for (int k = 0; k < c.len(); ++k)
          if (c.vars[k] == v) {
            forced[v] = c.signs[k];
            any_forced = true;
            clause_taken[j] = 1;
            break;
          }
      }
    }

    if (any_forced) {
      SubstOutcome sub = substitute(q, forced);
      if (sub.hard_unsat) {
        res.hard_unsat = true;
        return res;
      }
      q.satisfied_weight += sub.satisfied;
      q.falsified_weight += sub.falsified;
      for (int v = 1; v <= q.n; ++v)
        if (forced[v] != 0) q.assignment_log.emplace_back(q.orig_var[v - 1], forced[v]);
      q.clauses = std::move(sub.clauses);
      changed = true;
    }

    // Compact away unused variables (pinned true).
    {
      std::vector<char> used(q.n + 1, 0);
      for (const auto& c : q.clauses)
        for (int v : c.vars) used[v] = 1;
      bool any_unused = false;
      for (int v = 1; v <= q.n; ++v)
        if (!used[v]) {
          any_unused = true;
          q.assignment_log.emplace_back(q.orig_var[v - 1], 1);
        }
      if (any_unused || changed) {
        int old_n = q.n;
        std::vector<int> map = compact(q, std::move(q.clauses), old_n);
        for (int v = 1; v <= p.n; ++v)
          if (res.old_to_new[v] != 0) res.old_to_new[v] = map[res.old_to_new[v]];
        changed = changed || any_unused;
      }
    }
  }
  return res;
}

namespace {

using ClauseKey = std::pair<std::vector<int>, std::vector<std::int8_t>>;

ClauseKey key_of(const Clause& c) { return {c.vars, c.signs}; }

// Resolves two clauses clashing on exactly one variable; returns false when
// they do not clash on exactly one var or the resolvent is tautological.
bool resolve_pair(const Clause& a, const Clause& b, Clause& out) {
  int clash_var = 0, clashes = 0;
  {
    std::size_t i = 0, j = 0;
    while (i < a.vars.size() && j < b.vars.size()) {
      if (a.vars[i] < b.vars[j])
        ++i;
      else if (a.vars[i] > b.vars[j])
        ++j;
      else {
        if (a.signs[i] != b.signs[j]) {
          clash_var = a.vars[i];
          if (++clashes > 1) return false;
        }
        ++i, ++j;
      }
    }
  }
  if (clashes != 1) return false;
  out.vars.clear();
  out.signs.clear();
  std::size_t i = 0, j = 0;
  while (i < a.vars.size() || j < b.vars.size()) {
    int va = i < a.vars.size() ? a.vars[i] : INT32_MAX;
    int vb = j < b.vars.size() ? b.vars[j] : INT32_MAX;
    int v = std::min(va, vb);
    if (v == clash_var) {
      if (va == v) ++i;
      if (vb == v) ++j;
      continue;
    }
    std::int8_t s = va <= vb ? a.signs[i] : b.signs[j];
    out.vars.push_back(v);
    out.signs.push_back(s);
    if (va == v) ++i;
    if (vb == v) ++j;
  }
  out.hard = true;
  out.weight = 1.0;
  return true;
}

}  // namespace

ResolutionClosure sat_resolution_closure(std::span<const Clause> hard, int max_len) {
  ResolutionClosure out;
  if (max_len < 1) throw std::invalid_argument("sat_resolution_closure: max_len must be >= 1");
  std::vector<Clause> pool(hard.begin(), hard.end());
  std::set<ClauseKey> known;
  for (const auto& c : pool) known.insert(key_of(c));

  std::size_t frontier_begin = 0;
  Clause r;
  while (frontier_begin < pool.size()) {
    std::size_t frontier_end = pool.size();
    for (std::size_t i = 0; i < frontier_end; ++i) {
      std::size_t j0 = std::max(frontier_begin, i + 1);
      for (std::size_t j = j0; j < frontier_end; ++j) {
        if (!resolve_pair(pool[i], pool[j], r)) continue;
        if (r.len() == 0) {
          out.hard_unsat = true;
          out.implied.push_back(r);
          return out;
        }
        if (r.len() > max_len) continue;
        if (!known.insert(key_of(r)).second) continue;
        pool.push_back(r);
        out.implied.push_back(r);
        if (r.len() == 1) out.unit_literals.push_back(r.signs[0] < 0 ? -r.vars[0] : r.vars[0]);
      }
    }
    frontier_begin = frontier_end;
  }
  return out;
}

Proposition generate_phi_k(int k) {
  if (k < 3) throw std::invalid_argument("generate_phi_k: k must be >= 3");
  Proposition p;
  p.n = k;
  auto add = [&](std::initializer_list<int> lits) {
    Clause c;
    make_clause(std::vector<int>(lits), 1.0, false, c);
    p.clauses.push_back(std::move(c));
  };
  add({-1});
  add({1, -2});
  add({2, 3});
  for (int j = 3; j < k; ++j) add({-j, j + 1});
  add({-k});
  finalize_var_map(p);
  return p;
}

Proposition generate_random_ksat(int n, int m, int k, std::uint64_t seed) {
  if (k > n) throw std::invalid_argument("generate_random_ksat: k > n");
  Proposition p;
  p.n = n;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> var(1, n);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<int> lits;
  for (int j = 0; j < m; ++j) {
    lits.clear();
    std::set<int> vs;
    while (static_cast<int>(vs.size()) < k) vs.insert(var(rng));
    for (int v : vs) lits.push_back(coin(rng) ? v : -v);
    Clause c;
    make_clause(lits, 1.0, false, c);
    p.clauses.push_back(std::move(c));
  }
  finalize_var_map(p);
  return p;
}

Proposition generate_random_wpms(int n, int m_soft, int m_hard, int k,
                                 int max_weight, std::uint64_t seed) {
  Proposition p = generate_random_ksat(n, m_soft + m_hard, k, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> w(1, max_weight);
  for (int j = 0; j < m_soft; ++j) p.clauses[j].weight = w(rng);
  for (int j = m_soft; j < m_soft + m_hard; ++j) {
    p.clauses[j].hard = true;
    p.clauses[j].weight = 1.0;
  }
  p.weighted = max_weight > 1;
  p.has_hard = m_hard > 0;
  return p;
}

}  // namespace sosmax
