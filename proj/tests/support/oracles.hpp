#pragma once

// Slow, independent reimplementations used to check the library.

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include <boost/rational.hpp>

#include "lerf/lerf.hpp"

namespace oracle {

using lerf::Letter;
using lerf::Point;
using Q = lerf::Rational;

/// Cancels adjacent inverse pairs by repeated rescanning.
inline std::vector<Letter> reduce(std::vector<Letter> w) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
      if (w[i] == -w[i + 1]) {
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        changed = true;
        break;
      }
  }
  return w;
}

/// x -> scale * x + shift, the faithful affine image of BS(1,n).
struct Affine {
  Q scale{1};
  Q shift{0};
  friend bool operator==(const Affine&, const Affine&) = default;
};

inline Affine compose(const Affine& f, const Affine& g) {  // f after g
  return {f.scale * g.scale, f.scale * g.shift + f.shift};
}

/// s : x -> x + 1, t : x -> x / n.
inline Affine affine_letter(int n, Letter l) {
  if (l == 1) return {1, 1};
  if (l == -1) return {1, -1};
  if (l == 2) return {Q(1, n), 0};
  return {Q(n), 0};
}

/// The map of a word; its rightmost letter acts first.
inline Affine affine_word(int n, const std::vector<Letter>& w) {
  Affine out;
  for (Letter l : w) out = compose(out, affine_letter(n, l));
  return out;
}

inline Affine affine_bs(int n, const lerf::BSWord& w) {
  std::vector<Letter> letters;
  for (std::int64_t i = 0; i < w.p; ++i) letters.push_back(2);
  for (std::int64_t i = 0; i < (w.m < 0 ? -w.m : w.m); ++i) letters.push_back(w.m < 0 ? -1 : 1);
  for (std::int64_t i = 0; i < w.q; ++i) letters.push_back(-2);
  return affine_word(n, letters);
}

inline Q nadic_value(std::int64_t n, Point p) {
  const lerf::NAdic v = lerf::decode_nadic(n, p);
  std::int64_t den = 1;
  for (std::int64_t i = 0; i < v.exponent; ++i) den *= n;
  return Q(v.numerator, den);
}

inline Q apply(const Affine& f, const Q& x) { return f.scale * x + f.shift; }

// ------------------------------------------------------------- free groups

using Perms = std::vector<std::vector<int>>;  // one permutation per generator

inline int act_word(const Perms& perms, const std::vector<Letter>& w, int u) {
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    const auto& p = perms[std::abs(*it) - 1];
    if (*it > 0) {
      u = p[u];
    } else {
      u = static_cast<int>(std::find(p.begin(), p.end(), u) - p.begin());
    }
  }
  return u;
}

/// Membership of g in <gens> by enumerating products of at most `depth`
/// generators, and non-membership by a permutation representation of
/// degree at most `degree` fixing a point under gens but not under g.
/// Returns nullopt when neither search decides.
inline std::optional<bool> member(int rank, const std::vector<std::vector<Letter>>& gens, const std::vector<Letter>& g,
                                  int depth = 4, int degree = 4) {
  const auto target = reduce(g);
  if (target.empty()) return true;
  std::set<std::vector<Letter>> layer{{}};
  std::set<std::vector<Letter>> seen{{}};
  std::vector<std::vector<Letter>> steps;
  for (const auto& h : gens) {
    steps.push_back(reduce(h));
    std::vector<Letter> inv(h.rbegin(), h.rend());
    for (Letter& l : inv) l = -l;
    steps.push_back(reduce(inv));
  }
  for (int d = 0; d < depth; ++d) {
    std::set<std::vector<Letter>> next;
    for (const auto& w : layer)
      for (const auto& s : steps) {
        std::vector<Letter> cat(w);
        cat.insert(cat.end(), s.begin(), s.end());
        auto r = reduce(cat);
        if (r == target) return true;
        if (seen.insert(r).second) next.insert(r);
      }
    layer = std::move(next);
  }
  for (int d = 2; d <= degree; ++d) {
    std::vector<int> base(d);
    for (int i = 0; i < d; ++i) base[i] = i;
    std::vector<std::vector<int>> all;
    do all.push_back(base);
    while (std::next_permutation(base.begin(), base.end()));
    std::vector<std::size_t> idx(rank, 0);
    while (true) {
      Perms perms;
      for (int i = 0; i < rank; ++i) perms.push_back(all[idx[i]]);
      for (int u = 0; u < d; ++u) {
        bool fixes = true;
        for (const auto& h : gens)
          if (act_word(perms, h, u) != u) {
            fixes = false;
            break;
          }
        if (fixes && act_word(perms, g, u) != u) return false;
      }
      int i = 0;
      while (i < rank && ++idx[i] == all.size()) idx[i++] = 0;
      if (i == rank) break;
    }
  }
  return std::nullopt;
}

/// All cosets of a coset table reachable from 0 by explicit BFS.
inline bool transitive(const lerf::CosetTable& t) {
  std::set<lerf::State> seen{0};
  std::queue<lerf::State> q;
  q.push(0);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (int g = 1; g <= t.rank(); ++g)
      for (Letter l : {g, -g}) {
        const auto v = t.follow(u, l);
        if (seen.insert(v).second) q.push(v);
      }
  }
  return seen.size() == t.degree();
}

// ------------------------------------------------------------------ actions

/// Closure of {x} under the generators and their inverses, evaluated as
/// group elements, with sets only.
inline std::optional<std::set<Point>> orbit(const lerf::ActionExpr& act, Point x, std::size_t limit) {
  const auto& g = act.group();
  std::vector<lerf::Element> steps;
  for (int i = 1; i <= act.active_generators(); ++i) {
    steps.push_back(lerf::generator(g, i, 1));
    steps.push_back(lerf::generator(g, i, -1));
  }
  std::set<Point> seen{x};
  std::vector<Point> stack{x};
  while (!stack.empty()) {
    const Point u = stack.back();
    stack.pop_back();
    for (const auto& s : steps) {
      const Point v = act.evaluate(s, u);
      if (seen.insert(v).second) {
        if (seen.size() > limit) return std::nullopt;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

/// |g F delta F| / |F| by explicit set arithmetic.
inline lerf::Rational folner_ratio(const lerf::ActionExpr& act, const std::vector<Point>& f, const lerf::Element& g) {
  const std::set<Point> set(f.begin(), f.end());
  std::set<Point> image;
  for (Point p : set) image.insert(act.evaluate(g, p));
  std::vector<Point> diff;
  std::set_symmetric_difference(set.begin(), set.end(), image.begin(), image.end(), std::back_inserter(diff));
  return lerf::Rational(static_cast<std::int64_t>(diff.size()), static_cast<std::int64_t>(set.size()));
}

}  // namespace oracle
