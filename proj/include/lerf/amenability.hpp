#pragma once

// Folner sets with exact ratios, a verified search for them, and the
// free-product surgery that produces Folner sets in orbits of G * K.

#include <algorithm>
#include <atomic>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lerf/action.hpp"
#include "lerf/approximation.hpp"

namespace lerf {

struct FolnerCertificate {
  std::vector<Point> f;        // sorted
  std::vector<Element> omega;  // in the order given
  Rational epsilon;
  std::vector<Rational> ratios;  // |gF delta F| / |F| for g in omega

  Rational worst() const {
    Rational w(0);
    for (const Rational& r : ratios) w = std::max(w, r);
    return w;
  }
};

inline std::vector<Point> normalize_set(std::span<const Point> points) {
  std::vector<Point> out(points.begin(), points.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// |gF delta F| = 2 |{f in F : gf not in F}| since g is a bijection.
inline std::vector<Rational> folner_ratios(const ActionExpr& act, std::span<const Point> f, std::span<const Element> omega) {
  const std::vector<Point> set = normalize_set(f);
  if (set.empty()) throw std::invalid_argument("Folner sets are nonempty");
  const std::unordered_set<Point> member(set.begin(), set.end());
  std::vector<Rational> out;
  for (const Element& g : omega) {
    std::int64_t escaped = 0;
    for (Point p : set)
      if (!member.count(act.evaluate(g, p))) ++escaped;
    out.emplace_back(2 * escaped, static_cast<std::int64_t>(set.size()));
  }
  return out;
}

inline Outcome<FolnerCertificate> folner_check(const ActionExpr& act, std::span<const Point> f, std::span<const Element> omega,
                                               const Rational& epsilon) {
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  FolnerCertificate cert{normalize_set(f), {omega.begin(), omega.end()}, epsilon, {}};
  cert.ratios = folner_ratios(act, cert.f, omega);
  for (std::size_t i = 0; i < omega.size(); ++i)
    if (cert.ratios[i] >= epsilon)
      return Refusal{"not-folner", "ratio " + to_string(cert.ratios[i]) + " for " + to_string(act.group(), omega[i]) +
                                       " is not below " + to_string(epsilon)};
  return cert;
}

struct FolnerSearchOptions {
  std::vector<Point> seed;   // every candidate is enlarged to contain it
  std::size_t min_size = 1;  // smaller candidates are skipped
};

namespace detail {

class FolnerSearch {
 public:
  FolnerSearch(const ActionExpr& act, std::span<const Element> omega, const Rational& eps, std::size_t budget,
               const FolnerSearchOptions& opts)
      : act_(act), omega_(omega.begin(), omega.end()), eps_(eps), budget_(budget), opts_(opts) {}

  /// True when the candidate (enlarged by the seed) is a certificate.
  /// Candidates whose images leave the point coding are rejected.
  bool offer(std::vector<Point> candidate) {
    candidate.insert(candidate.end(), opts_.seed.begin(), opts_.seed.end());
    candidate = normalize_set(candidate);
    if (candidate.size() < opts_.min_size || candidate.size() > budget_) return false;
    ++tried_;
    std::vector<Rational> ratios;
    try {
      ratios = folner_ratios(act_, candidate, omega_);
    } catch (const encoding_error&) {
      return false;  // the candidate's boundary leaves the 64-bit coding
    }
    Rational worst(0);
    for (const Rational& r : ratios) worst = std::max(worst, r);
    if (!best_ || worst < *best_) best_ = worst;
    if (worst < eps_) {
      found_ = FolnerCertificate{std::move(candidate), omega_, eps_, std::move(ratios)};
      return true;
    }
    return false;
  }

  std::optional<FolnerCertificate> found_;
  std::optional<Rational> best_;
  std::size_t tried_ = 0;

  const ActionExpr& act_;
  std::vector<Element> omega_;
  Rational eps_;
  std::size_t budget_;
  const FolnerSearchOptions& opts_;
};

/// Removes, while the worst ratio improves, the point with the most
/// boundary edges (smallest point on ties). Seed points stay.
inline void greedy_shrink(FolnerSearch& search, std::vector<Point> start) {
  std::set<Point> keep(search.opts_.seed.begin(), search.opts_.seed.end());
  std::vector<Element> moves;
  for (const Element& g : search.omega_) {
    moves.push_back(g);
    moves.push_back(invert(search.act_.group(), g));
  }
  std::set<Point> f(start.begin(), start.end());
  auto worst_of = [&](const std::set<Point>& s) {
    std::vector<Point> v(s.begin(), s.end());
    Rational w(0);
    for (const Rational& r : folner_ratios(search.act_, v, search.omega_)) w = std::max(w, r);
    return w;
  };
  Rational current = worst_of(f);
  while (f.size() > std::max<std::size_t>(search.opts_.min_size, 1)) {
    std::optional<Point> victim;
    std::size_t most = 0;
    for (Point p : f) {
      if (keep.count(p)) continue;
      std::size_t boundary = 0;
      for (const Element& g : moves)
        if (!f.count(search.act_.evaluate(g, p))) ++boundary;
      if (!victim || boundary > most) {
        victim = p;
        most = boundary;
      }
    }
    if (!victim || most == 0) return;
    f.erase(*victim);
    const Rational next = worst_of(f);
    if (next >= current) return;
    current = next;
    if (search.offer({f.begin(), f.end()})) return;
  }
}

}  // namespace detail

inline constexpr std::size_t greedy_cap = 512;

/// Candidates, each enlarged by the seed and validated exactly: the orbit
/// if it closes within budget, breadth-first balls around x, towers
/// {g^j h^i x : j < J, i < L} for pairs of generators, and greedy shrinking
/// of balls of size at most 2^k. Every candidate tried at budget b is tried
/// at any larger budget.
inline Outcome<FolnerCertificate> folner_search(const ActionExpr& act, Point x, std::span<const Element> omega,
                                                const Rational& epsilon, std::size_t budget,
                                                const FolnerSearchOptions& opts = {}) {
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  if (budget < 1) throw std::invalid_argument("search budget must be positive");
  detail::FolnerSearch search(act, omega, epsilon, budget, opts);
  auto done = [&]() -> Outcome<FolnerCertificate> { return *search.found_; };

  const Orbit whole = orbit(act, x, budget);
  if (whole.complete && search.offer(whole.points)) return done();

  // Breadth-first balls, cut at sphere boundaries.
  const auto letters = action_letters(act);
  std::vector<Point> order{x};
  std::vector<std::size_t> sphere_ends;
  {
    std::unordered_set<Point> seen{x};
    std::size_t level_begin = 0;
    bool truncated = false;
    while (level_begin < order.size() && !truncated) {
      const std::size_t level_end = order.size();
      for (std::size_t i = level_begin; i < level_end && !truncated; ++i)
        for (Letter l : letters) {
          Point v;
          try {
            v = act.apply_power(std::abs(l), l > 0 ? 1 : -1, order[i]);
          } catch (const encoding_error&) {
            truncated = true;
            break;
          }
          if (!seen.insert(v).second) continue;
          if (order.size() >= budget) {
            truncated = true;
            break;
          }
          order.push_back(v);
        }
      sphere_ends.push_back(level_end);
      level_begin = level_end;
    }
  }
  for (std::size_t end : sphere_ends)
    if (search.offer({order.begin(), order.begin() + static_cast<std::ptrdiff_t>(end)})) return done();

  // Towers.
  for (std::size_t len = 2; len <= budget; len *= 2)
    for (std::size_t height = 2; height <= 24 && height * len <= 2 * budget; ++height)
      for (Letter g : letters)
        for (Letter h : letters) {
          if (std::abs(g) == std::abs(h)) continue;
          std::vector<Point> tower;
          try {
            Point column = x;
            for (std::size_t j = 0; j < height; ++j) {
              Point p = column;
              for (std::size_t i = 0; i < len; ++i) {
                tower.push_back(p);
                p = act.apply_power(std::abs(h), h > 0 ? 1 : -1, p);
              }
              column = act.apply_power(std::abs(g), g > 0 ? 1 : -1, column);
            }
          } catch (const encoding_error&) {
            continue;
          }
          if (search.offer(std::move(tower))) return done();
        }

  // Greedy shrinking of balls.
  for (std::size_t cap = 2; cap <= std::min(budget, greedy_cap); cap *= 2) {
    std::size_t end = 0;
    for (std::size_t e : sphere_ends)
      if (e <= cap) end = e;
    if (end < 2) continue;
    try {
      detail::greedy_shrink(search, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(end)});
    } catch (const encoding_error&) {
      continue;
    }
    if (search.found_) return done();
  }

  return Refusal{"budget", "no (" + to_string(epsilon) + ")-Folner set found among " + std::to_string(search.tried_) +
                               " candidates; best worst-ratio " + (search.best_ ? to_string(*search.best_) : std::string("none"))};
}

// ------------------------------------------------------------ free products

struct Reach {
  Element z;                  // free product word, shortest in syllables within the explored window
  Point y = 0;                // z x, the first point of F met
  std::vector<Point> trace;   // x, then the point after each syllable
};

/// Explores the orbit of x breadth-first until F is met, then finds within
/// the explored window a word with fewest syllables reaching F (a 0-1
/// search where a letter costs one exactly when it starts a new syllable).
/// The trace of the returned word meets F only at y.
inline Outcome<Reach> min_length_reaching(const ActionExpr& amalgam, Point x, std::span<const Point> f, std::size_t budget) {
  const auto* node = std::get_if<action::FreeProductAmalgam>(&amalgam.node().value);
  if (!node) throw std::domain_error("min_length_reaching needs a free product action");
  const MarkedGroup& group = amalgam.group();
  const int lc = *group.left().generator_count();
  const std::unordered_set<Point> target(f.begin(), f.end());
  const auto letters = action_letters(amalgam);
  auto step = [&](Letter l, Point p) { return amalgam.apply_power(std::abs(l), l > 0 ? 1 : -1, p); };

  if (target.count(x)) return Reach{identity(group), x, {x}};

  std::unordered_set<Point> window{x};
  {
    std::vector<Point> queue{x};
    bool hit = false;
    for (std::size_t i = 0; i < queue.size() && !hit; ++i)
      for (Letter l : letters) {
        const Point v = step(l, queue[i]);
        if (!window.insert(v).second) continue;
        if (window.size() > budget)
          return Refusal{"budget", "F not reached from " + std::to_string(x) + " within " + std::to_string(budget) + " points"};
        queue.push_back(v);
        if (target.count(v)) {
          hit = true;
          break;
        }
      }
    if (!hit) return Refusal{"unreachable", "the orbit of " + std::to_string(x) + " is finite and misses F"};
  }

  // States (point, side of the syllable being read); side 2 is the start.
  using StateKey = std::pair<Point, int>;
  struct Back {
    std::size_t cost;
    StateKey parent;
    Letter letter;
  };
  std::map<StateKey, Back> best;
  std::deque<StateKey> dq{{x, 2}};
  best[{x, 2}] = {0, {x, 2}, 0};
  std::optional<StateKey> goal;
  while (!dq.empty()) {
    const StateKey cur = dq.front();
    dq.pop_front();
    const std::size_t cost = best[cur].cost;
    if (cur.second != 2 && target.count(cur.first)) {
      goal = cur;
      break;
    }
    for (Letter l : letters) {
      const Point v = step(l, cur.first);
      if (!window.count(v)) continue;
      const int side = std::abs(l) <= lc ? 0 : 1;
      const std::size_t c = cost + (side == cur.second ? 0 : 1);
      const StateKey nk{v, side};
      auto it = best.find(nk);
      if (it != best.end() && it->second.cost <= c) continue;
      best[nk] = {c, cur, l};
      if (c == cost)
        dq.push_front(nk);
      else
        dq.push_back(nk);
    }
  }
  if (!goal) return Refusal{"unreachable", "F not reached inside the explored window"};

  std::vector<Letter> path;  // applied first to last
  std::vector<Point> points;
  for (StateKey k = *goal; k.second != 2; k = best[k].parent) {
    path.push_back(best[k].letter);
    points.push_back(k.first);
  }
  std::reverse(path.begin(), path.end());
  std::reverse(points.begin(), points.end());
  Reach r{identity(group), points.back(), {x}};
  std::size_t i = 0;
  while (i < path.size()) {
    const bool left = std::abs(path[i]) <= lc;
    std::vector<Letter> word;  // written leftmost-applied-last
    std::size_t j = i;
    for (; j < path.size() && (std::abs(path[j]) <= lc) == left; ++j)
      word.insert(word.begin(), left ? path[j] : (path[j] > 0 ? path[j] - lc : path[j] + lc));
    const Side side = left ? Side::left : Side::right;
    r.z = multiply(group, embed(group, side, from_letters(group.factor(side), word)), r.z);
    r.trace.push_back(points[j - 1]);
    i = j;
  }
  return r;
}

struct CombineResult {
  enum class Case { finite_orbits, infinite_orbit };
  Case which = Case::finite_orbits;
  bool swapped = false;  // the infinite orbit belongs to the G-action
  ActionExpr phi;        // phi', an action of G
  ActionExpr psi;        // psi', an action of K
  FolnerCertificate certificate;

  std::vector<Point> b;
  std::vector<Point> c;
  std::vector<Point> d;
  std::vector<Point> frozen;  // finite-orbit case
  std::optional<Reach> reach;
  FinitePerm xi;
  Point orbit_point = 0;  // a point of the chosen infinite orbit
  std::vector<std::string> checks;
};

namespace detail {

inline void require(bool ok, std::vector<std::string>& log, const std::string& what) {
  if (!ok) throw std::logic_error("free product surgery broke an invariant: " + what);
  log.push_back(what);
}

inline std::vector<Element> embed_all(const MarkedGroup& product, std::span<const Element> s, std::span<const Element> t) {
  std::vector<Element> out;
  for (const Element& g : s) out.push_back(embed(product, Side::left, g));
  for (const Element& k : t) out.push_back(embed(product, Side::right, k));
  return out;
}

inline std::optional<CombineResult> combine_finite(const ActionExpr& sigma, const ActionExpr& tau, Point x,
                                                   const Rational& epsilon, std::span<const Element> s,
                                                   std::span<const Element> t, const std::vector<Point>& a,
                                                   std::size_t budget) {
  std::set<Point> b;
  for (Point p : a) {
    if (b.count(p)) continue;
    const Orbit o = orbit(sigma, p, budget);
    if (!o.complete) return std::nullopt;
    b.insert(o.points.begin(), o.points.end());
  }
  std::set<Point> c;
  for (Point p : b) {
    if (c.count(p)) continue;
    const Orbit o = orbit(tau, p, budget);
    if (!o.complete) return std::nullopt;
    c.insert(o.points.begin(), o.points.end());
  }
  std::set<Point> frozen;
  for (Point p : c) {
    if (b.count(p) || frozen.count(p)) continue;
    const Orbit o = orbit(sigma, p, budget);
    if (!o.complete) return std::nullopt;
    frozen.insert(o.points.begin(), o.points.end());
  }
  CombineResult out;
  out.which = CombineResult::Case::finite_orbits;
  out.phi = frozen.empty() ? sigma : ActionExpr::freeze(sigma, frozen);
  out.psi = tau;
  out.b.assign(b.begin(), b.end());
  out.c.assign(c.begin(), c.end());
  out.frozen.assign(frozen.begin(), frozen.end());
  const ActionExpr joint = ActionExpr::free_product(out.phi, out.psi);
  const Orbit o = orbit(joint, x, budget);
  require(o.complete && std::all_of(o.points.begin(), o.points.end(), [&](Point p) { return c.count(p) > 0; }), out.checks,
          "orbit of x lies in C");
  const auto omega = embed_all(joint.group(), s, t);
  auto cert = folner_check(joint, o.points, omega, epsilon);
  require(cert.ok(), out.checks, "orbit of x is (epsilon, S u T)-Folner");
  out.certificate = *cert;
  return out;
}

}  // namespace detail

/// phi' near sigma on (S, A) and psi' near tau on (T, A) whose free product
/// has an (epsilon, S u T)-Folner set in the orbit of x. Finite orbits are
/// closed off when the probes allow; otherwise an infinite factor orbit met
/// by the explored orbit of x carries the Folner set, preferring tau.
inline Outcome<CombineResult> free_product_combine(const ActionExpr& sigma, const ActionExpr& tau, Point x,
                                                   const Rational& epsilon, std::span<const Element> s,
                                                   std::span<const Element> t, std::span<const Point> a_in,
                                                   std::size_t budget = default_orbit_budget) {
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  std::vector<Point> a = normalize_set(a_in);
  if (!std::binary_search(a.begin(), a.end(), x)) a.insert(std::upper_bound(a.begin(), a.end(), x), x);

  if (auto finite = detail::combine_finite(sigma, tau, x, epsilon, s, t, a, budget)) return *finite;

  const ActionExpr joint = ActionExpr::free_product(sigma, tau);
  const Orbit window = orbit(joint, x, budget);
  std::optional<Point> on_tau, on_sigma;
  for (Point p : window.points) {
    if (!on_tau && certify_orbit(tau, p) == OrbitSize::infinite) on_tau = p;
    if (!on_sigma && certify_orbit(sigma, p) == OrbitSize::infinite) on_sigma = p;
  }
  if (!on_tau && !on_sigma)
    return Refusal{"case-undecided", "factor orbits near " + std::to_string(x) +
                                         " exceed the budget but none is certified infinite"};

  CombineResult out;
  out.which = CombineResult::Case::infinite_orbit;
  out.swapped = !on_tau;
  out.orbit_point = on_tau ? *on_tau : *on_sigma;
  const Side con_side = out.swapped ? Side::right : Side::left;
  const ActionExpr& con = out.swapped ? tau : sigma;  // conjugated by xi
  const ActionExpr& inf = out.swapped ? sigma : tau;  // carries F
  const std::span<const Element> s_con = out.swapped ? t : s;
  const std::span<const Element> s_inf = out.swapped ? s : t;

  std::set<Point> b(a.begin(), a.end());
  for (const Element& g : s_con)
    for (Point p : a) b.insert(con.evaluate(g, p));
  out.b.assign(b.begin(), b.end());
  const Rational bound = Rational(2 * static_cast<std::int64_t>(b.size() + 1)) / epsilon;
  FolnerSearchOptions opts;
  opts.min_size = static_cast<std::size_t>(boost::rational_cast<std::int64_t>(bound) + 1);
  auto found = folner_search(inf, out.orbit_point, s_inf, epsilon, budget, opts);
  if (!found) return found.refusal();
  const std::vector<Point>& f = found->f;

  auto reach = min_length_reaching(joint, x, f, budget);
  if (!reach) return reach.refusal();
  out.reach = *reach;
  const Point y = reach->y;
  const std::set<Point> trace(reach->trace.begin(), reach->trace.end());

  std::vector<Element> keep_elems(s_con.begin(), s_con.end());
  for (const Syllable& syl : reach->z.product().syllables)
    if (syl.side == con_side) keep_elems.push_back(syl.value);
  std::vector<Point> keep_points(a);
  keep_points.insert(keep_points.end(), trace.begin(), trace.end());
  keep_points.insert(keep_points.end(), f.begin(), f.end());
  for (Point p : f)
    if (!b.count(p) && p != y) out.d.push_back(p);
  const AugmentedAction aug = augment_fixed_points(con, keep_elems, normalize_set(keep_points), out.d.size());
  out.c = aug.fixed_points;

  std::map<Point, Point> swap;
  for (std::size_t i = 0; i < out.c.size(); ++i) {
    swap[out.c[i]] = out.d[i];
    swap[out.d[i]] = out.c[i];
  }
  out.xi = FinitePerm::from_map(swap);
  const ActionExpr con_prime = ActionExpr::conjugate(aug.action, PinnedBijection::from(out.xi));
  out.phi = out.swapped ? sigma : con_prime;
  out.psi = out.swapped ? con_prime : tau;
  const ActionExpr result = ActionExpr::free_product(out.phi, out.psi);

  auto& log = out.checks;
  detail::require(std::none_of(out.c.begin(), out.c.end(),
                               [&](Point p) { return b.count(p) || trace.count(p) || std::binary_search(f.begin(), f.end(), p); }),
                  log, "C is disjoint from B, F and the trace");
  detail::require(std::all_of(swap.begin(), swap.end(), [&](auto kv) { return out.xi.apply(out.xi.apply(kv.first)) == kv.first; }),
                  log, "xi is an involution");
  detail::require(std::all_of(b.begin(), b.end(), [&](Point p) { return out.xi.apply(p) == p; }), log, "xi fixes B");
  detail::require(std::all_of(trace.begin(), trace.end(), [&](Point p) { return out.xi.apply(p) == p; }), log,
                  "xi fixes the trace");
  {
    std::vector<Point> expect;
    for (Point p : f)
      if (!b.count(p) && p != y) expect.push_back(p);
    detail::require(expect == out.d, log, "D = F minus (B u {y})");
  }
  detail::require(std::binary_search(f.begin(), f.end(), y) && result.evaluate(reach->z, x) == y, log,
                  "(phi' * psi')(z) x = y in F");
  detail::require(Rational(static_cast<std::int64_t>(f.size())) > bound, log, "|F| > 2(|B|+1)/epsilon");
  for (const Element& g : s)
    for (Point p : a) detail::require(out.phi.evaluate(g, p) == sigma.evaluate(g, p), log, "phi' agrees with sigma on (S, A)");
  for (const Element& k : t)
    for (Point p : a) detail::require(out.psi.evaluate(k, p) == tau.evaluate(k, p), log, "psi' agrees with tau on (T, A)");
  log.erase(std::unique(log.begin(), log.end()), log.end());

  const auto omega = detail::embed_all(result.group(), s, t);
  auto cert = folner_check(result, f, omega, epsilon);
  detail::require(cert.ok(), log, "F is (epsilon, S u T)-Folner for phi' * psi'");
  out.certificate = *cert;
  return out;
}

// ------------------------------------------------------------ BS(1,n) check

struct BSWitnessReport {
  int n = 2;
  int d_max = 1;
  std::vector<std::uint64_t> homomorphisms;  // per degree 1..d_max
  std::uint64_t total = 0;
  std::uint64_t counterexamples = 0;
  bool orders_coprime_to_n = true;  // ord(pi_s) prime to n in every homomorphism
};

struct BSDegreeCount {
  std::uint64_t homomorphisms = 0;
  std::uint64_t counterexamples = 0;
  bool orders_coprime_to_n = true;
};

/// Every pair (pi_s, pi_t) in S_d with pi_t^{-1} pi_s pi_t = pi_s^n, checked
/// for pi_s in <pi_s^n>.
inline BSDegreeCount bs_witness_degree(int n, int d) {
  using Perm = std::vector<int>;
  auto compose = [](const Perm& p, const Perm& q) {  // p after q
    Perm r(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) r[i] = p[q[i]];
    return r;
  };
  std::vector<Perm> all;
  Perm p(d);
  std::iota(p.begin(), p.end(), 0);
  do all.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  std::vector<Perm> inverses;
  for (const Perm& q : all) {
    Perm inv(d);
    for (int i = 0; i < d; ++i) inv[q[i]] = i;
    inverses.push_back(inv);
  }
  const Perm id = all.front();
  BSDegreeCount out;
  for (const Perm& ps : all) {
    Perm psn = id;
    for (int i = 0; i < n; ++i) psn = compose(ps, psn);
    bool inside = false;
    for (Perm q = psn;; q = compose(psn, q)) {
      if (q == ps) inside = true;
      if (q == id) break;
    }
    std::uint64_t order = 1;
    for (Perm q = ps; q != id; q = compose(ps, q)) ++order;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (compose(inverses[i], compose(ps, all[i])) != psn) continue;
      ++out.homomorphisms;
      if (!inside) ++out.counterexamples;
      if (std::gcd(order, static_cast<std::uint64_t>(n)) != 1) out.orders_coprime_to_n = false;
    }
  }
  return out;
}

/// All homomorphisms BS(1,n) -> S_d for d <= d_max. Degrees are independent
/// and may run on `jobs` threads; the report does not depend on `jobs`.
inline BSWitnessReport bs_nonseparability_witness(int n, int d_max, int jobs = 1) {
  if (n < 2) throw std::domain_error("n must be at least 2");
  if (d_max < 1 || d_max > 7) throw std::domain_error("d_max must lie in 1..7");
  std::vector<BSDegreeCount> counts(d_max);
  std::atomic<int> next{1};
  auto worker = [&] {
    for (int d = next++; d <= d_max; d = next++) counts[d - 1] = bs_witness_degree(n, d);
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < std::max(1, jobs); ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  BSWitnessReport rep;
  rep.n = n;
  rep.d_max = d_max;
  for (const BSDegreeCount& c : counts) {
    rep.homomorphisms.push_back(c.homomorphisms);
    rep.total += c.homomorphisms;
    rep.counterexamples += c.counterexamples;
    rep.orders_coprime_to_n = rep.orders_coprime_to_n && c.orders_coprime_to_n;
  }
  return rep;
}

}  // namespace lerf
