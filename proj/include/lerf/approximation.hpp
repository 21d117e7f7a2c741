#pragma once

// Approximating actions inside basic open sets O(phi, S, A): adding fixed
// points, finitely supported approximations of free group actions, and the
// finite-orbit approximation built from a finite-index subgroup.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lerf/action.hpp"
#include "lerf/chabauty.hpp"

namespace lerf {

inline constexpr std::size_t default_orbit_budget = 10000;

/// Values of a permutation (and optionally its inverse) on a finite window.
struct PermWindow {
  std::map<Point, Point> values;
  std::map<Point, Point> inverse_values;

  static PermWindow of(const ActionExpr& act, int generator, std::span<const Point> window) {
    PermWindow w;
    for (Point a : window) {
      w.values[a] = act.apply_power(generator, 1, a);
      w.inverse_values[a] = act.apply_power(generator, -1, a);
    }
    return w;
  }

  /// All forced pairs a -> sigma(a); throws when they are not injective.
  std::map<Point, Point> requirements() const {
    std::map<Point, Point> req(values);
    for (auto [a, b] : inverse_values) {
      auto [it, fresh] = req.emplace(b, a);
      if (!fresh && it->second != a)
        throw std::domain_error("window is inconsistent at " + std::to_string(b) + ": sends it to " +
                                std::to_string(it->second) + " and to " + std::to_string(a));
    }
    std::map<Point, Point> seen;
    for (auto [a, b] : req) {
      auto [it, fresh] = seen.emplace(b, a);
      if (!fresh)
        throw std::domain_error("window is not injective: " + std::to_string(it->second) + " and " +
                                std::to_string(a) + " both go to " + std::to_string(b));
    }
    return req;
  }
};

/// Agrees with the window; the points of sigma(D) outside D are sent onto
/// D outside sigma(D) in increasing order, everything else is fixed.
inline FinitePerm finite_support_approx(const PermWindow& window) {
  std::map<Point, Point> req = window.requirements();
  std::set<Point> domain, image;
  for (auto [a, b] : req) {
    domain.insert(a);
    image.insert(b);
  }
  std::vector<Point> spill, holes;
  std::set_difference(image.begin(), image.end(), domain.begin(), domain.end(), std::back_inserter(spill));
  std::set_difference(domain.begin(), domain.end(), image.begin(), image.end(), std::back_inserter(holes));
  for (std::size_t i = 0; i < spill.size(); ++i) req[spill[i]] = holes[i];
  return FinitePerm::from_map(req);
}

inline std::vector<FinitePerm> finite_support_approx(std::span<const PermWindow> windows) {
  std::vector<FinitePerm> out;
  for (const PermWindow& w : windows) out.push_back(finite_support_approx(w));
  return out;
}

/// The free group action whose generators are the finitely supported
/// approximations of the windows, plus one more generator sending x to y.
inline ActionExpr transitive_extension(std::span<const PermWindow> windows, Point x, Point y, bool infinite_rank = false) {
  std::vector<FinitePerm> perms = finite_support_approx(windows);
  PermWindow extra;
  extra.values[x] = y;
  perms.push_back(finite_support_approx(extra));
  const int r = static_cast<int>(perms.size());
  return ActionExpr::fin_supp(infinite_rank ? MarkedGroup::free_infinite() : MarkedGroup::free(r), std::move(perms));
}

/// Gives a finitely supported action one more generator, sending x to y.
/// Generators between the active ones and `index` act trivially.
inline ActionExpr transitive_extension(const ActionExpr& phi, int index, Point x, Point y) {
  const auto* fs = std::get_if<action::FinSupp>(&phi.node().value);
  if (!fs) throw std::domain_error("transitive_extension extends finitely supported actions");
  if (index <= static_cast<int>(fs->perms.size()))
    throw std::domain_error("generator x_" + std::to_string(index) + " already acts");
  std::vector<FinitePerm> perms = fs->perms;
  perms.resize(index - 1);
  PermWindow extra;
  extra.values[x] = y;
  perms.push_back(finite_support_approx(extra));
  return ActionExpr::fin_supp(phi.group(), std::move(perms));
}

struct AugmentedAction {
  ActionExpr action;
  std::vector<Point> fixed_points;  // the first fixed points of the added copy of N
};

/// (sigma, 1) conjugated back to X by a bijection that is the identity on
/// Y and S Y (up to the even coding), so the result stays in O(sigma, S, Y).
inline AugmentedAction augment_fixed_points(const ActionExpr& sigma, std::span<const Element> s, std::span<const Point> y,
                                            std::size_t m) {
  std::set<Point> keep(y.begin(), y.end());
  for (const Element& g : s)
    for (Point p : y) keep.insert(sigma.evaluate(g, p));
  std::map<Point, Point> pins;
  for (Point z : keep) pins[z] = detail::checked_double(z);
  PinnedBijection xi(pins);
  AugmentedAction out{ActionExpr::conjugate(ActionExpr::augment(sigma), xi), {}};
  for (Point j = 0; j < m; ++j) out.fixed_points.push_back(xi.apply_inverse(2 * j + 1));
  return out;
}

// ------------------------------------------------- finite-orbit approximation

/// The windows used when approximating tau on the orbit of x.
struct OrbitWindows {
  Point base = 0;
  std::vector<Element> omega;        // shortest words from base to the points of A in its orbit
  std::vector<Element> omega_tilde;  // {1} with Omega, S Omega and their inverses
  std::vector<Element> product;      // omega_tilde * omega_tilde
};

inline OrbitWindows orbit_windows(const ActionExpr& tau, Point x, const SchreierWindow& sw, std::span<const Point> a,
                                  std::span<const Element> s) {
  const MarkedGroup& g = tau.group();
  OrbitWindows w;
  w.base = x;
  std::vector<Element> omega{identity(g)};
  for (Point p : a)
    if (sw.words.count(p)) omega.push_back(sw.element(g, p));
  w.omega = canonical(omega);
  std::vector<Element> tilde(w.omega);
  for (const Element& o : w.omega)
    for (const Element& e : s) tilde.push_back(multiply(g, e, o));
  const std::size_t n = tilde.size();
  for (std::size_t i = 0; i < n; ++i) tilde.push_back(invert(g, tilde[i]));
  w.omega_tilde = canonical(tilde);
  w.product = window_product(g, w.omega_tilde, w.omega_tilde);
  return w;
}

/// Throws unless K cap W = G_x(tau) cap W on the product window.
inline void check_window_condition(const ActionExpr& tau, Point x, const CosetTable& k, std::span<const Element> window) {
  for (const Element& w : window) {
    const bool in_k = k.stabilizes(w.free());
    const bool fixes = tau.evaluate(w, x) == x;
    if (in_k != fixes)
      throw precondition_error(std::string("window condition fails: element ") + (in_k ? "lies in K but moves x" : "fixes x but is not in K"),
                               to_string(tau.group(), w));
  }
}

struct OrbitPiece {
  OrbitWindows windows;
  CosetTable k;
  std::vector<Point> embedding;  // state -> point, the injective extension of gK -> tau(g)x
};

namespace detail {

/// f(wK) = tau(w)x on the cosets met by the window; throws if not well defined.
inline std::vector<std::optional<Point>> coset_map(const ActionExpr& tau, const OrbitWindows& windows, const CosetTable& k) {
  std::vector<std::optional<Point>> f(k.degree());
  for (const Element& w : windows.omega_tilde) {
    const State st = k.act(w.free(), 0);
    const Point p = tau.evaluate(w, windows.base);
    if (f[st] && *f[st] != p) throw precondition_error("coset map is not well defined", to_string(tau.group(), w));
    f[st] = p;
  }
  return f;
}

/// Extends f injectively, sending the remaining cosets to the smallest
/// unoccupied points.
inline std::vector<Point> extend_coset_map(const std::vector<std::optional<Point>>& f, std::set<Point>& occupied) {
  std::vector<Point> embedding(f.size());
  Point next = 0;
  for (State st = 0; st < f.size(); ++st) {
    if (f[st]) {
      embedding[st] = *f[st];
      continue;
    }
    while (occupied.count(next)) ++next;
    embedding[st] = next;
    occupied.insert(next);
  }
  return embedding;
}

inline void reserve(const std::vector<std::optional<Point>>& f, std::set<Point>& occupied) {
  for (const auto& p : f)
    if (p && !occupied.insert(*p).second) throw precondition_error("coset images overlap", std::to_string(*p));
}

inline void require_free(const ActionExpr& tau) {
  if (tau.group().kind() != MarkedGroup::Kind::free)
    throw std::domain_error("finite-orbit approximation needs an action of F_n, got " + tau.group().name());
}

}  // namespace detail

struct FiniteOrbitApproximation {
  ActionExpr action;
  std::vector<OrbitPiece> pieces;  // orbits of tau rebuilt from coset tables
  std::vector<Point> kept;         // points of A whose finite tau-orbit is kept verbatim
};

/// sigma in O(tau, S, A) acting on f(G/K) through K, with x sent to the
/// coset K, and fixing every other point. K must satisfy the window
/// condition on the product window; A must lie in the tau-orbit of x.
inline FiniteOrbitApproximation finite_orbit_approximation(const ActionExpr& tau, Point x, std::span<const Element> s,
                                                           std::span<const Point> a, const CosetTable& k,
                                                           std::size_t budget = default_orbit_budget) {
  detail::require_free(tau);
  std::set<Point> targets(a.begin(), a.end());
  targets.insert(x);
  const SchreierWindow sw = schreier_window(tau, x, budget, targets);
  for (Point p : targets)
    if (!sw.words.count(p))
      throw precondition_error("point of A not reached from x within budget", std::to_string(p));
  OrbitWindows windows = orbit_windows(tau, x, sw, std::vector<Point>(targets.begin(), targets.end()), s);
  check_window_condition(tau, x, k, windows.product);
  const auto f = detail::coset_map(tau, windows, k);
  std::set<Point> occupied;
  detail::reserve(f, occupied);
  FiniteOrbitApproximation out;
  out.pieces.push_back(OrbitPiece{std::move(windows), k, detail::extend_coset_map(f, occupied)});
  out.action = ActionExpr::coset(tau.group().rank(), {{out.pieces.back().k, out.pieces.back().embedding}});
  return out;
}

/// The full construction: every orbit of tau meeting A u {x} is handled on
/// its own. Finite orbits closed within budget are kept; the others are
/// replaced by coset actions with K from approx_by_finite_index.
inline Outcome<FiniteOrbitApproximation> approximate_finite_orbits(const ActionExpr& tau, Point x, std::span<const Element> s,
                                                                   std::span<const Point> a,
                                                                   std::size_t budget = default_orbit_budget) {
  detail::require_free(tau);
  std::vector<Point> order{x};
  for (Point p : std::set<Point>(a.begin(), a.end()))
    if (p != x) order.push_back(p);
  std::set<Point> assigned;
  std::vector<ActionExpr::CosetBlock> blocks;
  FiniteOrbitApproximation out;
  std::vector<std::pair<Point, SchreierWindow>> open;
  for (Point p : order) {
    if (assigned.count(p)) continue;
    std::set<Point> targets;
    for (Point q : order)
      if (!assigned.count(q) && q != p) targets.insert(q);
    assigned.insert(p);
    auto table = orbit_table(tau, p, budget);
    if (table) {
      const std::set<Point> members(table->second.begin(), table->second.end());
      for (Point q : order)
        if (members.count(q)) {
          assigned.insert(q);
          out.kept.push_back(q);
        }
      blocks.push_back({table->first, table->second});
    } else {
      SchreierWindow sw = schreier_window(tau, p, budget, targets);
      for (Point q : targets)
        if (sw.words.count(q)) assigned.insert(q);
      open.emplace_back(p, std::move(sw));
    }
  }
  std::set<Point> occupied;
  for (const auto& b : blocks) occupied.insert(b.embedding.begin(), b.embedding.end());
  std::vector<std::vector<std::optional<Point>>> maps;
  for (auto& [p, sw] : open) {
    std::vector<Point> members;
    for (Point q : order)
      if (sw.words.count(q)) members.push_back(q);
    OrbitWindows windows = orbit_windows(tau, p, sw, members, s);
    std::vector<Element> stab = stabilizer_window(tau, p, windows.product);
    SubgroupGraph l = graph_from_generators(tau.group(), stab);
    CosetTable k = approx_by_finite_index(l, windows.product);
    try {
      maps.push_back(detail::coset_map(tau, windows, k));
      detail::reserve(maps.back(), occupied);
    } catch (const precondition_error& e) {
      return Refusal{"orbit-overlap", std::string(e.what()) + ": " + e.witness()};
    }
    out.pieces.push_back(OrbitPiece{std::move(windows), std::move(k), {}});
  }
  for (std::size_t i = 0; i < out.pieces.size(); ++i) {
    out.pieces[i].embedding = detail::extend_coset_map(maps[i], occupied);
    blocks.push_back({out.pieces[i].k, out.pieces[i].embedding});
  }
  out.action = ActionExpr::coset(tau.group().rank(), std::move(blocks));
  return out;
}

}  // namespace lerf
