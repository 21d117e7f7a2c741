#pragma once

// Finite stages of Baire-category arguments. A provider pushes an action
// into a dense open set while staying inside a given basic open set; a
// fusion run threads a schedule of providers through nested constraints.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lerf/amenability.hpp"
#include "lerf/approximation.hpp"

namespace lerf {

/// What a provider established, checkable against any later action.
struct Witness {
  enum class Kind { finite_orbit, transitivity, folner };
  Kind kind = Kind::finite_orbit;
  Point x = 0;
  Point y = 0;
  std::vector<Element> subgroup;  // finite_orbit: generators of H
  std::vector<Point> orbit;       // finite_orbit: the <H>-orbit of x, sorted
  std::optional<Element> word;    // transitivity: word x = y
  std::optional<FolnerCertificate> certificate;
  std::vector<std::pair<Point, Element>> reach;  // folner: f = g_f x for f in F
};

inline bool verify_witness(const Witness& w, const ActionExpr& act, std::size_t budget = default_orbit_budget) {
  switch (w.kind) {
    case Witness::Kind::finite_orbit: {
      const Orbit o = orbit_under(act, w.subgroup, w.x, budget);
      return o.complete && normalize_set(o.points) == w.orbit;
    }
    case Witness::Kind::transitivity: return w.word && act.evaluate(*w.word, w.x) == w.y;
    case Witness::Kind::folner: {
      if (!w.certificate) return false;
      const auto& c = *w.certificate;
      auto again = folner_check(act, c.f, c.omega, c.epsilon);
      if (!again || again->ratios != c.ratios) return false;
      for (const auto& [f, g] : w.reach)
        if (act.evaluate(g, w.x) != f) return false;
      return w.reach.size() == c.f.size();
    }
  }
  return false;
}

struct Refinement {
  ActionExpr action;
  ActionConstraint constraint;
  Witness witness;
};

struct DensityProvider {
  std::string name;
  std::function<Outcome<Refinement>(const ActionConstraint&)> refine;
};

namespace detail {

inline ActionConstraint strengthen(const ActionExpr& act, const ActionConstraint& c, std::span<const Element> elements,
                                   std::span<const Point> points) {
  ActionConstraint out{act, c.elements, c.points};
  out.elements.insert(out.elements.end(), elements.begin(), elements.end());
  out.elements = canonical(std::move(out.elements));
  out.points.insert(out.points.end(), points.begin(), points.end());
  out.points = normalize_set(out.points);
  return out;
}

inline std::string describe(const MarkedGroup& g, std::span<const Element> elems) {
  std::string out;
  for (const Element& e : elems) out += (out.empty() ? "" : ",") + to_string(g, e);
  return out;
}

}  // namespace detail

/// Forces the <H>-orbit of x to be finite.
inline DensityProvider provider_finite_orbit(std::vector<Element> h, Point x, std::size_t budget = default_orbit_budget) {
  DensityProvider p;
  p.name = "finite_orbit(x=" + std::to_string(x) + ")";
  p.refine = [h = std::move(h), x, budget](const ActionConstraint& c) -> Outcome<Refinement> {
    ActionExpr act = c.base;
    Orbit o = orbit_under(act, h, x, budget);
    if (!o.complete) {
      std::vector<Point> a(c.points);
      a.push_back(x);
      auto approx = approximate_finite_orbits(c.base, x, c.elements, a, budget);
      if (!approx) return approx.refusal();
      act = approx->action;
      o = orbit_under(act, h, x, budget);
      if (!o.complete) return Refusal{"budget", "approximated orbit of " + std::to_string(x) + " exceeds the budget"};
    }
    Witness w;
    w.kind = Witness::Kind::finite_orbit;
    w.x = x;
    w.subgroup = h;
    w.orbit = normalize_set(o.points);
    ActionConstraint next = detail::strengthen(act, c, h, w.orbit);
    return Refinement{act, std::move(next), std::move(w)};
  };
  return p;
}

/// Forces y into the orbit of x, for finitely supported actions of F_infinity.
inline DensityProvider provider_transitivity(Point x, Point y, std::size_t budget = default_orbit_budget) {
  DensityProvider p;
  p.name = "transitivity(" + std::to_string(x) + "," + std::to_string(y) + ")";
  p.refine = [x, y, budget](const ActionConstraint& c) -> Outcome<Refinement> {
    if (c.base.group().kind() != MarkedGroup::Kind::free_infinite)
      throw std::domain_error("transitivity provider acts in F_infinity");
    ActionExpr act = c.base;
    Witness w;
    w.kind = Witness::Kind::transitivity;
    w.x = x;
    w.y = y;
    const SchreierWindow sw = schreier_window(act, x, budget, {y});
    if (sw.words.count(y)) {
      w.word = sw.element(act.group(), y);
    } else {
      int index = act.active_generators();
      for (const Element& e : c.elements)
        for (Letter l : e.free().letters) index = std::max(index, std::abs(l));
      ++index;
      act = transitive_extension(act, index, x, y);
      w.word = generator(act.group(), index);
    }
    ActionConstraint next = detail::strengthen(act, c, std::vector<Element>{*w.word}, std::vector<Point>{x});
    return Refinement{act, std::move(next), std::move(w)};
  };
  return p;
}

namespace detail {

inline bool factor_amenable(const MarkedGroup& g) {
  if (g.kind() == MarkedGroup::Kind::baumslag_solitar) return true;
  return g.kind() == MarkedGroup::Kind::free && g.rank() <= 1;
}

/// An action of the factor near `base` on (s, a) that is amenable on every
/// orbit: the action itself for amenable factors, a finite-orbit
/// approximation for free factors of rank at least 2.
inline Outcome<ActionExpr> amenable_on_orbits(const ActionExpr& base, std::span<const Element> s, std::span<const Point> a,
                                              Point x, std::size_t budget) {
  if (factor_amenable(base.group())) return base;
  if (base.group().kind() != MarkedGroup::Kind::free)
    throw std::domain_error("no amenable-on-orbits approximation for " + base.group().name());
  auto approx = approximate_finite_orbits(base, x, s, a, budget);
  if (!approx) return approx.refusal();
  return approx->action;
}

}  // namespace detail

/// Forces an (epsilon, S u T)-Folner set into the orbit of x, for actions of
/// free products G * K.
inline DensityProvider provider_amenable_orbit(Point x, Rational epsilon, std::vector<Element> s, std::vector<Element> t,
                                               std::size_t budget = default_orbit_budget) {
  DensityProvider p;
  p.name = "amenable_orbit(x=" + std::to_string(x) + ",eps=" + to_string(epsilon) + ")";
  p.refine = [x, epsilon, s = std::move(s), t = std::move(t), budget](const ActionConstraint& c) -> Outcome<Refinement> {
    const auto* node = std::get_if<action::FreeProductAmalgam>(&c.base.node().value);
    if (!node) throw std::domain_error("amenable orbit provider needs a free product action");
    const MarkedGroup& group = c.base.group();
    // Split the constraint into factor constraints along the traces.
    std::vector<Element> s_all(s), t_all(t);
    std::set<Point> points(c.points.begin(), c.points.end());
    points.insert(x);
    for (const Element& w : c.elements) {
      for (Point a : c.points) {
        Point cur = a;
        const auto& syl = w.product().syllables;
        for (auto it = syl.rbegin(); it != syl.rend(); ++it) {
          (it->side == Side::left ? s_all : t_all).push_back(it->value);
          cur = (it->side == Side::left ? node->left : node->right).evaluate(it->value, cur);
          points.insert(cur);
        }
      }
    }
    s_all = canonical(std::move(s_all));
    t_all = canonical(std::move(t_all));
    const std::vector<Point> a(points.begin(), points.end());
    auto sigma = detail::amenable_on_orbits(node->left, s_all, a, x, budget);
    if (!sigma) return sigma.refusal();
    auto tau = detail::amenable_on_orbits(node->right, t_all, a, x, budget);
    if (!tau) return tau.refusal();
    auto combined = free_product_combine(*sigma, *tau, x, epsilon, s_all, t_all, a, budget);
    if (!combined) return combined.refusal();
    const ActionExpr act = ActionExpr::free_product(combined->phi, combined->psi);

    Witness w;
    w.kind = Witness::Kind::folner;
    w.x = x;
    w.certificate = combined->certificate;
    const auto& f = combined->certificate.f;
    const std::set<Point> targets(f.begin(), f.end());
    std::vector<Element> words(combined->certificate.omega);
    if (const auto& reach = combined->reach) {
      // F lies in one factor orbit through y = z x.
      const ActionExpr& carrier = combined->swapped ? combined->phi : combined->psi;
      const Side side = combined->swapped ? Side::left : Side::right;
      const SchreierWindow sw = schreier_window(carrier, reach->y, budget, targets);
      for (Point q : f) {
        if (!sw.words.count(q)) return Refusal{"budget", "Folner point " + std::to_string(q) + " not reached from y within budget"};
        w.reach.emplace_back(q, multiply(group, embed(group, side, sw.element(carrier.group(), q)), reach->z));
        words.push_back(w.reach.back().second);
      }
    } else {
      const SchreierWindow sw = schreier_window(act, x, budget, targets);
      for (Point q : f) {
        if (!sw.words.count(q)) return Refusal{"budget", "Folner point " + std::to_string(q) + " not reached from x within budget"};
        w.reach.emplace_back(q, sw.element(group, q));
        words.push_back(w.reach.back().second);
      }
    }
    std::vector<Point> pts(f.begin(), f.end());
    pts.push_back(x);
    ActionConstraint next = detail::strengthen(act, c, words, pts);
    return Refinement{act, std::move(next), std::move(w)};
  };
  return p;
}

struct FusionStage {
  std::string provider;
  ActionExpr action;
  ActionConstraint constraint;
  Witness witness;
};

struct FusionRun {
  ActionConstraint initial;
  std::vector<FusionStage> stages;
  std::optional<std::pair<std::size_t, Refusal>> aborted;  // stage index and reason
  bool nested = false;               // every stage action satisfies all earlier constraints
  std::vector<bool> witnesses_hold;  // each witness, checked on the final action

  const ActionExpr& final_action() const { return stages.empty() ? initial.base : stages.back().action; }
  bool verified() const {
    return !aborted && nested && std::all_of(witnesses_hold.begin(), witnesses_hold.end(), [](bool b) { return b; });
  }
};

inline FusionRun run_fusion(const std::vector<DensityProvider>& schedule, const ActionConstraint& initial,
                            std::size_t stage_budget = default_orbit_budget) {
  FusionRun run;
  run.initial = initial;
  ActionConstraint current = initial;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    Outcome<Refinement> r = Refusal{"", ""};
    try {
      r = schedule[i].refine(current);
    } catch (const precondition_error& e) {
      r = Refusal{"precondition", std::string(e.what()) + (e.witness().empty() ? "" : ": " + e.witness())};
    }
    if (!r) {
      run.aborted = std::make_pair(i, r.refusal());
      break;
    }
    if (auto v = current.first_violation(r->action))
      throw std::logic_error("provider " + schedule[i].name + " left its constraint at point " + std::to_string(v->point));
    current = r->constraint;
    run.stages.push_back({schedule[i].name, r->action, r->constraint, r->witness});
  }
  run.nested = true;
  for (std::size_t j = 0; j < run.stages.size(); ++j) {
    if (!initial.contains(run.stages[j].action)) run.nested = false;
    for (std::size_t i = 0; i < j; ++i)
      if (!run.stages[i].constraint.contains(run.stages[j].action)) run.nested = false;
  }
  for (const FusionStage& s : run.stages) run.witnesses_hold.push_back(verify_witness(s.witness, run.final_action(), stage_budget));
  return run;
}

/// Pairs (x, y) from {0..n-1} with x != y, ordered by x + y, then by x.
inline std::vector<std::pair<Point, Point>> diagonal_pairs(Point n) {
  std::vector<std::pair<Point, Point>> out;
  for (Point sum = 1; sum + 1 < 2 * n; ++sum)
    for (Point x = 0; x <= sum; ++x) {
      const Point y = sum - x;
      if (x < n && y < n && x != y) out.emplace_back(x, y);
    }
  return out;
}

/// Conjugates by the transposition (p q): a perturbation that stays in a
/// constraint exactly when it does not disturb the constraint's points.
inline ActionExpr perturb(const ActionExpr& act, Point p, Point q) {
  return ActionExpr::conjugate(act, PinnedBijection::from(FinitePerm::transposition(p, q)));
}

}  // namespace lerf
