#pragma once

// Points of Sub(G) as membership oracles, the basic balls W(H, Omega), and
// the finite-index approximation of finitely generated subgroups.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lerf/action.hpp"
#include "lerf/group.hpp"
#include "lerf/stallings.hpp"

namespace lerf {

namespace detail {

inline BSWord bs_power(int n, BSWord g, std::int64_t k) {
  if (k < 0) {
    g = bs_invert(g);
    k = -k;
  }
  BSWord out;
  while (k > 0) {
    if (k & 1) out = bs_multiply(n, out, g);
    k >>= 1;
    if (k) g = bs_multiply(n, g, g);
  }
  return out;
}

}  // namespace detail

/// A subgroup given by a decidable membership test.
class SubgroupHandle {
 public:
  struct Graph {
    SubgroupGraph graph;
  };
  struct Table {
    CosetTable table;
  };
  struct WordList {
    std::vector<Element> generators;
    std::optional<SubgroupGraph> graph;  // free ambients
  };
  struct BSCyclic {
    BSWord generator;
  };
  struct Predicate {
    std::string name;
    std::function<bool(const Element&)> test;
  };

  static SubgroupHandle graph(SubgroupGraph g) {
    MarkedGroup amb = g.ambient();
    return SubgroupHandle(std::move(amb), Graph{std::move(g)});
  }
  static SubgroupHandle table(CosetTable t) {
    MarkedGroup amb = t.ambient();
    return SubgroupHandle(std::move(amb), Table{std::move(t)});
  }
  static SubgroupHandle bs_cyclic(int n, BSWord generator) {
    return SubgroupHandle(MarkedGroup::baumslag_solitar(n), BSCyclic{generator});
  }
  static SubgroupHandle predicate(MarkedGroup ambient, std::string name, std::function<bool(const Element&)> test) {
    return SubgroupHandle(std::move(ambient), Predicate{std::move(name), std::move(test)});
  }

  /// <gens>. Free ambients get their Stallings graph; in BS(1,n) only cyclic
  /// subgroups are supported.
  static SubgroupHandle words(MarkedGroup ambient, std::vector<Element> gens) {
    for (const Element& g : gens) validate(ambient, g);
    if (ambient.kind() == MarkedGroup::Kind::baumslag_solitar) {
      std::vector<Element> nontrivial;
      for (const Element& g : gens)
        if (!is_identity(ambient, g)) nontrivial.push_back(g);
      if (nontrivial.size() > 1)
        throw std::domain_error("membership in non-cyclic subgroups of BS(1,n) is not supported");
      const BSWord gen = nontrivial.empty() ? BSWord{} : nontrivial.front().bs();
      SubgroupHandle out = bs_cyclic(ambient.bs_parameter(), gen);
      out.value_ = WordList{std::move(gens), std::nullopt};
      out.cyclic_ = gen;
      return out;
    }
    if (!ambient.is_free()) throw std::domain_error("membership in subgroups of " + ambient.name() + " is not supported");
    int rank = ambient.kind() == MarkedGroup::Kind::free ? ambient.rank() : 0;
    if (ambient.kind() == MarkedGroup::Kind::free_infinite)
      for (const Element& g : gens)
        for (Letter l : g.free().letters) rank = std::max(rank, std::abs(l));
    std::vector<FreeWord> fw;
    for (const Element& g : gens) fw.push_back(g.free());
    SubgroupGraph graph = graph_from_generators(rank, fw);
    return SubgroupHandle(std::move(ambient), WordList{std::move(gens), std::move(graph)});
  }

  const MarkedGroup& ambient() const { return *ambient_; }

  std::string kind() const {
    switch (value_.index()) {
      case 0: return "graph";
      case 1: return "table";
      case 2: return "words";
      case 3: return "bs_cyclic";
      default: return "predicate";
    }
  }

  bool contains(const Element& g) const {
    return std::visit(overloaded{
                          [&](const Graph& h) { return member(g.free(), h.graph); },
                          [&](const Table& t) { return t.table.stabilizes(g.free()); },
                          [&](const WordList& w) {
                            if (!w.graph) return cyclic_contains(*cyclic_, g.bs());
                            for (Letter l : g.free().letters)
                              if (std::abs(l) > w.graph->rank()) return false;
                            return member(g.free(), *w.graph);
                          },
                          [&](const BSCyclic& c) { return cyclic_contains(c.generator, g.bs()); },
                          [&](const Predicate& p) { return p.test(g); },
                      },
                      value_);
  }

  const auto& value() const noexcept { return value_; }

 private:
  using Value = std::variant<Graph, Table, WordList, BSCyclic, Predicate>;

  SubgroupHandle(MarkedGroup ambient, Value v)
      : ambient_(std::make_shared<const MarkedGroup>(std::move(ambient))), value_(std::move(v)) {}

  bool cyclic_contains(const BSWord& gen, const BSWord& h) const {
    const int n = ambient_->bs_parameter();
    const std::int64_t scale = gen.q - gen.p;
    const std::int64_t hscale = h.q - h.p;
    if (scale != 0) {
      if (hscale % scale != 0) return false;
      return detail::bs_power(n, gen, hscale / scale) == h;
    }
    if (gen.m == 0) return h == BSWord{};
    if (hscale != 0) return false;
    // Both are translations, by gen.m / n^gen.p and h.m / n^h.p.
    const std::int64_t top = std::max(gen.p, h.p);
    const std::int64_t a = detail::checked_mul(gen.m, detail::checked_pow(n, top - gen.p));
    const std::int64_t b = detail::checked_mul(h.m, detail::checked_pow(n, top - h.p));
    return b % a == 0;
  }

  std::shared_ptr<const MarkedGroup> ambient_;
  Value value_;
  std::optional<BSWord> cyclic_;
};

/// W(center, window) = {K : K and center agree on the window}.
struct ChabautyBall {
  SubgroupHandle center;
  std::vector<Element> window;
};

inline bool in_ball(const SubgroupHandle& k, const ChabautyBall& b) {
  if (!(k.ambient() == b.center.ambient())) throw std::domain_error("subgroups of different groups");
  for (const Element& g : b.window)
    if (k.contains(g) != b.center.contains(g)) return false;
  return true;
}

/// <L cap Omega>, which always lies in W(L, Omega).
inline SubgroupHandle fg_approximation(const SubgroupHandle& l, std::span<const Element> omega) {
  std::vector<Element> gens;
  for (const Element& g : canonical({omega.begin(), omega.end()}))
    if (!is_identity(l.ambient(), g) && l.contains(g)) gens.push_back(g);
  return SubgroupHandle::words(l.ambient(), std::move(gens));
}

/// Stab(1,1) of the diagonal action, on the pairs reachable from (1,1).
inline CosetTable intersect_tables(const CosetTable& t1, const CosetTable& t2) {
  if (t1.rank() != t2.rank()) throw std::domain_error("coset tables of different ranks");
  const int r = t1.rank();
  std::map<std::pair<State, State>, State> index{{{0, 0}, 0}};
  std::vector<std::pair<State, State>> states{{0, 0}};
  std::vector<std::vector<State>> forward(r);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto [u, v] = states[i];
    for (int g = 1; g <= r; ++g) {
      const std::pair<State, State> next{t1.follow(u, g), t2.follow(v, g)};
      auto [it, fresh] = index.emplace(next, static_cast<State>(states.size()));
      if (fresh) states.push_back(next);
      forward[g - 1].resize(states.size());
      forward[g - 1][i] = it->second;
    }
  }
  for (auto& f : forward) f.resize(states.size());
  return CosetTable(r, std::move(forward));
}

/// A finite-index K >= L with K cap Omega = L cap Omega. Omega is scanned in
/// canonical order; an element already excluded by the running intersection
/// is skipped.
inline CosetTable approx_by_finite_index(const SubgroupGraph& l, std::span<const Element> omega) {
  CosetTable k = CosetTable::trivial(l.rank());
  for (const Element& e : canonical({omega.begin(), omega.end()})) {
    const FreeWord& g = e.free();
    for (Letter c : g.letters)
      if (std::abs(c) > l.rank()) throw std::domain_error("window element outside F_" + std::to_string(l.rank()));
    if (member(g, l) || !k.stabilizes(g)) continue;
    k = intersect_tables(k, separate(l, g));
  }
  return k;
}

/// {ab : a in lhs, b in rhs}, canonical.
inline std::vector<Element> window_product(const MarkedGroup& g, std::span<const Element> lhs, std::span<const Element> rhs) {
  std::vector<Element> out;
  out.reserve(lhs.size() * rhs.size());
  for (const Element& a : lhs)
    for (const Element& b : rhs) out.push_back(multiply(g, a, b));
  return canonical(std::move(out));
}

/// The coset table of a finite orbit: state i is the i-th orbit point in BFS
/// order and Stab(1) is the point stabilizer of x.
inline Outcome<std::pair<CosetTable, std::vector<Point>>> orbit_table(const ActionExpr& act, Point x, std::size_t budget) {
  if (act.group().kind() != MarkedGroup::Kind::free)
    throw std::domain_error("orbit tables are built for actions of F_n");
  const Orbit o = orbit(act, x, budget);
  if (!o.complete) return Refusal{"budget", "orbit of " + std::to_string(x) + " exceeds " + std::to_string(budget) + " points"};
  std::unordered_map<Point, State> index;
  for (State i = 0; i < o.points.size(); ++i) index[o.points[i]] = i;
  const int r = act.group().rank();
  std::vector<std::vector<State>> forward(r, std::vector<State>(o.points.size()));
  for (int g = 1; g <= r; ++g)
    for (State i = 0; i < o.points.size(); ++i) forward[g - 1][i] = index.at(act.apply_power(g, -1, o.points[i]));
  return std::make_pair(CosetTable(r, std::move(forward)), o.points);
}

}  // namespace lerf
