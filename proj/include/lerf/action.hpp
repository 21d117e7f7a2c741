#pragma once

// Permutation representations of supported groups on X = N, as immutable
// expression trees. Every node is a genuine group action: evaluating a
// product is evaluating the factors in turn.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "lerf/encoding.hpp"
#include "lerf/group.hpp"
#include "lerf/stallings.hpp"

namespace lerf {

struct ActionNode;

class ActionExpr {
 public:
  ActionExpr() = default;

  static ActionExpr fin_supp(MarkedGroup group, std::vector<FinitePerm> perms);
  static ActionExpr trivial(MarkedGroup group) { return fin_supp(std::move(group), {}); }
  /// Every generator of a free group acts as n -> n+1 on Z (zigzag coded).
  static ActionExpr translation(MarkedGroup group);
  /// BS(1,n) on Z[1/n]: s is x -> x+1 and t is x -> x/n.
  static ActionExpr affine_bs(int n);
  /// F_n acting on the left cosets of H, coded through the Schreier graph.
  static ActionExpr schreier(SubgroupGraph subgroup);
  struct CosetBlock {
    CosetTable table;
    std::vector<Point> embedding;  // state -> point, injective
  };
  /// F_n acting on finitely many coset spaces placed in N; other points fixed.
  static ActionExpr coset(int rank, std::vector<CosetBlock> blocks);
  /// x -> xi^{-1} inner(g) xi x.
  static ActionExpr conjugate(ActionExpr inner, PinnedBijection xi);
  /// Interleaves the parts: point x lives in part x mod k at local point x div k.
  static ActionExpr disjoint_union(std::vector<ActionExpr> parts);
  static ActionExpr free_product(ActionExpr left, ActionExpr right);
  /// (sigma, 1) on X + N, with X on the even points and the new fixed points odd.
  static ActionExpr augment(ActionExpr inner);
  /// Fixes a finite union of inner orbits pointwise.
  static ActionExpr freeze(ActionExpr inner, std::set<Point> frozen);

  const MarkedGroup& group() const { return *group_; }
  const ActionNode& node() const { return *node_; }
  bool valid() const noexcept { return static_cast<bool>(node_); }
  std::string kind() const;

  /// Generators that may act nontrivially. Finite even for F_infinity actions.
  int active_generators() const;

  Point apply_power(int generator, std::int64_t exponent, Point x) const;
  Point evaluate(const Element& g, Point x) const;

 private:
  std::shared_ptr<const ActionNode> node_;
  std::shared_ptr<const MarkedGroup> group_;
};

namespace action {

struct FinSupp {
  std::vector<FinitePerm> perms;  // perms[i] is generator i+1
};
struct Translation {};
struct AffineBS {
  int n = 2;
};
struct Schreier {
  SubgroupGraph subgroup;
};
struct Coset {
  int rank = 0;
  std::vector<ActionExpr::CosetBlock> blocks;
  std::unordered_map<Point, std::pair<std::size_t, State>> index;
};
struct Conjugate {
  ActionExpr inner;
  PinnedBijection xi;
};
struct DisjointUnion {
  std::vector<ActionExpr> parts;
};
struct FreeProductAmalgam {
  ActionExpr left;
  ActionExpr right;
};
struct TrivialAugment {
  ActionExpr inner;
};
struct FreezeOrbits {
  ActionExpr inner;
  std::set<Point> frozen;
};

}  // namespace action

struct ActionNode {
  std::variant<action::FinSupp, action::Translation, action::AffineBS, action::Schreier, action::Coset,
               action::Conjugate, action::DisjointUnion, action::FreeProductAmalgam, action::TrivialAugment,
               action::FreezeOrbits>
      value;
};

// --------------------------------------------------------------- Schreier

namespace detail {

/// Cosets of H <= F_r are pairs (core vertex v, reduced tail u) where u
/// leaves the core at v. They are coded as v + V * D(u), D(u) the base
/// (2r+1) number whose digits are the slots of u plus one, last letter least
/// significant. Codes that are not of this shape are points outside the
/// coset space.
struct SchreierPoint {
  Vertex vertex = 0;
  std::vector<Letter> tail;
};

inline std::optional<SchreierPoint> schreier_decode(const SubgroupGraph& h, Point code) {
  const Point V = h.vertex_count();
  const Point B = 2 * static_cast<Point>(h.rank()) + 1;
  SchreierPoint out;
  out.vertex = static_cast<Vertex>(code % V);
  Point digits = code / V;
  while (digits > 0) {
    const Point d = digits % B;
    if (d == 0) return std::nullopt;
    out.tail.push_back(slot_letter(static_cast<int>(d - 1)));
    digits /= B;
  }
  std::reverse(out.tail.begin(), out.tail.end());
  for (std::size_t i = 1; i < out.tail.size(); ++i)
    if (out.tail[i] == -out.tail[i - 1]) return std::nullopt;
  if (!out.tail.empty() && h.follow(out.vertex, out.tail.front())) return std::nullopt;
  return out;
}

inline Point schreier_encode(const SubgroupGraph& h, const SchreierPoint& p) {
  const Point V = h.vertex_count();
  const Point B = 2 * static_cast<Point>(h.rank()) + 1;
  Point digits = 0;
  for (Letter l : p.tail) {
    const Point d = static_cast<Point>(letter_slot(l)) + 1;
    if (digits > (UINT64_MAX - d) / B) throw encoding_error("coset does not fit the 64-bit Schreier coding");
    digits = digits * B + d;
  }
  if (digits > (UINT64_MAX - p.vertex) / V) throw encoding_error("coset does not fit the 64-bit Schreier coding");
  return p.vertex + V * digits;
}

inline void schreier_step(const SubgroupGraph& h, SchreierPoint& p, Letter walk) {
  if (p.tail.empty()) {
    if (auto t = h.follow(p.vertex, walk)) {
      p.vertex = *t;
      return;
    }
    p.tail.push_back(walk);
  } else if (p.tail.back() == -walk) {
    p.tail.pop_back();
  } else {
    p.tail.push_back(walk);
  }
}

inline Point checked_double(Point x) {
  if (x > UINT64_MAX / 2) throw encoding_error("augmented point does not fit in 64 bits");
  return 2 * x;
}

}  // namespace detail

// ------------------------------------------------------------ construction

inline ActionExpr ActionExpr::fin_supp(MarkedGroup group, std::vector<FinitePerm> perms) {
  if (auto c = group.generator_count(); c && static_cast<int>(perms.size()) > *c)
    throw std::domain_error("more permutations than generators of " + group.name());
  ActionExpr a;
  a.group_ = std::make_shared<const MarkedGroup>(std::move(group));
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::FinSupp{std::move(perms)}});
  return a;
}

inline ActionExpr ActionExpr::translation(MarkedGroup group) {
  if (group.kind() != MarkedGroup::Kind::free) throw std::domain_error("translation actions are defined for F_n");
  ActionExpr a;
  a.group_ = std::make_shared<const MarkedGroup>(std::move(group));
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::Translation{}});
  return a;
}

inline ActionExpr ActionExpr::affine_bs(int n) {
  ActionExpr a;
  a.group_ = std::make_shared<const MarkedGroup>(MarkedGroup::baumslag_solitar(n));
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::AffineBS{n}});
  return a;
}

inline ActionExpr ActionExpr::schreier(SubgroupGraph subgroup) {
  ActionExpr a;
  a.group_ = std::make_shared<const MarkedGroup>(subgroup.ambient());
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::Schreier{std::move(subgroup)}});
  return a;
}

inline ActionExpr ActionExpr::coset(int rank, std::vector<CosetBlock> blocks) {
  action::Coset node;
  node.rank = rank;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    if (blk.table.rank() != rank) throw std::domain_error("coset tables of different ranks");
    if (blk.embedding.size() != blk.table.degree()) throw std::invalid_argument("embedding size differs from table degree");
    for (State s = 0; s < blk.embedding.size(); ++s)
      if (!node.index.emplace(blk.embedding[s], std::make_pair(b, s)).second)
        throw std::invalid_argument("coset embeddings overlap at point " + std::to_string(blk.embedding[s]));
  }
  node.blocks = std::move(blocks);
  ActionExpr a;
  a.group_ = std::make_shared<const MarkedGroup>(MarkedGroup::free(rank));
  a.node_ = std::make_shared<const ActionNode>(ActionNode{std::move(node)});
  return a;
}

inline ActionExpr ActionExpr::conjugate(ActionExpr inner, PinnedBijection xi) {
  ActionExpr a;
  a.group_ = inner.group_;
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::Conjugate{std::move(inner), std::move(xi)}});
  return a;
}

inline ActionExpr ActionExpr::disjoint_union(std::vector<ActionExpr> parts) {
  if (parts.empty()) throw std::invalid_argument("disjoint union of no actions");
  for (const auto& p : parts)
    if (!(p.group() == parts.front().group())) throw std::domain_error("disjoint union parts act by different groups");
  ActionExpr a;
  a.group_ = parts.front().group_;
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::DisjointUnion{std::move(parts)}});
  return a;
}

inline ActionExpr ActionExpr::free_product(ActionExpr left, ActionExpr right) {
  if (!left.group().generator_count()) throw std::domain_error("left factor needs finitely many generators");
  ActionExpr a;
  a.group_ = std::make_shared<const MarkedGroup>(MarkedGroup::free_product(left.group(), right.group()));
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::FreeProductAmalgam{std::move(left), std::move(right)}});
  return a;
}

inline ActionExpr ActionExpr::augment(ActionExpr inner) {
  ActionExpr a;
  a.group_ = inner.group_;
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::TrivialAugment{std::move(inner)}});
  return a;
}

inline ActionExpr ActionExpr::freeze(ActionExpr inner, std::set<Point> frozen) {
  ActionExpr a;
  a.group_ = inner.group_;
  a.node_ = std::make_shared<const ActionNode>(ActionNode{action::FreezeOrbits{std::move(inner), std::move(frozen)}});
  return a;
}

// -------------------------------------------------------------- evaluation

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

inline std::string ActionExpr::kind() const {
  return std::visit(overloaded{
                        [](const action::FinSupp&) { return std::string("finsupp"); },
                        [](const action::Translation&) { return std::string("translation"); },
                        [](const action::AffineBS&) { return std::string("affine_bs"); },
                        [](const action::Schreier&) { return std::string("schreier"); },
                        [](const action::Coset&) { return std::string("coset"); },
                        [](const action::Conjugate&) { return std::string("conjugate"); },
                        [](const action::DisjointUnion&) { return std::string("disjoint_union"); },
                        [](const action::FreeProductAmalgam&) { return std::string("free_product"); },
                        [](const action::TrivialAugment&) { return std::string("augment"); },
                        [](const action::FreezeOrbits&) { return std::string("freeze"); },
                    },
                    node_->value);
}

inline int ActionExpr::active_generators() const {
  return std::visit(overloaded{
                        [&](const action::FinSupp& f) {
                          auto c = group().generator_count();
                          return c ? *c : static_cast<int>(f.perms.size());
                        },
                        [&](const action::Translation&) { return *group().generator_count(); },
                        [](const action::AffineBS&) { return 2; },
                        [](const action::Schreier& s) { return s.subgroup.rank(); },
                        [](const action::Coset& c) { return c.rank; },
                        [](const action::Conjugate& c) { return c.inner.active_generators(); },
                        [](const action::DisjointUnion& d) {
                          int m = 0;
                          for (const auto& p : d.parts) m = std::max(m, p.active_generators());
                          return m;
                        },
                        [](const action::FreeProductAmalgam& a) {
                          return *a.left.group().generator_count() + a.right.active_generators();
                        },
                        [](const action::TrivialAugment& t) { return t.inner.active_generators(); },
                        [](const action::FreezeOrbits& f) { return f.inner.active_generators(); },
                    },
                    node_->value);
}

inline Point ActionExpr::apply_power(int gen, std::int64_t k, Point x) const {
  if (k == 0) return x;
  return std::visit(
      overloaded{
          [&](const action::FinSupp& f) {
            if (gen < 1 || gen > static_cast<int>(f.perms.size())) return x;
            return f.perms[gen - 1].power(x, k);
          },
          [&](const action::Translation&) { return zigzag(detail::checked_add(unzigzag(x), k)); },
          [&](const action::AffineBS& a) {
            NAdic v = decode_nadic(a.n, x);
            v = gen == 1 ? nadic_add_integer(a.n, v, k) : nadic_scale(a.n, v, k);
            return encode_nadic(a.n, v);
          },
          [&](const action::Schreier& s) {
            auto p = detail::schreier_decode(s.subgroup, x);
            if (!p) return x;
            const Letter walk = k > 0 ? -gen : gen;
            for (std::int64_t i = 0; i < (k > 0 ? k : -k); ++i) detail::schreier_step(s.subgroup, *p, walk);
            return detail::schreier_encode(s.subgroup, *p);
          },
          [&](const action::Coset& c) {
            auto it = c.index.find(x);
            if (it == c.index.end()) return x;
            const auto& blk = c.blocks[it->second.first];
            const Letter walk = k > 0 ? -gen : gen;
            State u = it->second.second;
            std::int64_t cycle = 1;
            for (State v = blk.table.follow(u, walk); v != u; v = blk.table.follow(v, walk)) ++cycle;
            const std::int64_t steps = (k > 0 ? k : -k) % cycle;
            for (std::int64_t i = 0; i < steps; ++i) u = blk.table.follow(u, walk);
            return blk.embedding[u];
          },
          [&](const action::Conjugate& c) {
            return c.xi.apply_inverse(c.inner.apply_power(gen, k, c.xi.apply(x)));
          },
          [&](const action::DisjointUnion& d) {
            const Point m = d.parts.size();
            const Point local = d.parts[x % m].apply_power(gen, k, x / m);
            if (local > (UINT64_MAX - x % m) / m) throw encoding_error("disjoint union point does not fit in 64 bits");
            return local * m + x % m;
          },
          [&](const action::FreeProductAmalgam& a) {
            const int lc = *a.left.group().generator_count();
            return gen <= lc ? a.left.apply_power(gen, k, x) : a.right.apply_power(gen - lc, k, x);
          },
          [&](const action::TrivialAugment& t) {
            if (x % 2 == 1) return x;
            return detail::checked_double(t.inner.apply_power(gen, k, x / 2));
          },
          [&](const action::FreezeOrbits& f) { return f.frozen.count(x) ? x : f.inner.apply_power(gen, k, x); },
      },
      node_->value);
}

inline Point ActionExpr::evaluate(const Element& g, Point x) const {
  return std::visit(overloaded{
                        [&](const action::Conjugate& c) { return c.xi.apply_inverse(c.inner.evaluate(g, c.xi.apply(x))); },
                        [&](const action::DisjointUnion& d) {
                          const Point m = d.parts.size();
                          const Point local = d.parts[x % m].evaluate(g, x / m);
                          if (local > (UINT64_MAX - x % m) / m) throw encoding_error("disjoint union point does not fit in 64 bits");
                          return local * m + x % m;
                        },
                        [&](const action::FreeProductAmalgam& a) {
                          const auto& syl = g.product().syllables;
                          for (auto it = syl.rbegin(); it != syl.rend(); ++it)
                            x = (it->side == Side::left ? a.left : a.right).evaluate(it->value, x);
                          return x;
                        },
                        [&](const action::TrivialAugment& t) {
                          if (x % 2 == 1) return x;
                          return detail::checked_double(t.inner.evaluate(g, x / 2));
                        },
                        [&](const action::FreezeOrbits& f) { return f.frozen.count(x) ? x : f.inner.evaluate(g, x); },
                        [&](const auto&) {
                          const auto powers = expand(group(), g);
                          for (auto it = powers.rbegin(); it != powers.rend(); ++it)
                            x = apply_power(it->generator, it->exponent, x);
                          return x;
                        },
                    },
                    node_->value);
}

inline Point evaluate(const ActionExpr& act, const Element& g, Point x) { return act.evaluate(g, x); }

// ------------------------------------------------------------------ orbits

/// Signed generator letters acting nontrivially, in canonical order.
inline std::vector<Letter> action_letters(const ActionExpr& act) {
  std::vector<Letter> out;
  for (int g = 1; g <= act.active_generators(); ++g) {
    out.push_back(g);
    out.push_back(-g);
  }
  return out;
}

struct Orbit {
  std::vector<Point> points;    // discovery order; the explored window when incomplete
  std::vector<Point> frontier;  // unexpanded points when the budget ran out
  bool complete = false;

  bool contains(Point p) const { return std::find(points.begin(), points.end(), p) != points.end(); }
};

/// Breadth-first closure under the generators. `budget` bounds the number of
/// discovered points; running out, or meeting a point past the 64-bit
/// coding, yields an incomplete orbit, never a guess.
inline Orbit orbit(const ActionExpr& act, Point x, std::size_t budget) {
  if (budget < 1) throw std::invalid_argument("orbit budget must be positive");
  const auto letters = action_letters(act);
  Orbit out;
  std::unordered_set<Point> seen{x};
  out.points.push_back(x);
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const Point u = out.points[i];
    for (Letter l : letters) {
      Point v = 0;
      try {
        v = act.apply_power(std::abs(l), l > 0 ? 1 : -1, u);
      } catch (const encoding_error&) {
        out.frontier.assign(out.points.begin() + static_cast<std::ptrdiff_t>(i), out.points.end());
        return out;
      }
      if (seen.insert(v).second) {
        if (out.points.size() >= budget) {
          out.frontier.assign(out.points.begin() + static_cast<std::ptrdiff_t>(i), out.points.end());
          return out;
        }
        out.points.push_back(v);
      }
    }
  }
  out.complete = true;
  return out;
}

/// Orbit of x under the subgroup generated by `gens`.
inline Orbit orbit_under(const ActionExpr& act, std::span<const Element> gens, Point x, std::size_t budget) {
  std::vector<Element> steps;
  for (const Element& h : gens) {
    steps.push_back(h);
    steps.push_back(invert(act.group(), h));
  }
  Orbit out;
  std::unordered_set<Point> seen{x};
  out.points.push_back(x);
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    for (const Element& h : steps) {
      Point v = 0;
      try {
        v = act.evaluate(h, out.points[i]);
      } catch (const encoding_error&) {
        out.frontier.assign(out.points.begin() + static_cast<std::ptrdiff_t>(i), out.points.end());
        return out;
      }
      if (seen.insert(v).second) {
        if (out.points.size() >= budget) {
          out.frontier.assign(out.points.begin() + static_cast<std::ptrdiff_t>(i), out.points.end());
          return out;
        }
        out.points.push_back(v);
      }
    }
  }
  out.complete = true;
  return out;
}

/// Shortest words (canonical tie-breaking) from x to the points of its orbit.
struct SchreierWindow {
  std::vector<Point> points;                      // discovery order
  std::unordered_map<Point, std::vector<Letter>> words;  // p = word . x, leftmost letter applied last
  bool complete = false;

  Element element(const MarkedGroup& g, Point p) const { return from_letters(g, words.at(p)); }
};

/// Explores until `budget` points are known or every target has been found.
/// `complete` means the whole orbit was closed off.
inline SchreierWindow schreier_window(const ActionExpr& act, Point x, std::size_t budget,
                                      const std::set<Point>& targets = {}) {
  const auto letters = action_letters(act);
  SchreierWindow out;
  out.points.push_back(x);
  out.words[x] = {};
  std::size_t found = targets.count(x);
  auto done = [&] { return !targets.empty() && found == targets.size(); };
  for (std::size_t i = 0; i < out.points.size() && !done(); ++i) {
    const Point u = out.points[i];
    for (Letter l : letters) {
      Point v = 0;
      try {
        v = act.apply_power(std::abs(l), l > 0 ? 1 : -1, u);
      } catch (const encoding_error&) {
        return out;
      }
      if (out.words.count(v)) continue;
      if (out.points.size() >= budget) return out;
      std::vector<Letter> w{l};
      const auto& wu = out.words[u];
      w.insert(w.end(), wu.begin(), wu.end());
      out.words.emplace(v, std::move(w));
      out.points.push_back(v);
      if (targets.count(v)) ++found;
      if (done()) break;
    }
  }
  out.complete = !done();
  return out;
}

enum class OrbitSize { finite, infinite, unknown };

/// Structural knowledge about the orbit of x, without exploring it.
inline OrbitSize certify_orbit(const ActionExpr& act, Point x) {
  return std::visit(overloaded{
                        [](const action::FinSupp&) { return OrbitSize::finite; },
                        [](const action::Coset&) { return OrbitSize::finite; },
                        [&](const action::Translation&) {
                          return *act.group().generator_count() > 0 ? OrbitSize::infinite : OrbitSize::finite;
                        },
                        [](const action::AffineBS&) { return OrbitSize::infinite; },
                        [&](const action::Schreier& s) {
                          if (!detail::schreier_decode(s.subgroup, x)) return OrbitSize::finite;
                          return s.subgroup.is_complete() ? OrbitSize::finite : OrbitSize::infinite;
                        },
                        [&](const action::Conjugate& c) { return certify_orbit(c.inner, c.xi.apply(x)); },
                        [&](const action::DisjointUnion& d) {
                          return certify_orbit(d.parts[x % d.parts.size()], x / d.parts.size());
                        },
                        [](const action::FreeProductAmalgam&) { return OrbitSize::unknown; },
                        [&](const action::TrivialAugment& t) {
                          return x % 2 == 1 ? OrbitSize::finite : certify_orbit(t.inner, x / 2);
                        },
                        [&](const action::FreezeOrbits& f) {
                          return f.frozen.count(x) ? OrbitSize::finite : certify_orbit(f.inner, x);
                        },
                    },
                    act.node().value);
}

/// {g in window : g x = x}, in window order.
inline std::vector<Element> stabilizer_window(const ActionExpr& act, Point x, std::span<const Element> window) {
  std::vector<Element> out;
  for (const Element& g : window)
    if (act.evaluate(g, x) == x) out.push_back(g);
  return out;
}

/// Points x, v_1 x, v_2 v_1 x, ..., for the word v_k ... v_1 written left to
/// right. Repeated points are kept.
inline std::vector<Point> trace(const ActionExpr& act, std::span<const Element> word, Point x) {
  if (word.empty()) throw std::invalid_argument("trace of an empty word");
  std::vector<Point> out{x};
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    x = act.evaluate(*it, x);
    out.push_back(x);
  }
  return out;
}

/// Trace of a free product word, one point per syllable.
inline std::vector<Point> syllable_trace(const ActionExpr& amalgam, const Element& z, Point x) {
  const auto& group = amalgam.group();
  std::vector<Element> letters;
  for (const Syllable& s : z.product().syllables) letters.push_back(embed(group, s.side, s.value));
  if (letters.empty()) return {x};
  return trace(amalgam, letters, x);
}

/// The basic open set O(base, S, A).
struct ActionConstraint {
  ActionExpr base;
  std::vector<Element> elements;
  std::vector<Point> points;

  struct Violation {
    Element element;
    Point point = 0;
    Point expected = 0;
    Point actual = 0;
  };

  std::optional<Violation> first_violation(const ActionExpr& sigma) const {
    for (const Element& s : elements)
      for (Point a : points) {
        const Point want = base.evaluate(s, a);
        const Point got = sigma.evaluate(s, a);
        if (want != got) return Violation{s, a, want, got};
      }
    return std::nullopt;
  }

  bool contains(const ActionExpr& sigma) const { return !first_violation(sigma); }
};

}  // namespace lerf
