#pragma once

// Finitely generated subgroups of F_n as folded core graphs, finite-index
// subgroups as coset tables, and the constructive form of M. Hall's theorem.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lerf/group.hpp"

namespace lerf {

using Vertex = std::uint32_t;
using State = std::uint32_t;

namespace detail {
class Folder;
}

struct Edge {
  Vertex from = 0;
  int generator = 1;
  Vertex to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A folded, based, labeled graph. Vertex 0 is the base. Each vertex has at
/// most one outgoing edge per signed letter.
class SubgroupGraph {
 public:
  static constexpr Vertex base = 0;

  explicit SubgroupGraph(int rank = 0) : rank_(rank), out_(1, std::vector<std::int32_t>(2 * rank, -1)) {}

  /// Folds an arbitrary labeled graph on `vertex_count` vertices. Edges are
  /// processed in the given order. With `trim`, hanging trees are removed;
  /// the base vertex is always kept.
  static SubgroupGraph fold(int rank, std::size_t vertex_count, std::span<const Edge> edges, bool trim);

  int rank() const noexcept { return rank_; }
  MarkedGroup ambient() const { return MarkedGroup::free(rank_); }
  std::size_t vertex_count() const noexcept { return out_.size(); }

  std::optional<Vertex> follow(Vertex v, Letter l) const {
    const std::int32_t t = out_[v][letter_slot(l)];
    if (t < 0) return std::nullopt;
    return static_cast<Vertex>(t);
  }

  std::optional<Vertex> read(Vertex from, const FreeWord& w) const {
    Vertex v = from;
    for (Letter l : w.letters) {
      if (std::abs(l) > rank_) return std::nullopt;
      auto next = follow(v, l);
      if (!next) return std::nullopt;
      v = *next;
    }
    return v;
  }

  /// Positively labeled edges in (from, generator, to) order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (Vertex v = 0; v < out_.size(); ++v)
      for (int g = 1; g <= rank_; ++g)
        if (auto t = follow(v, g)) out.push_back({v, g, *t});
    return out;
  }

  std::size_t degree(Vertex v) const {
    return static_cast<std::size_t>(std::count_if(out_[v].begin(), out_[v].end(), [](std::int32_t t) { return t >= 0; }));
  }

  /// Every vertex carries every letter: the subgroup has finite index.
  bool is_complete() const {
    for (const auto& row : out_)
      for (std::int32_t t : row)
        if (t < 0) return false;
    return true;
  }

  friend bool operator==(const SubgroupGraph&, const SubgroupGraph&) = default;

 private:
  friend class detail::Folder;

  SubgroupGraph(int rank, std::vector<std::vector<std::int32_t>> out) : rank_(rank), out_(std::move(out)) {}

  int rank_;
  std::vector<std::vector<std::int32_t>> out_;
};

namespace detail {

class Folder {
 public:
  Folder(int rank, std::size_t n) : rank_(rank), parent_(n), adj_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  Vertex find(Vertex v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void add_edge(Vertex u, Letter l, Vertex v) {
    insert(find(u), letter_slot(l), v);
    insert(find(v), letter_slot(-l), u);
    drain();
  }

  SubgroupGraph finish(bool trim) {
    const std::size_t n = parent_.size();
    // Collapse to roots.
    std::vector<std::vector<std::int32_t>> out(n, std::vector<std::int32_t>(2 * rank_, -1));
    std::vector<bool> alive(n, false);
    for (Vertex v = 0; v < n; ++v) {
      if (find(v) != v) continue;
      alive[v] = true;
      for (auto [slot, t] : adj_[v]) out[v][slot] = static_cast<std::int32_t>(find(t));
    }
    const Vertex root_base = find(0);
    if (trim) {
      std::queue<Vertex> q;
      auto deg = [&](Vertex v) {
        return std::count_if(out[v].begin(), out[v].end(), [](std::int32_t t) { return t >= 0; });
      };
      for (Vertex v = 0; v < n; ++v)
        if (alive[v] && v != root_base && deg(v) <= 1) q.push(v);
      while (!q.empty()) {
        Vertex v = q.front();
        q.pop();
        if (!alive[v] || v == root_base || deg(v) > 1) continue;
        alive[v] = false;
        for (int slot = 0; slot < 2 * rank_; ++slot) {
          const std::int32_t t = out[v][slot];
          if (t < 0) continue;
          const int back = letter_slot(-slot_letter(slot));
          out[t][back] = -1;
          out[v][slot] = -1;
          if (static_cast<Vertex>(t) != root_base && deg(t) <= 1) q.push(static_cast<Vertex>(t));
        }
      }
    }
    // Canonical relabeling: breadth-first from the base in letter order.
    std::vector<std::int32_t> label(n, -1);
    std::vector<Vertex> order{root_base};
    label[root_base] = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int slot = 0; slot < 2 * rank_; ++slot) {
        const std::int32_t t = out[order[i]][slot];
        if (t >= 0 && label[t] < 0) {
          label[t] = static_cast<std::int32_t>(order.size());
          order.push_back(static_cast<Vertex>(t));
        }
      }
    std::vector<Edge> edges;
    for (Vertex v : order)
      for (int g = 1; g <= rank_; ++g) {
        const std::int32_t t = out[v][letter_slot(g)];
        if (t >= 0) edges.push_back({static_cast<Vertex>(label[v]), g, static_cast<Vertex>(label[t])});
      }
    return build(order.size(), edges);
  }

  SubgroupGraph build(std::size_t n, const std::vector<Edge>& edges);

 private:
  void insert(Vertex root, int slot, Vertex target) {
    auto [it, fresh] = adj_[root].emplace(slot, target);
    if (!fresh && find(it->second) != find(target)) pending_.emplace_back(it->second, target);
  }

  void drain() {
    while (!pending_.empty()) {
      auto [a, b] = pending_.back();
      pending_.pop_back();
      a = find(a);
      b = find(b);
      if (a == b) continue;
      if (b < a) std::swap(a, b);
      parent_[b] = a;
      auto moved = std::move(adj_[b]);
      adj_[b].clear();
      for (auto [slot, t] : moved) insert(a, slot, t);
    }
  }

  int rank_;
  std::vector<Vertex> parent_;
  std::vector<std::map<int, Vertex>> adj_;
  std::vector<std::pair<Vertex, Vertex>> pending_;
};

}  // namespace detail

inline SubgroupGraph SubgroupGraph::fold(int rank, std::size_t vertex_count, std::span<const Edge> edges, bool trim) {
  if (vertex_count == 0) throw std::invalid_argument("a subgroup graph needs a base vertex");
  detail::Folder folder(rank, vertex_count);
  for (const Edge& e : edges) {
    if (e.generator < 1 || e.generator > rank) throw std::domain_error("edge label outside F_" + std::to_string(rank));
    if (e.from >= vertex_count || e.to >= vertex_count) throw std::out_of_range("edge endpoint out of range");
    folder.add_edge(e.from, e.generator, e.to);
  }
  return folder.finish(trim);
}

inline SubgroupGraph detail::Folder::build(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::int32_t>> out(n, std::vector<std::int32_t>(2 * rank_, -1));
  for (const Edge& e : edges) {
    out[e.from][letter_slot(e.generator)] = static_cast<std::int32_t>(e.to);
    out[e.to][letter_slot(-e.generator)] = static_cast<std::int32_t>(e.from);
  }
  return SubgroupGraph(rank_, std::move(out));
}

/// Appends the bouquet of `w` at the base: a closed path of fresh vertices.
inline void add_loop(std::vector<Edge>& edges, std::size_t& vertex_count, const FreeWord& w) {
  if (w.empty()) return;
  Vertex prev = SubgroupGraph::base;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool last = i + 1 == w.size();
    const Vertex next = last ? SubgroupGraph::base : static_cast<Vertex>(vertex_count++);
    const Letter l = w.letters[i];
    if (l > 0)
      edges.push_back({prev, l, next});
    else
      edges.push_back({next, -l, prev});
    prev = next;
  }
}

/// Folded core graph of <gens> in F_rank.
inline SubgroupGraph graph_from_generators(int rank, std::span<const FreeWord> gens) {
  std::vector<Edge> edges;
  std::size_t n = 1;
  for (const FreeWord& w : gens) {
    check_letters(MarkedGroup::free(rank), w.letters);
    add_loop(edges, n, reduce(w.letters));
  }
  return SubgroupGraph::fold(rank, n, edges, true);
}

inline SubgroupGraph graph_from_generators(const MarkedGroup& ambient, std::span<const Element> gens) {
  if (ambient.kind() != MarkedGroup::Kind::free) throw std::domain_error("Stallings graphs need F_n, got " + ambient.name());
  std::vector<FreeWord> words;
  for (const Element& e : gens) words.push_back(e.free());
  return graph_from_generators(ambient.rank(), words);
}

inline bool member(const FreeWord& g, const SubgroupGraph& h) {
  auto end = h.read(SubgroupGraph::base, g);
  return end && *end == SubgroupGraph::base;
}

/// A transitive permutation action of the generators of F_n on states
/// 0..d-1. `image(i)[u]` is where generator i takes u when words are read
/// left to right; state 0 is the coset of the subgroup itself.
class CosetTable {
 public:
  CosetTable() : CosetTable(0, {}) {}

  CosetTable(int rank, std::vector<std::vector<State>> forward) : rank_(rank), forward_(std::move(forward)) {
    if (forward_.size() != static_cast<std::size_t>(rank_)) throw std::invalid_argument("one image list per generator");
    degree_ = rank_ == 0 ? 1 : forward_.front().size();
    if (degree_ == 0) throw std::invalid_argument("coset tables have at least one state");
    backward_.assign(rank_, std::vector<State>(degree_, 0));
    for (int g = 0; g < rank_; ++g) {
      if (forward_[g].size() != degree_) throw std::invalid_argument("image lists of different lengths");
      std::vector<bool> hit(degree_, false);
      for (State u = 0; u < degree_; ++u) {
        const State v = forward_[g][u];
        if (v >= degree_ || hit[v]) throw std::invalid_argument("generator does not act as a permutation");
        hit[v] = true;
        backward_[g][v] = u;
      }
    }
    if (!is_transitive()) throw std::invalid_argument("coset table is not transitive from state 1");
  }

  static CosetTable trivial(int rank) { return CosetTable(rank, std::vector<std::vector<State>>(rank, {0})); }

  int rank() const noexcept { return rank_; }
  MarkedGroup ambient() const { return MarkedGroup::free(rank_); }
  std::size_t degree() const noexcept { return degree_; }
  const std::vector<State>& image(int generator) const { return forward_.at(generator - 1); }

  State follow(State u, Letter l) const { return l > 0 ? forward_[l - 1][u] : backward_[-l - 1][u]; }

  State read(State u, const FreeWord& w) const {
    for (Letter l : w.letters) {
      if (std::abs(l) > rank_) throw std::domain_error("letter outside the table's free group");
      u = follow(u, l);
    }
    return u;
  }

  /// Left action on G/K: g sends the coset of state u to the state read by g^{-1}.
  State act(const FreeWord& g, State u) const {
    for (auto it = g.letters.rbegin(); it != g.letters.rend(); ++it) u = follow(u, -*it);
    return u;
  }

  bool stabilizes(const FreeWord& w) const { return read(0, w) == 0; }

  friend bool operator==(const CosetTable& a, const CosetTable& b) {
    return a.rank_ == b.rank_ && a.forward_ == b.forward_;
  }

 private:
  bool is_transitive() const {
    std::vector<bool> seen(degree_, false);
    std::vector<State> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      State u = stack.back();
      stack.pop_back();
      for (int g = 0; g < rank_; ++g)
        for (State v : {forward_[g][u], backward_[g][u]})
          if (!seen[v]) {
            seen[v] = true;
            ++count;
            stack.push_back(v);
          }
    }
    return count == degree_;
  }

  int rank_;
  std::size_t degree_ = 1;
  std::vector<std::vector<State>> forward_;
  std::vector<std::vector<State>> backward_;
};

inline bool table_stabilizer_membership(const FreeWord& w, const CosetTable& t) { return t.stabilizes(w); }

/// Completes each generator's partial injection to a permutation, matching
/// vertices without an outgoing edge to vertices without an incoming edge in
/// index order. The state-1 stabilizer contains the subgroup of the graph.
inline CosetTable hall_complete(const SubgroupGraph& h) {
  const std::size_t d = h.vertex_count();
  std::vector<std::vector<State>> forward(h.rank(), std::vector<State>(d, 0));
  for (int g = 1; g <= h.rank(); ++g) {
    std::vector<bool> has_in(d, false);
    std::vector<Vertex> sources;
    for (Vertex v = 0; v < d; ++v) {
      if (auto t = h.follow(v, g)) {
        forward[g - 1][v] = *t;
        has_in[*t] = true;
      } else {
        sources.push_back(v);
      }
    }
    std::size_t next = 0;
    for (Vertex v = 0; v < d; ++v) {
      if (has_in[v]) continue;
      forward[g - 1][sources[next++]] = v;
    }
  }
  return CosetTable(h.rank(), std::move(forward));
}

/// The folded graph of `h` with the path of `g` hanging from the base.
inline SubgroupGraph attach_hair(const SubgroupGraph& h, const FreeWord& g) {
  std::vector<Edge> edges = h.edges();
  std::size_t n = h.vertex_count();
  check_letters(h.ambient(), g.letters);
  Vertex prev = SubgroupGraph::base;
  for (Letter l : g.letters) {
    const Vertex next = static_cast<Vertex>(n++);
    if (l > 0)
      edges.push_back({prev, l, next});
    else
      edges.push_back({next, -l, prev});
    prev = next;
  }
  return SubgroupGraph::fold(h.rank(), n, edges, false);
}

namespace detail {

/// Hall completions of `h` other than the index-order one, tried in
/// lexicographic order of the sink assignments, at most `cap` of them.
inline std::optional<CosetTable> completion_missing(const SubgroupGraph& h, const FreeWord& g, std::size_t cap) {
  const std::size_t d = h.vertex_count();
  const int r = h.rank();
  std::vector<std::vector<State>> fixed(r, std::vector<State>(d, 0));
  std::vector<std::vector<Vertex>> sources(r), sinks(r);
  for (int k = 1; k <= r; ++k) {
    std::vector<bool> has_in(d, false);
    for (Vertex v = 0; v < d; ++v) {
      if (auto t = h.follow(v, k)) {
        fixed[k - 1][v] = *t;
        has_in[*t] = true;
      } else {
        sources[k - 1].push_back(v);
      }
    }
    for (Vertex v = 0; v < d; ++v)
      if (!has_in[v]) sinks[k - 1].push_back(v);
  }
  for (std::size_t tried = 0; tried < cap; ++tried) {
    auto forward = fixed;
    for (int k = 0; k < r; ++k)
      for (std::size_t i = 0; i < sources[k].size(); ++i) forward[k][sources[k][i]] = sinks[k][i];
    CosetTable t(r, std::move(forward));
    if (!t.stabilizes(g)) return t;
    int k = 0;
    while (k < r && !std::next_permutation(sinks[k].begin(), sinks[k].end())) ++k;
    if (k == r) break;
  }
  return std::nullopt;
}

/// Whether the graph of `h` maps onto the Schreier graph of `perms` with the
/// base going to 0, that is whether the stabilizer of 0 contains H.
inline bool graph_maps_into(const SubgroupGraph& h, const std::vector<const std::vector<State>*>& perms,
                            const std::vector<std::vector<State>>& inverses) {
  std::vector<std::optional<State>> image(h.vertex_count());
  image[SubgroupGraph::base] = 0;
  std::vector<Vertex> stack{SubgroupGraph::base};
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (int k = 1; k <= h.rank(); ++k)
      for (Letter l : {k, -k}) {
        const auto t = h.follow(v, l);
        if (!t) continue;
        const State u = l > 0 ? (*perms[k - 1])[*image[v]] : inverses[k - 1][*image[v]];
        if (!image[*t]) {
          image[*t] = u;
          stack.push_back(*t);
        } else if (*image[*t] != u) {
          return false;
        }
      }
  }
  return true;
}

/// The smallest permutation representation of degree at most `max_degree`
/// whose point-0 stabilizer contains H but not g, restricted to the orbit of
/// 0. Gives up once `cap` generator tuples have been examined.
inline std::optional<CosetTable> small_quotient_missing(const SubgroupGraph& h, const FreeWord& g,
                                                        std::size_t max_degree, std::size_t cap) {
  const int r = h.rank();
  std::size_t examined = 0;
  for (std::size_t d = 2; d <= max_degree; ++d) {
    std::vector<std::vector<State>> all;
    std::vector<State> p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = static_cast<State>(i);
    do all.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    std::vector<std::vector<State>> inv(all.size(), std::vector<State>(d));
    for (std::size_t j = 0; j < all.size(); ++j)
      for (std::size_t i = 0; i < d; ++i) inv[j][all[j][i]] = static_cast<State>(i);
    std::vector<std::size_t> idx(r, 0);
    while (true) {
      if (examined++ >= cap) return std::nullopt;
      std::vector<const std::vector<State>*> perms;
      std::vector<std::vector<State>> inverses;
      for (int k = 0; k < r; ++k) {
        perms.push_back(&all[idx[k]]);
        inverses.push_back(inv[idx[k]]);
      }
      State end = 0;
      for (Letter l : g.letters) end = l > 0 ? (*perms[l - 1])[end] : inverses[-l - 1][end];
      if (end != 0 && graph_maps_into(h, perms, inverses)) {
        std::vector<State> label(d, static_cast<State>(d));
        std::vector<State> order{0};
        label[0] = 0;
        for (std::size_t i = 0; i < order.size(); ++i)
          for (int k = 0; k < r; ++k)
            for (State u : {(*perms[k])[order[i]], inverses[k][order[i]]})
              if (label[u] == d) {
                label[u] = static_cast<State>(order.size());
                order.push_back(u);
              }
        std::vector<std::vector<State>> forward(r, std::vector<State>(order.size()));
        for (int k = 0; k < r; ++k)
          for (State u : order) forward[k][label[u]] = label[(*perms[k])[u]];
        return CosetTable(r, std::move(forward));
      }
      int k = 0;
      while (k < r && ++idx[k] == all.size()) idx[k++] = 0;
      if (k == r) break;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// A finite-index K with H <= K and g not in K. Tries, in order: the Hall
/// completion of H, other completions of H's graph, representations of
/// degree at most |V(H)| found by bounded search, and finally the
/// completion of H with the path of g attached.
inline CosetTable separate(const SubgroupGraph& h, const FreeWord& g) {
  if (member(g, h))
    throw precondition_error("separate: the element lies in the subgroup", to_string(h.ambient(), Element(g)));
  for (Letter l : g.letters)
    if (std::abs(l) > h.rank()) return hall_complete(attach_hair(h, g));
  CosetTable plain = hall_complete(h);
  if (!plain.stabilizes(g)) return plain;
  if (auto other = detail::completion_missing(h, g, 1000)) return *other;
  if (auto small = detail::small_quotient_missing(h, g, h.vertex_count(), 600000)) return *small;
  return hall_complete(attach_hair(h, g));
}

}  // namespace lerf
