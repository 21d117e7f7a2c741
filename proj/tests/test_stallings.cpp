#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace lerf;

namespace {

const MarkedGroup F2 = MarkedGroup::free(2);

SubgroupGraph graph(std::initializer_list<const char*> gens) {
  std::vector<Element> e;
  for (const char* g : gens) e.push_back(parse_element(F2, g));
  return graph_from_generators(F2, e);
}

FreeWord w(const char* text) { return parse_element(F2, text).free(); }

std::vector<std::vector<Letter>> letters_of(const std::vector<Element>& gens) {
  std::vector<std::vector<Letter>> out;
  for (const auto& g : gens) out.push_back(g.free().letters);
  return out;
}

/// Edge list after relabelling vertices in BFS order from the base.
std::set<std::tuple<Vertex, Letter, Vertex>> canonical_edges(const SubgroupGraph& h) {
  std::map<Vertex, Vertex> label{{SubgroupGraph::base, 0}};
  std::vector<Vertex> queue{SubgroupGraph::base};
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (Letter l : {1, -1, 2, -2})
      if (auto t = h.follow(queue[i], l))
        if (label.emplace(*t, static_cast<Vertex>(label.size())).second) queue.push_back(*t);
  std::set<std::tuple<Vertex, Letter, Vertex>> out;
  for (const Edge& e : h.edges()) out.emplace(label.at(e.from), e.generator, label.at(e.to));
  return out;
}

/// All reduced words of length <= n over F_2.
std::vector<FreeWord> all_words(int n) {
  std::vector<FreeWord> out;
  for (const Element& e : ball(F2, n)) out.push_back(e.free());
  return out;
}

}  // namespace

TEST(Graph, Examples) {
  const SubgroupGraph trivial = graph({});
  EXPECT_EQ(trivial.vertex_count(), 1u);
  EXPECT_TRUE(trivial.edges().empty());

  const SubgroupGraph a = graph({"a"});
  EXPECT_EQ(a.vertex_count(), 1u);
  ASSERT_EQ(a.edges().size(), 1u);
  EXPECT_EQ(a.edges()[0].generator, 1);

  const SubgroupGraph h = graph({"aa", "b", "abA"});
  EXPECT_TRUE(member(w("abA"), h));
  EXPECT_FALSE(member(w("a"), h));
  EXPECT_EQ(oracle::member(2, {{1, 1}, {2}, {1, 2, -1}}, {1, 2, -1}), std::optional<bool>(true));
  EXPECT_EQ(oracle::member(2, {{1, 1}, {2}, {1, 2, -1}}, {1}), std::optional<bool>(false));
}

TEST(Member, Examples) {
  const SubgroupGraph h = graph({"aa", "b"});
  EXPECT_TRUE(member(FreeWord{}, h));
  EXPECT_FALSE(member(w("a"), h));
  EXPECT_TRUE(member(w("aa"), h));
  EXPECT_TRUE(member(FreeWord{}, graph({"abab"})));
}

TEST(Member, ProductsOfGeneratorsAreMembers) {
  gen::Rng r(11);
  for (int i = 0; i < 200; ++i) {
    const auto gens = gen::subgroup_gens(r, F2, 3, 5);
    const SubgroupGraph h = graph_from_generators(F2, gens);
    Element prod = identity(F2);
    for (int j = 0; j < 3; ++j) {
      const Element& g = gens[static_cast<std::size_t>(r.uniform(0, static_cast<std::int64_t>(gens.size()) - 1))];
      prod = multiply(F2, prod, r.coin() ? g : invert(F2, g));
    }
    EXPECT_TRUE(member(prod.free(), h));
  }
}

TEST(Member, AgreesWithOracle) {
  gen::Rng r(12);
  const auto words = all_words(5);
  int decided = 0;
  for (int i = 0; i < 12; ++i) {
    const auto gens = gen::subgroup_gens(r, F2, 3, 3);
    const SubgroupGraph h = graph_from_generators(F2, gens);
    for (const FreeWord& x : words) {
      const bool got = member(x, h);
      EXPECT_EQ(got, member(inverse(x), h));
      const auto expect = oracle::member(2, letters_of(gens), x.letters, 4, 3);
      if (!expect) continue;
      ++decided;
      EXPECT_EQ(got, *expect) << to_string(F2, Element(x));
    }
  }
  EXPECT_GT(decided, 1000);
}

TEST(Fold, ConfluentUnderEdgeOrder) {
  gen::Rng r(13);
  for (int i = 0; i < 100; ++i) {
    const auto gens = gen::subgroup_gens(r, F2, 3, 6);
    std::vector<Edge> edges;
    std::size_t n = 1;
    for (const Element& g : gens) add_loop(edges, n, g.free());
    const auto reference = canonical_edges(SubgroupGraph::fold(2, n, edges, true));
    for (int k = 0; k < 4; ++k) {
      std::shuffle(edges.begin(), edges.end(), r.engine);
      EXPECT_EQ(canonical_edges(SubgroupGraph::fold(2, n, edges, true)), reference);
    }
  }
}

TEST(HallComplete, Examples) {
  const CosetTable k1 = hall_complete(graph({"a"}));
  EXPECT_EQ(k1.degree(), 1u);
  EXPECT_TRUE(k1.stabilizes(w("b")));

  const CosetTable k2 = hall_complete(graph({"aa", "b"}));
  EXPECT_EQ(k2.degree(), 2u);
  EXPECT_EQ(k2.image(1), (std::vector<State>{1, 0}));
  EXPECT_EQ(k2.image(2), (std::vector<State>{0, 1}));
}

TEST(HallComplete, ExtendsGraph) {
  gen::Rng r(14);
  for (int i = 0; i < 300; ++i) {
    const auto gens = gen::subgroup_gens(r, F2, 3, 6);
    const SubgroupGraph h = graph_from_generators(F2, gens);
    const CosetTable k = hall_complete(h);
    EXPECT_EQ(k.degree(), h.vertex_count());
    EXPECT_TRUE(oracle::transitive(k));
    for (const Edge& e : h.edges()) EXPECT_EQ(k.image(e.generator)[e.from], e.to);
    for (const Element& g : gens) EXPECT_TRUE(k.stabilizes(g.free()));
  }
}

TEST(Separate, Examples) {
  const CosetTable k = separate(graph({"aa", "b"}), w("a"));
  EXPECT_EQ(k.degree(), 2u);
  EXPECT_FALSE(k.stabilizes(w("a")));

  const CosetTable t = separate(graph({}), w("a"));
  EXPECT_EQ(t.degree(), 2u);
  EXPECT_NE(t.read(0, w("a")), 0u);

  const CosetTable c = separate(graph({"abAB"}), w("a"));
  EXPECT_TRUE(c.stabilizes(w("abAB")));
  EXPECT_FALSE(c.stabilizes(w("a")));

  try {
    separate(graph({"aa", "b"}), w("aab"));
    FAIL();
  } catch (const precondition_error& e) {
    EXPECT_EQ(e.witness(), "aab");
  }
}

TEST(Separate, PostconditionsOnRandomInstances) {
  gen::Rng r(15);
  int done = 0;
  while (done < 1000) {
    const auto gens = gen::subgroup_gens(r, F2, 3, 5);
    const SubgroupGraph h = graph_from_generators(F2, gens);
    const FreeWord g = reduce(gen::raw_word(r, 2, 8));
    if (member(g, h)) continue;
    ++done;
    const CosetTable k = separate(h, g);
    EXPECT_TRUE(oracle::transitive(k));
    EXPECT_LE(k.degree(), h.vertex_count() + g.size());
    for (const Element& x : gens) EXPECT_TRUE(k.stabilizes(x.free()));
    EXPECT_FALSE(k.stabilizes(g));
  }
}

TEST(TableMembership, SubgroupClosure) {
  const CosetTable k = separate(graph({"aa", "b"}), w("a"));
  EXPECT_TRUE(k.stabilizes(FreeWord{}));
  gen::Rng r(16);
  for (int i = 0; i < 300; ++i) {
    const FreeWord x = reduce(gen::raw_word(r, 2, 8));
    const FreeWord y = reduce(gen::raw_word(r, 2, 8));
    EXPECT_EQ(k.stabilizes(x), k.stabilizes(inverse(x)));
    if (k.stabilizes(x) && k.stabilizes(y)) {
      EXPECT_TRUE(k.stabilizes(concat(x, y)));
    }
  }
}

TEST(CosetTable, RejectsBadInput) {
  EXPECT_THROW(CosetTable(1, {{0, 0}}), std::invalid_argument);
  EXPECT_THROW(CosetTable(1, {{0, 1}}), std::invalid_argument);  // not transitive
  EXPECT_THROW(CosetTable(2, {{1, 0}}), std::invalid_argument);
}

TEST(Separate, SmallIndexWheneverOneExists) {
  gen::Rng r(17);
  int within = 0, impossible = 0;
  for (int i = 0; i < 300; ++i) {
    const auto gens = gen::subgroup_gens(r, F2, 3, 4);
    const SubgroupGraph h = graph_from_generators(F2, gens);
    const FreeWord g = reduce(gen::raw_word(r, 2, 7));
    if (member(g, h) || h.vertex_count() > 5) continue;
    const CosetTable k = separate(h, g);
    const bool found = oracle::member(2, letters_of(gens), g.letters, 0, static_cast<int>(h.vertex_count())) ==
                       std::optional<bool>(false);
    EXPECT_EQ(k.degree() <= h.vertex_count(), found) << to_string(F2, Element(g));
    (found ? within : impossible)++;
  }
  EXPECT_GT(within, 50);
  EXPECT_GT(impossible, 10);
}
