#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace lerf;

namespace {

const MarkedGroup F1 = MarkedGroup::free(1);
const MarkedGroup F2 = MarkedGroup::free(2);
const MarkedGroup BS2 = MarkedGroup::baumslag_solitar(2);

Element e(const char* text) { return parse_element(F2, text); }

SubgroupGraph graph(std::initializer_list<const char*> gens) {
  std::vector<Element> v;
  for (const char* g : gens) v.push_back(e(g));
  return graph_from_generators(F2, v);
}

std::vector<ActionExpr> zoo() {
  gen::Rng r(80);
  const ActionExpr fs = ActionExpr::fin_supp(F2, {gen::finite_perm(r, 7), gen::finite_perm(r, 7)});
  return {fs,
          ActionExpr::translation(F2),
          ActionExpr::affine_bs(3),
          ActionExpr::schreier(graph({"aa", "bab"})),
          ActionExpr::coset(2, {{separate(graph({"aa", "b"}), e("a").free()), {4, 9}}}),
          ActionExpr::conjugate(fs, PinnedBijection({{0, 10}, {10, 3}, {3, 0}})),
          ActionExpr::disjoint_union({fs, ActionExpr::translation(F2)}),
          ActionExpr::augment(ActionExpr::schreier(graph({"ab"}))),
          ActionExpr::freeze(fs, {0, 1}),
          ActionExpr::free_product(ActionExpr::translation(F1), ActionExpr::fin_supp(F1, {FinitePerm::transposition(0, 5)})),
          ActionExpr::trivial(MarkedGroup::free_infinite())};
}

Element sample(gen::Rng& r, const MarkedGroup& g) {
  if (g.kind() == MarkedGroup::Kind::free_product) {
    Element out = identity(g);
    for (int i = 0; i < 3; ++i) {
      const Side side = r.coin() ? Side::left : Side::right;
      out = multiply(g, out, embed(g, side, from_letters(g.factor(side), gen::raw_word(r, 1, 3))));
    }
    return out;
  }
  const int rank = g.kind() == MarkedGroup::Kind::free ? g.rank() : 2;
  return from_letters(g, gen::raw_word(r, rank, 6));
}

}  // namespace

TEST(GroupJson, RoundTrip) {
  for (const MarkedGroup& g : {F1, F2, BS2, MarkedGroup::free_infinite(), MarkedGroup::free_product(BS2, F1),
                               MarkedGroup::free_product(MarkedGroup::free_product(F1, F1), F2)}) {
    EXPECT_TRUE(group_from_json(to_json(g)) == g) << g.name();
    EXPECT_TRUE(parse_group(to_json(g).dump()) == g);
  }
  EXPECT_TRUE(parse_group("f2") == F2);
  EXPECT_TRUE(parse_group("BS2") == BS2);
  EXPECT_TRUE(parse_group("finf") == MarkedGroup::free_infinite());
  EXPECT_TRUE(parse_group("f1*f1") == MarkedGroup::free_product(F1, F1));
  EXPECT_TRUE(parse_group("(f1*f1)*bs3") == MarkedGroup::free_product(MarkedGroup::free_product(F1, F1), MarkedGroup::baumslag_solitar(3)));
  EXPECT_THROW(parse_group("z2"), std::invalid_argument);
  EXPECT_THROW(group_from_json(json{{"kind", "cyclic"}}), std::invalid_argument);
}

TEST(ElementJson, RoundTrip) {
  gen::Rng r(81);
  for (const MarkedGroup& g : {F2, BS2, MarkedGroup::free_infinite(), MarkedGroup::free_product(BS2, F1)})
    for (int i = 0; i < 100; ++i) {
      const Element x = sample(r, g);
      EXPECT_EQ(element_from_json(g, to_json(g, x)), x);
      EXPECT_EQ(element_from_json(g, json(to_string(g, x))), x);
    }
  EXPECT_THROW(element_from_json(BS2, json::array({1, 2, 1})), std::domain_error);  // t s^2 t^-1 = s
  EXPECT_THROW(element_from_json(F2, json::array({0, 1, 0})), std::invalid_argument);
  const auto list = parse_element_list(MarkedGroup::free_product(F1, F1), "L(a),R(aa), L(A)R(a)");
  EXPECT_EQ(list.size(), 3u);
  EXPECT_EQ(parse_element_list(F2, "aa,b,").size(), 2u);
}

TEST(SubgroupJson, GraphsAndTables) {
  gen::Rng r(82);
  for (int i = 0; i < 50; ++i) {
    const SubgroupGraph h = graph_from_generators(F2, gen::subgroup_gens(r, F2, 3, 5));
    const SubgroupGraph h2 = graph_from_json(to_json(h));
    EXPECT_EQ(to_json(h2), to_json(h));
    const CosetTable t = hall_complete(h);
    const CosetTable t2 = table_from_json(to_json(t));
    for (int g = 1; g <= 2; ++g) EXPECT_EQ(t2.image(g), t.image(g));
    for (const Element& w : ball(F2, 3)) EXPECT_EQ(member(w.free(), h2), member(w.free(), h));
  }
  const std::string dot = to_dot(graph({"aa", "b"}));
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("label=\"a\""), std::string::npos);
  EXPECT_THROW(table_from_json(json{{"rank", 1}, {"degree", 2}, {"images", {{"a", {0, 0}}}}}), std::exception);
}

TEST(SubgroupJson, HandlesAndBalls) {
  const std::vector<SubgroupHandle> handles{SubgroupHandle::words(F2, {e("aa"), e("b")}), SubgroupHandle::graph(graph({"ab"})),
                                            SubgroupHandle::table(hall_complete(graph({"aa", "b"}))),
                                            SubgroupHandle::bs_cyclic(2, BSWord{0, 2, 0})};
  gen::Rng r(83);
  for (const SubgroupHandle& h : handles) {
    const SubgroupHandle back = handle_from_json(to_json(h));
    EXPECT_EQ(back.kind(), h.kind());
    EXPECT_EQ(to_json(back), to_json(h));
    for (int i = 0; i < 100; ++i) {
      const Element x = sample(r, h.ambient());
      EXPECT_EQ(back.contains(x), h.contains(x));
    }
  }
  const SubgroupHandle pred = SubgroupHandle::predicate(F2, "all", [](const Element&) { return true; });
  EXPECT_THROW(handle_from_json(to_json(pred)), std::invalid_argument);

  const ChabautyBall b{handles[0], ball(F2, 2)};
  const ChabautyBall b2 = ball_from_json(to_json(b));
  EXPECT_EQ(b2.window, b.window);
  EXPECT_TRUE(in_ball(b2.center, b));
}

TEST(ActionJson, RoundTripEveryKind) {
  gen::Rng r(84);
  for (const ActionExpr& act : zoo()) {
    const json j = to_json(act);
    const ActionExpr back = action_from_json(j);
    EXPECT_EQ(to_json(back), j) << act.kind();
    EXPECT_EQ(back.kind(), act.kind());
    EXPECT_TRUE(back.group() == act.group());
    for (int i = 0; i < 100; ++i) {
      const Element g = sample(r, act.group());
      const Point x = static_cast<Point>(r.uniform(0, 30));
      EXPECT_EQ(back.evaluate(g, x), act.evaluate(g, x)) << act.kind();
    }
  }
  EXPECT_THROW(action_from_json(json{{"kind", "teleport"}}), std::invalid_argument);
}

TEST(ActionJson, ConstraintsAndOrbits) {
  const ActionConstraint c{ActionExpr::schreier(graph({"a"})), {e("a"), e("b")}, {0, 1, 2}};
  const ActionConstraint back = constraint_from_json(to_json(c));
  EXPECT_EQ(back.elements, c.elements);
  EXPECT_EQ(back.points, c.points);
  EXPECT_TRUE(back.contains(c.base));
  EXPECT_TRUE(c.contains(back.base));

  const Orbit o = orbit(ActionExpr::affine_bs(2), 0, 10);
  const json j = to_json(o);
  EXPECT_EQ(j.at("orbit").size(), 10u);
  EXPECT_TRUE(j.at("exceeded_budget").get<bool>());
  EXPECT_FALSE(to_json(orbit(ActionExpr::trivial(F2), 4, 10)).contains("exceeded_budget"));
  const std::string dot = schreier_dot(ActionExpr::fin_supp(F2, {FinitePerm::transposition(0, 1)}), orbit(ActionExpr::fin_supp(F2, {FinitePerm::transposition(0, 1)}), 0, 10));
  EXPECT_NE(dot.find("0 -> 1"), std::string::npos);
}

TEST(CertificateJson, RoundTripIsExact) {
  const ActionExpr bs = ActionExpr::affine_bs(2);
  auto c = folner_search(bs, encode_nadic(2, NAdic{0, 0}), std::vector<Element>{generator(BS2, 1), generator(BS2, 2)},
                         Rational(1, 2), 10000);
  ASSERT_TRUE(c.ok());
  const json j = to_json(BS2, *c);
  const FolnerCertificate back = certificate_from_json(BS2, j);
  EXPECT_EQ(back.f, c->f);
  EXPECT_EQ(back.omega, c->omega);
  EXPECT_EQ(back.ratios, c->ratios);
  EXPECT_EQ(back.epsilon, c->epsilon);
  EXPECT_EQ(to_json(BS2, back), j);
  auto again = folner_check(bs, back.f, back.omega, back.epsilon);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again->ratios, back.ratios);
  EXPECT_EQ(rational_text(Rational(-6, 4)), "-3/2");
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational("2"), Rational(2));
}

TEST(ScheduleJson, MatchesDirectRun) {
  const json schedule = json::parse(R"([{"provider":"finite_orbit","H":["a","b"],"x":0},
                                         {"provider":"finite_orbit","H":["ab"],"x":1}])");
  const auto providers = schedule_from_json(F2, schedule, 10000);
  ASSERT_EQ(providers.size(), 2u);
  const ActionConstraint init{ActionExpr::schreier(graph({})), {}, {}};
  const FusionRun a = run_fusion(providers, init);
  const FusionRun b = run_fusion({provider_finite_orbit({e("a"), e("b")}, 0), provider_finite_orbit({e("ab")}, 1)}, init);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_TRUE(a.verified());
  EXPECT_THROW(schedule_from_json(F2, json::parse(R"([{"provider":"wish"}])"), 10), std::invalid_argument);
}
