#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace lerf;

namespace {

const MarkedGroup F2 = MarkedGroup::free(2);
const MarkedGroup BS2 = MarkedGroup::baumslag_solitar(2);

std::vector<Letter> inverse_letters(std::vector<Letter> w) {
  std::reverse(w.begin(), w.end());
  for (Letter& l : w) l = -l;
  return w;
}

}  // namespace

TEST(FreeReduce, Examples) {
  EXPECT_TRUE(reduce(std::vector<Letter>{1, -1}).empty());
  EXPECT_EQ(reduce(std::vector<Letter>{1, 2, -2, 1}).letters, (std::vector<Letter>{1, 1}));
  EXPECT_EQ(parse_element(F2, "abBa"), parse_element(F2, "aa"));
}

TEST(FreeReduce, WordTimesInverseIsEmpty) {
  gen::Rng r(1);
  for (int i = 0; i < 200; ++i) {
    auto w = gen::raw_word(r, 2, 12);
    const auto rw = reduce(w).letters;
    std::vector<Letter> cat(rw);
    const auto inv = inverse_letters(rw);
    cat.insert(cat.end(), inv.begin(), inv.end());
    EXPECT_TRUE(reduce(cat).empty());
  }
}

TEST(FreeReduce, AgreesWithRescanOracle) {
  gen::Rng r(2);
  for (int i = 0; i < 500; ++i) {
    const auto w = gen::raw_word(r, 3, 16);
    EXPECT_EQ(reduce(w).letters, oracle::reduce(w));
  }
}

TEST(FreeReduce, Confluence) {
  // Cancelling pairs in a random order reaches the same word.
  gen::Rng r(3);
  for (int i = 0; i < 300; ++i) {
    auto w = gen::raw_word(r, 2, 14);
    const auto expect = reduce(w).letters;
    while (true) {
      std::vector<std::size_t> spots;
      for (std::size_t j = 0; j + 1 < w.size(); ++j)
        if (w[j] == -w[j + 1]) spots.push_back(j);
      if (spots.empty()) break;
      const std::size_t j = spots[static_cast<std::size_t>(r.uniform(0, static_cast<std::int64_t>(spots.size()) - 1))];
      w.erase(w.begin() + static_cast<std::ptrdiff_t>(j), w.begin() + static_cast<std::ptrdiff_t>(j) + 2);
    }
    EXPECT_EQ(w, expect);
  }
}

TEST(FreeGroup, MultiplyInvert) {
  gen::Rng r(4);
  for (int i = 0; i < 200; ++i) {
    const Element a = gen::free_element(r, F2, 10);
    const Element b = gen::free_element(r, F2, 10);
    EXPECT_TRUE(is_identity(F2, multiply(F2, a, invert(F2, a))));
    auto cat = a.free().letters;
    cat.insert(cat.end(), b.free().letters.begin(), b.free().letters.end());
    EXPECT_EQ(multiply(F2, a, b).free().letters, oracle::reduce(cat));
  }
}

TEST(BSNormalForm, Examples) {
  EXPECT_EQ(bs_normal_form(2, std::vector<Letter>{-2, 1, 2}), (BSWord{0, 2, 0}));
  EXPECT_EQ(bs_normal_form(2, std::vector<Letter>{}), (BSWord{0, 0, 0}));
  EXPECT_EQ(bs_normal_form(2, std::vector<Letter>{-2, 1, 1, 2}), (BSWord{0, 4, 0}));
  EXPECT_EQ(parse_element(BS2, "Tst"), Element(BSWord{0, 2, 0}));
  // (0,4,0) checked against the affine image.
  EXPECT_EQ(oracle::affine_bs(2, BSWord{0, 4, 0}), oracle::affine_word(2, {-2, 1, 1, 2}));
}

TEST(BSNormalForm, MatchesAffineImage) {
  gen::Rng r(5);
  for (int n : {2, 3, 5}) {
    for (int i = 0; i < 300; ++i) {
      const auto w = gen::raw_word(r, 2, 10);
      const BSWord nf = bs_normal_form(n, w);
      EXPECT_TRUE(bs_is_reduced(n, nf));
      EXPECT_EQ(oracle::affine_bs(n, nf), oracle::affine_word(n, w)) << "n=" << n;
    }
  }
}

TEST(BSNormalForm, HomomorphismCompatible) {
  gen::Rng r(6);
  for (int i = 0; i < 300; ++i) {
    const auto u = gen::raw_word(r, 2, 8);
    const auto v = gen::raw_word(r, 2, 8);
    std::vector<Letter> uv(u);
    uv.insert(uv.end(), v.begin(), v.end());
    const BSWord lhs = bs_normal_form(2, uv);
    const BSWord rhs = bs_multiply(2, bs_normal_form(2, u), bs_normal_form(2, v));
    EXPECT_EQ(lhs, rhs);
    EXPECT_TRUE(bs_is_reduced(2, rhs));
  }
}

TEST(BSNormalForm, MultiplyAgreesWithWordPath) {
  const Element s = generator(BS2, 1), t = generator(BS2, 2);
  EXPECT_EQ(multiply(BS2, s, t), parse_element(BS2, "st"));
  EXPECT_EQ(multiply(BS2, s, t).bs(), bs_normal_form(2, std::vector<Letter>{1, 2}));
  EXPECT_TRUE(is_identity(BS2, multiply(BS2, parse_element(BS2, "tsT"), invert(BS2, parse_element(BS2, "tsT")))));
}

TEST(FreeProduct, SyllablesAlternate) {
  const MarkedGroup g = MarkedGroup::free_product(MarkedGroup::free(1), MarkedGroup::free(1));
  const Element g1 = embed(g, Side::left, generator(g.left(), 1));
  const Element k1 = embed(g, Side::right, generator(g.right(), 1));
  EXPECT_EQ(syllable_length(multiply(g, g1, k1)), 2u);

  gen::Rng r(7);
  for (int i = 0; i < 200; ++i) {
    Element a = identity(g), b = identity(g);
    for (int j = 0; j < 4; ++j) {
      const Side side = r.coin() ? Side::left : Side::right;
      a = multiply(g, a, embed(g, side, from_letters(g.factor(side), gen::raw_word(r, 1, 3))));
      b = multiply(g, b, embed(g, side, from_letters(g.factor(side), gen::raw_word(r, 1, 3))));
    }
    const Element ab = multiply(g, a, b);
    const auto& syl = ab.product().syllables;
    for (std::size_t j = 0; j + 1 < syl.size(); ++j) EXPECT_NE(syl[j].side, syl[j + 1].side);
    for (const auto& s : syl) EXPECT_FALSE(is_identity(g.factor(s.side), s.value));
    EXPECT_TRUE(is_identity(g, multiply(g, ab, invert(g, ab))));
  }
}

TEST(FreeProduct, BSFactor) {
  const MarkedGroup g = MarkedGroup::free_product(BS2, MarkedGroup::free(1));
  const Element w = parse_element(g, "L(Tst) R(a)");
  EXPECT_EQ(to_string(g, w), to_string(g, parse_element(g, "L(ss)R(a)")));
  EXPECT_TRUE(is_identity(g, multiply(g, w, invert(g, w))));
}

TEST(Ball, FreeGroupSizes) {
  EXPECT_EQ(ball(F2, 1).size(), 5u);
  EXPECT_EQ(ball(F2, 2).size(), 17u);
  for (int n = 1; n <= 3; ++n)
    for (int radius = 0; radius <= 4; ++radius) {
      std::size_t expect = 1, sphere = 2 * n;
      for (int k = 1; k <= radius; ++k) {
        expect += sphere;
        sphere *= 2 * n - 1;
      }
      EXPECT_EQ(ball(MarkedGroup::free(n), radius).size(), expect) << n << " " << radius;
    }
}

TEST(Ball, BSDedupedByNormalForm) {
  // Every word of length <= 2, deduplicated pairwise by the affine image.
  std::vector<oracle::Affine> distinct;
  std::vector<std::vector<Letter>> words{{}};
  for (Letter a : {1, -1, 2, -2}) {
    words.push_back({a});
    for (Letter b : {1, -1, 2, -2}) words.push_back({a, b});
  }
  for (const auto& w : words) {
    const auto f = oracle::affine_word(2, w);
    if (std::find(distinct.begin(), distinct.end(), f) == distinct.end()) distinct.push_back(f);
  }
  const auto b = ball(BS2, 2);
  EXPECT_EQ(b.size(), distinct.size());
  std::set<Element> unique(b.begin(), b.end());
  EXPECT_EQ(unique.size(), b.size());
}

TEST(Ball, FInfinityNeedsCutoff) {
  const MarkedGroup g = MarkedGroup::free_infinite();
  EXPECT_THROW(ball(g, 1), std::domain_error);
  EXPECT_EQ(ball(g, 1, 3).size(), 7u);
}

TEST(Parse, RoundTrip) {
  gen::Rng r(8);
  for (int i = 0; i < 100; ++i) {
    const Element e = gen::free_element(r, F2, 8);
    EXPECT_EQ(parse_element(F2, to_string(F2, e)), e);
  }
  const MarkedGroup finf = MarkedGroup::free_infinite();
  const Element big = from_letters(finf, std::vector<Letter>{30, -2, 1});
  EXPECT_EQ(parse_element(finf, to_string(finf, big)), big);
  EXPECT_EQ(parse_element(BS2, to_string(BS2, Element(BSWord{1, 3, 2}))), Element(BSWord{1, 3, 2}));
  EXPECT_EQ(parse_element(F2, "1"), identity(F2));
}

TEST(Parse, Rejects) {
  EXPECT_THROW(parse_element(F2, "c"), std::domain_error);
  EXPECT_THROW(parse_element(F2, "a?"), std::invalid_argument);
  EXPECT_THROW(parse_element(BS2, "a"), std::invalid_argument);
  EXPECT_THROW(MarkedGroup::baumslag_solitar(1), std::domain_error);
}

TEST(Overflow, CheckedArithmetic) {
  EXPECT_THROW(detail::checked_pow(2, 70), encoding_error);
  EXPECT_THROW(detail::checked_mul(INT64_MAX, 2), encoding_error);
}
