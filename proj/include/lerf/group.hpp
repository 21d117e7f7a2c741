#pragma once

// Marked groups with a solvable word problem: F_n, F_infinity, BS(1,n) and
// free products of these. Elements are kept in normal form at all times.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "lerf/core.hpp"

namespace lerf {

/// Signed generator index: +i is the i-th marked generator, -i its inverse.
using Letter = std::int32_t;

/// Position of a letter in the canonical order a < A < b < B < ...
inline int letter_slot(Letter l) { return 2 * (std::abs(l) - 1) + (l < 0 ? 1 : 0); }

inline Letter slot_letter(int slot) { return (slot % 2 == 0) ? (slot / 2 + 1) : -(slot / 2 + 1); }

/// A freely reduced word. The empty word is the identity.
struct FreeWord {
  std::vector<Letter> letters;

  bool empty() const noexcept { return letters.empty(); }
  std::size_t size() const noexcept { return letters.size(); }

  friend bool operator==(const FreeWord&, const FreeWord&) = default;
  /// Shortlex in the canonical letter order.
  friend bool operator<(const FreeWord& a, const FreeWord& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.letters.begin(), a.letters.end(), b.letters.begin(),
                                        b.letters.end(),
                                        [](Letter x, Letter y) { return letter_slot(x) < letter_slot(y); });
  }
};

/// Normal form t^p s^m t^{-q} of an element of BS(1,n). Reduced means
/// p > 0 and q > 0 imply that n does not divide m.
struct BSWord {
  std::int64_t p = 0;
  std::int64_t m = 0;
  std::int64_t q = 0;

  friend bool operator==(const BSWord&, const BSWord&) = default;
  friend bool operator<(const BSWord& a, const BSWord& b) {
    auto key = [](const BSWord& w) { return std::make_tuple(w.p + w.q + (w.m < 0 ? -w.m : w.m), w.p, w.q, w.m); };
    return key(a) < key(b);
  }
};

enum class Side : std::uint8_t { left = 0, right = 1 };

inline Side other(Side s) { return s == Side::left ? Side::right : Side::left; }

struct Syllable;

/// Alternating syllables g_k k_k ... g_1 k_1, no syllable trivial.
struct FreeProductWord {
  std::vector<Syllable> syllables;

  bool operator==(const FreeProductWord& o) const;
  bool operator<(const FreeProductWord& o) const;
};

struct Element {
  std::variant<FreeWord, BSWord, FreeProductWord> value;

  Element() = default;
  Element(FreeWord w) : value(std::move(w)) {}
  Element(BSWord w) : value(w) {}
  Element(FreeProductWord w) : value(std::move(w)) {}

  const FreeWord& free() const { return std::get<FreeWord>(value); }
  const BSWord& bs() const { return std::get<BSWord>(value); }
  const FreeProductWord& product() const { return std::get<FreeProductWord>(value); }

  bool operator==(const Element& o) const { return value == o.value; }
  bool operator<(const Element& o) const { return value < o.value; }
};

struct Syllable {
  Side side = Side::left;
  Element value;

  bool operator==(const Syllable& o) const { return side == o.side && value == o.value; }
  bool operator<(const Syllable& o) const {
    if (side != o.side) return side < o.side;
    return value < o.value;
  }
};

inline bool FreeProductWord::operator==(const FreeProductWord& o) const { return syllables == o.syllables; }

inline bool FreeProductWord::operator<(const FreeProductWord& o) const {
  if (syllables.size() != o.syllables.size()) return syllables.size() < o.syllables.size();
  return syllables < o.syllables;
}

class MarkedGroup {
 public:
  enum class Kind { free, free_infinite, baumslag_solitar, free_product };

  MarkedGroup() = default;

  static MarkedGroup free(int rank) {
    if (rank < 0) throw std::domain_error("free group rank must be nonnegative");
    MarkedGroup g;
    g.kind_ = Kind::free;
    g.param_ = rank;
    return g;
  }
  static MarkedGroup free_infinite() {
    MarkedGroup g;
    g.kind_ = Kind::free_infinite;
    return g;
  }
  static MarkedGroup baumslag_solitar(int n) {
    if (n < 2) throw std::domain_error("BS(1,n) requires n >= 2");
    MarkedGroup g;
    g.kind_ = Kind::baumslag_solitar;
    g.param_ = n;
    return g;
  }
  static MarkedGroup free_product(MarkedGroup left, MarkedGroup right) {
    MarkedGroup g;
    g.kind_ = Kind::free_product;
    g.left_ = std::make_shared<const MarkedGroup>(std::move(left));
    g.right_ = std::make_shared<const MarkedGroup>(std::move(right));
    return g;
  }

  Kind kind() const noexcept { return kind_; }
  bool is_free() const noexcept { return kind_ == Kind::free || kind_ == Kind::free_infinite; }
  int rank() const {
    if (kind_ != Kind::free) throw std::domain_error("rank() is defined for F_n only");
    return param_;
  }
  int bs_parameter() const {
    if (kind_ != Kind::baumslag_solitar) throw std::domain_error("not a Baumslag-Solitar group");
    return param_;
  }
  const MarkedGroup& left() const {
    if (kind_ != Kind::free_product) throw std::domain_error("not a free product");
    return *left_;
  }
  const MarkedGroup& right() const {
    if (kind_ != Kind::free_product) throw std::domain_error("not a free product");
    return *right_;
  }
  const MarkedGroup& factor(Side s) const { return s == Side::left ? left() : right(); }

  /// Number of marked generators; empty for F_infinity (and products containing it).
  std::optional<int> generator_count() const {
    switch (kind_) {
      case Kind::free: return param_;
      case Kind::free_infinite: return std::nullopt;
      case Kind::baumslag_solitar: return 2;
      case Kind::free_product: {
        auto l = left_->generator_count();
        auto r = right_->generator_count();
        if (!l || !r) return std::nullopt;
        return *l + *r;
      }
    }
    return std::nullopt;
  }

  friend bool operator==(const MarkedGroup& a, const MarkedGroup& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == Kind::free_product) return *a.left_ == *b.left_ && *a.right_ == *b.right_;
    return a.param_ == b.param_;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::free: return "F" + std::to_string(param_);
      case Kind::free_infinite: return "Finf";
      case Kind::baumslag_solitar: return "BS(1," + std::to_string(param_) + ")";
      case Kind::free_product: return "(" + left_->name() + "*" + right_->name() + ")";
    }
    return {};
  }

 private:
  Kind kind_ = Kind::free;
  int param_ = 0;
  std::shared_ptr<const MarkedGroup> left_;
  std::shared_ptr<const MarkedGroup> right_;
};

// ---------------------------------------------------------------- free words

/// Free reduction without validation.
inline FreeWord reduce(std::span<const Letter> letters) {
  FreeWord out;
  out.letters.reserve(letters.size());
  for (Letter l : letters) {
    if (!out.letters.empty() && out.letters.back() == -l)
      out.letters.pop_back();
    else
      out.letters.push_back(l);
  }
  return out;
}

inline void check_letters(const MarkedGroup& g, std::span<const Letter> letters) {
  if (!g.is_free()) throw std::domain_error("free reduction needs a free group, got " + g.name());
  for (Letter l : letters) {
    if (l == 0) throw std::domain_error("letter 0 is not a generator");
    if (g.kind() == MarkedGroup::Kind::free && std::abs(l) > g.rank())
      throw std::domain_error("generator index " + std::to_string(std::abs(l)) + " does not belong to " + g.name());
  }
}

inline FreeWord reduce(const MarkedGroup& g, std::span<const Letter> letters) {
  check_letters(g, letters);
  return reduce(letters);
}

inline FreeWord inverse(const FreeWord& w) {
  FreeWord out;
  out.letters.reserve(w.size());
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) out.letters.push_back(-*it);
  return out;
}

inline FreeWord concat(const FreeWord& a, const FreeWord& b) {
  std::vector<Letter> all(a.letters);
  all.insert(all.end(), b.letters.begin(), b.letters.end());
  return reduce(all);
}

// ------------------------------------------------------------------ BS(1,n)

namespace detail {

inline void bs_normalize(std::int64_t n, BSWord& w) {
  while (w.p > 0 && w.q > 0 && w.m % n == 0) {
    w.m /= n;
    --w.p;
    --w.q;
  }
}

/// Right-multiplies by s^k using t^{-q} s = s^{n^q} t^{-q}.
inline void bs_times_s(std::int64_t n, BSWord& w, std::int64_t k) {
  w.m = checked_add(w.m, checked_mul(k, checked_pow(n, w.q)));
  bs_normalize(n, w);
}

/// Right-multiplies by t, using s^m t = t s^{mn} when there is no t^{-1} to cancel.
inline void bs_times_t(std::int64_t n, BSWord& w) {
  if (w.q > 0) {
    --w.q;
  } else {
    ++w.p;
    w.m = checked_mul(w.m, n);
  }
  bs_normalize(n, w);
}

inline void bs_times_tinv(std::int64_t n, BSWord& w, std::int64_t k = 1) {
  w.q += k;
  bs_normalize(n, w);
}

}  // namespace detail

/// Generator 1 is s, generator 2 is t.
inline BSWord bs_normal_form(int n, std::span<const Letter> letters) {
  if (n < 2) throw std::domain_error("BS(1,n) requires n >= 2");
  BSWord w;
  for (Letter l : letters) {
    switch (l) {
      case 1: detail::bs_times_s(n, w, 1); break;
      case -1: detail::bs_times_s(n, w, -1); break;
      case 2: detail::bs_times_t(n, w); break;
      case -2: detail::bs_times_tinv(n, w); break;
      default: throw std::domain_error("BS(1,n) words use only s and t");
    }
  }
  return w;
}

inline BSWord bs_multiply(int n, const BSWord& a, const BSWord& b) {
  BSWord w = a;
  for (std::int64_t i = 0; i < b.p; ++i) detail::bs_times_t(n, w);
  detail::bs_times_s(n, w, b.m);
  detail::bs_times_tinv(n, w, b.q);
  return w;
}

inline BSWord bs_invert(const BSWord& a) { return BSWord{a.q, -a.m, a.p}; }

inline bool bs_is_reduced(int n, const BSWord& w) {
  if (w.p < 0 || w.q < 0) return false;
  return !(w.p > 0 && w.q > 0 && w.m % n == 0);
}

// ------------------------------------------------------- generic operations

inline Element identity(const MarkedGroup& g) {
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
    case MarkedGroup::Kind::free_infinite: return FreeWord{};
    case MarkedGroup::Kind::baumslag_solitar: return BSWord{};
    case MarkedGroup::Kind::free_product: return FreeProductWord{};
  }
  return {};
}

inline bool is_identity(const MarkedGroup& g, const Element& e) { return e == identity(g); }

inline void validate(const MarkedGroup& g, const Element& e) {
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
    case MarkedGroup::Kind::free_infinite: {
      if (!std::holds_alternative<FreeWord>(e.value)) throw std::domain_error("element is not a free word of " + g.name());
      const auto& w = e.free();
      check_letters(g, w.letters);
      if (reduce(w.letters) != w) throw std::domain_error("free word is not reduced");
      return;
    }
    case MarkedGroup::Kind::baumslag_solitar:
      if (!std::holds_alternative<BSWord>(e.value)) throw std::domain_error("element is not a BS normal form");
      if (!bs_is_reduced(g.bs_parameter(), e.bs())) throw std::domain_error("BS triple is not reduced");
      return;
    case MarkedGroup::Kind::free_product: {
      if (!std::holds_alternative<FreeProductWord>(e.value))
        throw std::domain_error("element is not a free product word of " + g.name());
      const auto& syl = e.product().syllables;
      for (std::size_t i = 0; i < syl.size(); ++i) {
        if (i > 0 && syl[i].side == syl[i - 1].side) throw std::domain_error("adjacent syllables from one factor");
        validate(g.factor(syl[i].side), syl[i].value);
        if (is_identity(g.factor(syl[i].side), syl[i].value)) throw std::domain_error("trivial syllable");
      }
      return;
    }
  }
}

inline Element multiply(const MarkedGroup& g, const Element& a, const Element& b);

inline Element invert(const MarkedGroup& g, const Element& a) {
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
    case MarkedGroup::Kind::free_infinite: return inverse(a.free());
    case MarkedGroup::Kind::baumslag_solitar: return bs_invert(a.bs());
    case MarkedGroup::Kind::free_product: {
      FreeProductWord out;
      const auto& syl = a.product().syllables;
      for (auto it = syl.rbegin(); it != syl.rend(); ++it)
        out.syllables.push_back(Syllable{it->side, invert(g.factor(it->side), it->value)});
      return out;
    }
  }
  return {};
}

inline Element multiply(const MarkedGroup& g, const Element& a, const Element& b) {
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
    case MarkedGroup::Kind::free_infinite: return concat(a.free(), b.free());
    case MarkedGroup::Kind::baumslag_solitar: return bs_multiply(g.bs_parameter(), a.bs(), b.bs());
    case MarkedGroup::Kind::free_product: {
      FreeProductWord out = a.product();
      for (const Syllable& s : b.product().syllables) {
        if (!out.syllables.empty() && out.syllables.back().side == s.side) {
          const MarkedGroup& f = g.factor(s.side);
          Element merged = multiply(f, out.syllables.back().value, s.value);
          if (is_identity(f, merged))
            out.syllables.pop_back();
          else
            out.syllables.back().value = std::move(merged);
        } else {
          out.syllables.push_back(s);
        }
      }
      return out;
    }
  }
  return {};
}

/// The marked generator with 1-based `index`, raised to `sign` (+1 or -1).
/// In a free product the left factor's generators come first.
inline Element generator(const MarkedGroup& g, int index, int sign = 1) {
  if (index < 1) throw std::domain_error("generator indices start at 1");
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
      if (index > g.rank()) throw std::domain_error("generator index out of range for " + g.name());
      [[fallthrough]];
    case MarkedGroup::Kind::free_infinite: return FreeWord{{sign > 0 ? index : -index}};
    case MarkedGroup::Kind::baumslag_solitar: {
      if (index > 2) throw std::domain_error("BS(1,n) has generators s and t only");
      const Letter l = sign > 0 ? index : -index;
      return bs_normal_form(g.bs_parameter(), std::span<const Letter>(&l, 1));
    }
    case MarkedGroup::Kind::free_product: {
      auto lc = g.left().generator_count();
      if (!lc) throw std::domain_error("left factor needs finitely many generators");
      if (index <= *lc) return FreeProductWord{{Syllable{Side::left, generator(g.left(), index, sign)}}};
      return FreeProductWord{{Syllable{Side::right, generator(g.right(), index - *lc, sign)}}};
    }
  }
  return {};
}

/// Evaluates a word in the marked generators.
inline Element from_letters(const MarkedGroup& g, std::span<const Letter> letters) {
  if (g.is_free()) return reduce(g, letters);
  if (g.kind() == MarkedGroup::Kind::baumslag_solitar) return bs_normal_form(g.bs_parameter(), letters);
  Element out = identity(g);
  for (Letter l : letters) out = multiply(g, out, generator(g, std::abs(l), l > 0 ? 1 : -1));
  return out;
}

/// Embeds an element of one factor as a single-syllable word.
inline Element embed(const MarkedGroup& product, Side side, const Element& e) {
  if (is_identity(product.factor(side), e)) return FreeProductWord{};
  return FreeProductWord{{Syllable{side, e}}};
}

/// Marked generators (positive letters). F_infinity needs a rank cutoff.
inline std::vector<Element> generators(const MarkedGroup& g, std::optional<int> rank_cutoff = std::nullopt) {
  std::optional<int> count = g.generator_count();
  if (g.kind() == MarkedGroup::Kind::free_infinite) {
    if (!rank_cutoff) throw std::domain_error("F_infinity needs an explicit rank cutoff");
    count = *rank_cutoff;
  }
  if (!count) throw std::domain_error("group has infinitely many marked generators: " + g.name());
  std::vector<Element> out;
  for (int i = 1; i <= *count; ++i) out.push_back(generator(g, i));
  return out;
}

/// All elements of word length <= radius, ordered by length, then by the
/// canonical element order within each sphere.
inline std::vector<Element> ball(const MarkedGroup& g, int radius, std::optional<int> rank_cutoff = std::nullopt) {
  if (radius < 0) throw std::domain_error("radius must be nonnegative");
  std::vector<Element> steps;
  for (const Element& gen : generators(g, rank_cutoff)) {
    steps.push_back(gen);
    steps.push_back(invert(g, gen));
  }
  std::set<Element> seen{identity(g)};
  std::vector<Element> out{identity(g)};
  std::vector<Element> sphere{identity(g)};
  for (int r = 1; r <= radius; ++r) {
    std::set<Element> next;
    for (const Element& e : sphere)
      for (const Element& s : steps) {
        Element prod = multiply(g, e, s);
        if (!seen.count(prod)) next.insert(prod);
      }
    sphere.assign(next.begin(), next.end());
    for (const Element& e : sphere) seen.insert(e);
    out.insert(out.end(), sphere.begin(), sphere.end());
  }
  return out;
}

/// Word length in the marked generators for normal forms whose length is
/// read off directly (free words and free products of free words).
inline std::size_t syllable_length(const Element& e) {
  if (auto* w = std::get_if<FreeProductWord>(&e.value)) return w->syllables.size();
  if (auto* w = std::get_if<FreeWord>(&e.value)) return w->size();
  const auto& b = e.bs();
  return static_cast<std::size_t>(b.p + b.q + (b.m < 0 ? -b.m : b.m));
}

struct GeneratorPower {
  int generator = 1;
  std::int64_t exponent = 0;

  friend bool operator==(const GeneratorPower&, const GeneratorPower&) = default;
};

/// Writes an element as a product of generator powers, leftmost first.
inline std::vector<GeneratorPower> expand(const MarkedGroup& g, const Element& e) {
  std::vector<GeneratorPower> out;
  auto push = [&out](int gen, std::int64_t exp) {
    if (exp == 0) return;
    if (!out.empty() && out.back().generator == gen)
      out.back().exponent += exp;
    else
      out.push_back({gen, exp});
    if (out.back().exponent == 0) out.pop_back();
  };
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
    case MarkedGroup::Kind::free_infinite:
      for (Letter l : e.free().letters) push(std::abs(l), l > 0 ? 1 : -1);
      break;
    case MarkedGroup::Kind::baumslag_solitar: {
      const auto& w = e.bs();
      push(2, w.p);
      push(1, w.m);
      push(2, -w.q);
      break;
    }
    case MarkedGroup::Kind::free_product: {
      auto lc = g.left().generator_count();
      for (const Syllable& s : e.product().syllables) {
        int offset = 0;
        if (s.side == Side::right) {
          if (!lc) throw std::domain_error("left factor needs finitely many generators");
          offset = *lc;
        }
        for (const GeneratorPower& gp : expand(g.factor(s.side), s.value)) push(gp.generator + offset, gp.exponent);
      }
      break;
    }
  }
  return out;
}

// ------------------------------------------------------------ text formats

inline std::string letter_name(const MarkedGroup& g, Letter l) {
  const int idx = std::abs(l);
  if (g.kind() == MarkedGroup::Kind::baumslag_solitar) {
    const char c = idx == 1 ? 's' : 't';
    return std::string(1, l > 0 ? c : static_cast<char>(std::toupper(c)));
  }
  if (idx <= 26) {
    const char c = static_cast<char>('a' + idx - 1);
    return std::string(1, l > 0 ? c : static_cast<char>(std::toupper(c)));
  }
  return (l > 0 ? "x_" : "X_") + std::to_string(idx);
}

inline std::string to_string(const MarkedGroup& g, const Element& e) {
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
    case MarkedGroup::Kind::free_infinite: {
      const auto& w = e.free();
      if (w.empty()) return "1";
      const bool spaced = std::any_of(w.letters.begin(), w.letters.end(), [](Letter l) { return std::abs(l) > 26; });
      std::string out;
      for (Letter l : w.letters) {
        if (spaced && !out.empty()) out += ' ';
        out += letter_name(g, l);
      }
      return out;
    }
    case MarkedGroup::Kind::baumslag_solitar: {
      const auto& w = e.bs();
      return "[" + std::to_string(w.p) + "," + std::to_string(w.m) + "," + std::to_string(w.q) + "]";
    }
    case MarkedGroup::Kind::free_product: {
      const auto& syl = e.product().syllables;
      if (syl.empty()) return "1";
      std::string out;
      for (const Syllable& s : syl) {
        if (!out.empty()) out += ' ';
        out += (s.side == Side::left ? "L(" : "R(") + to_string(g.factor(s.side), s.value) + ")";
      }
      return out;
    }
  }
  return {};
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<Letter> parse_letters(const MarkedGroup& g, const std::string& text) {
  std::vector<Letter> out;
  const bool bs = g.kind() == MarkedGroup::Kind::baumslag_solitar;
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(c)))
      throw std::invalid_argument("unexpected character '" + std::string(1, c) + "' in word '" + text + "'");
    const int sign = std::isupper(static_cast<unsigned char>(c)) ? -1 : 1;
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == 'x' && i + 1 < text.size() && text[i + 1] == '_') {
      std::size_t j = i + 2;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j == i + 2) throw std::invalid_argument("x_ must be followed by a generator index");
      out.push_back(sign * std::stoi(text.substr(i + 2, j - i - 2)));
      i = j;
      continue;
    }
    if (bs) {
      if (lower != 's' && lower != 't') throw std::invalid_argument("BS(1,n) words use s and t only");
      out.push_back(sign * (lower == 's' ? 1 : 2));
    } else {
      out.push_back(sign * (lower - 'a' + 1));
    }
    ++i;
  }
  return out;
}

}  // namespace detail

/// Parses "a b A" (uppercase = inverse, spaces optional), "x_27" for high
/// generators, "[p,m,q]" for BS(1,n), and "L(...) R(...)" syllables for
/// free products. "1" or "" is the identity.
inline Element parse_element(const MarkedGroup& g, const std::string& raw) {
  const std::string text = detail::trim(raw);
  if (text.empty() || text == "1") return identity(g);
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
    case MarkedGroup::Kind::free_infinite: return reduce(g, detail::parse_letters(g, text));
    case MarkedGroup::Kind::baumslag_solitar: {
      if (text.front() == '[') {
        if (text.back() != ']') throw std::invalid_argument("unterminated BS triple '" + text + "'");
        std::vector<std::int64_t> parts;
        std::string cur;
        for (char c : text.substr(1, text.size() - 2)) {
          if (c == ',') {
            parts.push_back(std::stoll(cur));
            cur.clear();
          } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
          }
        }
        parts.push_back(std::stoll(cur));
        if (parts.size() != 3) throw std::invalid_argument("BS triple needs three entries");
        BSWord w{parts[0], parts[1], parts[2]};
        if (!bs_is_reduced(g.bs_parameter(), w)) throw std::domain_error("BS triple is not reduced: " + text);
        return w;
      }
      return bs_normal_form(g.bs_parameter(), detail::parse_letters(g, text));
    }
    case MarkedGroup::Kind::free_product: {
      Element out = identity(g);
      std::size_t i = 0;
      while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
          ++i;
          continue;
        }
        if ((text[i] != 'L' && text[i] != 'R') || i + 1 >= text.size() || text[i + 1] != '(')
          throw std::invalid_argument("free product syllables look like L(...) or R(...): '" + text + "'");
        const Side side = text[i] == 'L' ? Side::left : Side::right;
        std::size_t j = i + 2;
        int depth = 1;
        while (j < text.size() && depth > 0) {
          if (text[j] == '(') ++depth;
          if (text[j] == ')') --depth;
          ++j;
        }
        if (depth != 0) throw std::invalid_argument("unbalanced parentheses in '" + text + "'");
        Element inner = parse_element(g.factor(side), text.substr(i + 2, j - i - 3));
        out = multiply(g, out, embed(g, side, inner));
        i = j;
      }
      return out;
    }
  }
  return {};
}

/// Sorts and deduplicates in the canonical element order.
inline std::vector<Element> canonical(std::vector<Element> elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  return elems;
}

}  // namespace lerf
