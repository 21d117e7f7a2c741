#pragma once

// Bijections between the natural numbers and the countable sets the actions
// live on, plus the two kinds of bijection of N used to build new actions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lerf/core.hpp"

namespace lerf {

inline Point zigzag(std::int64_t z) {
  return z >= 0 ? static_cast<Point>(z) * 2 : static_cast<Point>(-(z + 1)) * 2 + 1;
}

inline std::int64_t unzigzag(Point p) {
  if (p % 2 == 0) return static_cast<std::int64_t>(p / 2);
  return -static_cast<std::int64_t>(p / 2) - 1;
}

/// Cantor pairing N x N -> N.
inline Point pair(Point a, Point b) {
  using u128 = unsigned __int128;
  const u128 s = static_cast<u128>(a) + b;
  const u128 code = s * (s + 1) / 2 + b;
  if (code > static_cast<u128>(UINT64_MAX)) throw encoding_error("point does not fit in 64 bits");
  return static_cast<Point>(code);
}

inline std::pair<Point, Point> unpair(Point z) {
  using u128 = unsigned __int128;
  auto w = static_cast<u128>((std::sqrt(8.0L * static_cast<long double>(z) + 1.0L) - 1.0L) / 2.0L);
  while (w * (w + 1) / 2 > z) --w;
  while ((w + 1) * (w + 2) / 2 <= z) ++w;
  const u128 b = static_cast<u128>(z) - w * (w + 1) / 2;
  return {static_cast<Point>(w - b), static_cast<Point>(b)};
}

/// An element numerator / n^exponent of Z[1/n], kept reduced: exponent is 0
/// or n does not divide the numerator.
struct NAdic {
  std::int64_t numerator = 0;
  std::int64_t exponent = 0;

  friend bool operator==(const NAdic&, const NAdic&) = default;
};

namespace detail {

inline NAdic nadic_normalize(std::int64_t n, NAdic v) {
  if (v.exponent < 0) {
    v.numerator = checked_mul(v.numerator, checked_pow(n, -v.exponent));
    v.exponent = 0;
  }
  while (v.exponent > 0 && v.numerator % n == 0) {
    v.numerator /= n;
    --v.exponent;
  }
  return v;
}

// j-th (from 0) positive integer not divisible by n, extended oddly to j < 0.
inline std::int64_t non_multiple(std::int64_t n, std::int64_t j) {
  if (j >= 0) return j + j / (n - 1) + 1;
  return -non_multiple(n, -j - 1);
}

inline std::int64_t non_multiple_index(std::int64_t n, std::int64_t m) {
  if (m > 0) return (m - 1) - (m - 1) / n;
  return -non_multiple_index(n, -m) - 1;
}

}  // namespace detail

inline NAdic nadic_add_integer(std::int64_t n, NAdic v, std::int64_t k) {
  v.numerator = detail::checked_add(v.numerator, detail::checked_mul(k, detail::checked_pow(n, v.exponent)));
  return detail::nadic_normalize(n, v);
}

/// Multiplies by n^{-k}.
inline NAdic nadic_scale(std::int64_t n, NAdic v, std::int64_t k) {
  v.exponent += k;
  return detail::nadic_normalize(n, v);
}

/// Bijection Z[1/n] -> N. Level 0 holds the integers, level k >= 1 the
/// numerators prime to n; (level, index) is then Cantor-paired.
inline Point encode_nadic(std::int64_t n, NAdic v) {
  v = detail::nadic_normalize(n, v);
  const std::int64_t index = v.exponent == 0 ? v.numerator : detail::non_multiple_index(n, v.numerator);
  return pair(static_cast<Point>(v.exponent), zigzag(index));
}

inline NAdic decode_nadic(std::int64_t n, Point p) {
  auto [level, z] = unpair(p);
  const std::int64_t index = unzigzag(z);
  if (level == 0) return NAdic{index, 0};
  return NAdic{detail::non_multiple(n, index), static_cast<std::int64_t>(level)};
}

/// A permutation of N moving finitely many points.
class FinitePerm {
 public:
  FinitePerm() = default;

  /// `mapping` must be a bijection of its key set onto itself.
  static FinitePerm from_map(const std::map<Point, Point>& mapping) {
    FinitePerm out;
    for (auto [a, b] : mapping) {
      if (a == b) continue;
      out.forward_[a] = b;
      if (!out.backward_.emplace(b, a).second)
        throw std::domain_error("finitely supported map is not injective at " + std::to_string(b));
    }
    for (auto [a, b] : out.forward_) {
      (void)b;
      if (!out.backward_.count(a)) throw std::domain_error("map is not a permutation of its support at " + std::to_string(a));
    }
    return out;
  }

  static FinitePerm transposition(Point a, Point b) {
    if (a == b) return {};
    return from_map({{a, b}, {b, a}});
  }

  Point apply(Point x) const {
    auto it = forward_.find(x);
    return it == forward_.end() ? x : it->second;
  }

  Point apply_inverse(Point x) const {
    auto it = backward_.find(x);
    return it == backward_.end() ? x : it->second;
  }

  Point power(Point x, std::int64_t k) const {
    if (k == 0 || !forward_.count(x)) return x;
    std::int64_t cycle = 1;
    for (Point y = apply(x); y != x; y = apply(y)) ++cycle;
    k %= cycle;
    if (k < 0) k += cycle;
    for (std::int64_t i = 0; i < k; ++i) x = apply(x);
    return x;
  }

  std::vector<Point> support() const {
    std::vector<Point> out;
    for (auto [a, b] : forward_) {
      (void)b;
      out.push_back(a);
    }
    return out;
  }

  bool is_identity() const noexcept { return forward_.empty(); }
  const std::map<Point, Point>& mapping() const noexcept { return forward_; }

  friend bool operator==(const FinitePerm& a, const FinitePerm& b) { return a.forward_ == b.forward_; }

 private:
  std::map<Point, Point> forward_;
  std::map<Point, Point> backward_;
};

/// A bijection of N fixed by finitely many pins d -> t; the remaining points
/// are matched in increasing order with the remaining targets. Finitely
/// supported permutations are the case where pins permute their domain.
class PinnedBijection {
 public:
  PinnedBijection() = default;

  explicit PinnedBijection(const std::map<Point, Point>& pins) {
    std::set<Point> targets;
    for (auto [d, t] : pins) {
      if (!targets.insert(t).second) throw std::domain_error("pinned bijection repeats target " + std::to_string(t));
      pins_.emplace_back(d, t);
      domain_.push_back(d);
    }
    targets_.assign(targets.begin(), targets.end());
    for (auto [d, t] : pins_) inverse_pins_.emplace_back(t, d);
    std::sort(inverse_pins_.begin(), inverse_pins_.end());
  }

  static PinnedBijection from(const FinitePerm& perm) { return PinnedBijection(perm.mapping()); }

  Point apply(Point x) const { return map(pins_, domain_, targets_, x); }
  Point apply_inverse(Point x) const { return map(inverse_pins_, targets_, domain_, x); }

  PinnedBijection inverse() const {
    std::map<Point, Point> inv;
    for (auto [d, t] : pins_) inv.emplace(t, d);
    return PinnedBijection(inv);
  }

  /// Pins sorted by domain point.
  const std::vector<std::pair<Point, Point>>& pins() const noexcept { return pins_; }

  friend bool operator==(const PinnedBijection& a, const PinnedBijection& b) { return a.pins_ == b.pins_; }

 private:
  // k-th (from 0) natural number outside the sorted set `taken`.
  static Point nth_absent(const std::vector<Point>& taken, Point k) {
    std::size_t lo = 0, hi = taken.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (taken[mid] - mid <= k)
        lo = mid + 1;
      else
        hi = mid;
    }
    return k + lo;
  }

  static Point map(const std::vector<std::pair<Point, Point>>& pins, const std::vector<Point>& domain,
                   const std::vector<Point>& targets, Point x) {
    auto it = std::lower_bound(pins.begin(), pins.end(), std::make_pair(x, Point{0}));
    if (it != pins.end() && it->first == x) return it->second;
    const auto below = static_cast<Point>(std::lower_bound(domain.begin(), domain.end(), x) - domain.begin());
    return nth_absent(targets, x - below);
  }

  std::vector<std::pair<Point, Point>> pins_;
  std::vector<std::pair<Point, Point>> inverse_pins_;
  std::vector<Point> domain_;
  std::vector<Point> targets_;
};

}  // namespace lerf
