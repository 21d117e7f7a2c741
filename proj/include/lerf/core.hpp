#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include <boost/rational.hpp>

namespace lerf {

/// A point of the countable set X, identified with the natural numbers.
using Point = std::uint64_t;

using Rational = boost::rational<std::int64_t>;

/// A documented precondition was violated. `witness` names the offending
/// element or point when there is one.
class precondition_error : public std::invalid_argument {
 public:
  explicit precondition_error(const std::string& what, std::string witness = {})
      : std::invalid_argument(what), witness_(std::move(witness)) {}

  const std::string& witness() const noexcept { return witness_; }

 private:
  std::string witness_;
};

/// A point or element does not fit the 64-bit encodings used for X.
class encoding_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A semi-decidable question could not be settled within budget, or a
/// search came back empty. Never an error: callers decide what to do.
struct Refusal {
  std::string reason;
  std::string detail;
};

template <class T>
class Outcome {
 public:
  Outcome(T value) : state_(std::move(value)) {}
  Outcome(Refusal refusal) : state_(std::move(refusal)) {}

  bool ok() const noexcept { return state_.index() == 0; }
  explicit operator bool() const noexcept { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Outcome holds a refusal: " + refusal().reason);
    return std::get<0>(state_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Outcome holds a refusal: " + refusal().reason);
    return std::get<0>(std::move(state_));
  }
  const T* operator->() const { return &value(); }
  const T& operator*() const& { return value(); }

  const Refusal& refusal() const { return std::get<1>(state_); }

 private:
  std::variant<T, Refusal> state_;
};

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(text));
    auto den = std::stoll(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(std::stoll(text.substr(0, slash)), den);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("not a rational number: '" + text + "'");
  }
}

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw encoding_error("integer overflow in group arithmetic");
  return out;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw encoding_error("integer overflow in group arithmetic");
  return out;
}

inline std::int64_t checked_pow(std::int64_t base, std::int64_t exp) {
  std::int64_t out = 1;
  for (std::int64_t i = 0; i < exp; ++i) out = checked_mul(out, base);
  return out;
}

}  // namespace detail

}  // namespace lerf
