#pragma once

// Formal word algebra of left-invariant differential operators on K.

#include <algorithm>
#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

#include "sbq/errors.hpp"

namespace sbq {

/// Degree cap for operators passed through finite-difference symbol evaluation.
inline constexpr int kMaxOperatorDegree = 4;

/// Sum of coeff * X_{k1} X_{k2} ... X_{kN}, indices k in {1, 2, 3}. The word
/// acts on f by (X_{k1} ... X_{kN} f)(x) = d^N/ds1..dsN f(x e^{s1 X_k1} ... e^{sN X_kN}).
class LeftInvariantOperator {
 public:
  struct Term {
    std::complex<double> coeff;
    std::vector<int> word;

    friend bool operator==(const Term&, const Term&) = default;
  };

  LeftInvariantOperator() = default;
  explicit LeftInvariantOperator(std::vector<Term> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_)
      for (int k : t.word)
        if (k < 1 || k > 3) throw index_out_of_range_error("operator word index must be 1, 2 or 3");
  }

  static LeftInvariantOperator identity() { return LeftInvariantOperator(std::vector<Term>{Term{1.0, {}}}); }
  static LeftInvariantOperator generator(int k) { return LeftInvariantOperator(std::vector<Term>{Term{1.0, {k}}}); }
  static LeftInvariantOperator word(std::initializer_list<int> w, std::complex<double> c = 1.0) {
    return LeftInvariantOperator({{c, std::vector<int>(w)}});
  }
  /// Delta_K = X_1^2 + X_2^2 + X_3^2.
  static LeftInvariantOperator laplacian() {
    return LeftInvariantOperator({{1.0, {1, 1}}, {1.0, {2, 2}}, {1.0, {3, 3}}});
  }

  const std::vector<Term>& terms() const { return terms_; }

  int degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, static_cast<int>(t.word.size()));
    return d;
  }

  friend LeftInvariantOperator operator+(const LeftInvariantOperator& a, const LeftInvariantOperator& b) {
    std::vector<Term> t = a.terms_;
    t.insert(t.end(), b.terms_.begin(), b.terms_.end());
    return LeftInvariantOperator(std::move(t));
  }

  friend LeftInvariantOperator operator*(std::complex<double> c, const LeftInvariantOperator& a) {
    std::vector<Term> t = a.terms_;
    for (auto& term : t) term.coeff *= c;
    return LeftInvariantOperator(std::move(t));
  }

  /// Composition: (a * b) f = a (b f).
  friend LeftInvariantOperator operator*(const LeftInvariantOperator& a, const LeftInvariantOperator& b) {
    std::vector<Term> t;
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_) {
        std::vector<int> w = ta.word;
        w.insert(w.end(), tb.word.begin(), tb.word.end());
        t.push_back({ta.coeff * tb.coeff, std::move(w)});
      }
    return LeftInvariantOperator(std::move(t));
  }

  friend bool operator==(const LeftInvariantOperator&, const LeftInvariantOperator&) = default;

  std::string to_string() const {
    std::string s;
    for (const auto& t : terms_) {
      if (!s.empty()) s += " + ";
      s += "(" + std::to_string(t.coeff.real()) + "," + std::to_string(t.coeff.imag()) + ")";
      for (int k : t.word) s += "X" + std::to_string(k);
    }
    return s.empty() ? "0" : s;
  }

 private:
  std::vector<Term> terms_;
};

/// (X_{k1} ... X_{kN})^tr = (-1)^N X_{kN} ... X_{k1}, extended linearly.
inline LeftInvariantOperator transpose(const LeftInvariantOperator& a) {
  std::vector<LeftInvariantOperator::Term> t = a.terms();
  for (auto& term : t) {
    std::reverse(term.word.begin(), term.word.end());
    if (term.word.size() % 2 == 1) term.coeff = -term.coeff;
  }
  return LeftInvariantOperator(std::move(t));
}

}  // namespace sbq
