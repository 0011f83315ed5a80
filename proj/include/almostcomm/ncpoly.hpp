#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "almostcomm/algebra.hpp"

namespace almostcomm {

using Word = std::vector<Label>;

struct Term {
  Complex coeff;
  Word word;  ///< empty word is the identity
};

/// Noncommutative polynomial in generator labels. Terms with equal words are
/// merged on insertion and kept in first-seen order.
class NCPolynomial {
 public:
  NCPolynomial() = default;
  explicit NCPolynomial(const std::vector<Term>& terms);

  void add_term(Complex coeff, Word word);

  [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  /// Longest word; 0 for constants and the zero polynomial.
  [[nodiscard]] int degree() const;
  /// Distinct labels appearing in any word, sorted.
  [[nodiscard]] std::vector<Label> variables() const;

 private:
  std::vector<Term> terms_;
};

/// Sum of coeff * (product of generators in word order).
/// Throws LabelError for a label missing from `gens`.
[[nodiscard]] CMatrix eval_ncpoly(const NCPolynomial& p, const GeneratorFamily& gens);

struct PolyConstants {
  double c1 = 0.0;  ///< largest coefficient modulus
  int c2 = 0;       ///< largest degree
  int c3 = 0;       ///< largest term count
};

/// Exact maxima over the list; InvalidInput when empty.
[[nodiscard]] PolyConstants poly_constants(std::span<const NCPolynomial> polys);

namespace io {
/// {"terms": [{"coeff": [re, im], "word": [[a, x], ...]}]}
[[nodiscard]] nlohmann::json poly_to_json(const NCPolynomial& p);
[[nodiscard]] NCPolynomial poly_from_json(const nlohmann::json& j);
}  // namespace io

}  // namespace almostcomm
