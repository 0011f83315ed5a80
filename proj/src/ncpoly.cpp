#include "almostcomm/ncpoly.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "almostcomm/matrix_io.hpp"

namespace almostcomm {

NCPolynomial::NCPolynomial(const std::vector<Term>& terms) {
  for (const auto& t : terms) add_term(t.coeff, t.word);
}

void NCPolynomial::add_term(Complex coeff, Word word) {
  if (!std::isfinite(coeff.real()) || !std::isfinite(coeff.imag())) {
    throw InvalidInput("polynomial coefficient must be finite");
  }
  for (auto& t : terms_) {
    if (t.word == word) {
      t.coeff += coeff;
      return;
    }
  }
  terms_.push_back({coeff, std::move(word)});
}

int NCPolynomial::degree() const {
  std::size_t deg = 0;
  for (const auto& t : terms_) deg = std::max(deg, t.word.size());
  return static_cast<int>(deg);
}

std::vector<Label> NCPolynomial::variables() const {
  std::set<Label> vars;
  for (const auto& t : terms_) vars.insert(t.word.begin(), t.word.end());
  return {vars.begin(), vars.end()};
}

CMatrix eval_ncpoly(const NCPolynomial& p, const GeneratorFamily& gens) {
  const int d = gens.dim();
  CMatrix acc = CMatrix::Zero(d, d);
  for (const auto& t : p.terms()) {
    CMatrix prod = linalg::identity(d);
    for (const auto& label : t.word) prod = prod * gens.at(label);
    acc += t.coeff * prod;
  }
  return acc;
}

PolyConstants poly_constants(std::span<const NCPolynomial> polys) {
  if (polys.empty()) throw InvalidInput("poly_constants: empty polynomial list");
  PolyConstants k;
  for (const auto& p : polys) {
    for (const auto& t : p.terms()) k.c1 = std::max(k.c1, std::abs(t.coeff));
    k.c2 = std::max(k.c2, p.degree());
    k.c3 = std::max(k.c3, static_cast<int>(p.size()));
  }
  return k;
}

namespace io {

nlohmann::json poly_to_json(const NCPolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : p.terms()) {
    nlohmann::json word = nlohmann::json::array();
    for (const auto& l : t.word) word.push_back({l.a, l.x});
    terms.push_back({{"coeff", complex_to_json(t.coeff)}, {"word", word}});
  }
  return {{"terms", terms}};
}

NCPolynomial poly_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("terms") || !j.at("terms").is_array()) {
    throw InvalidInput("polynomial must be an object with a 'terms' array");
  }
  NCPolynomial p;
  for (const auto& t : j.at("terms")) {
    if (!t.is_object() || !t.contains("coeff") || !t.contains("word") || !t.at("word").is_array()) {
      throw InvalidInput("malformed polynomial term");
    }
    Word word;
    for (const auto& l : t.at("word")) {
      if (!l.is_array() || l.size() != 2 || !l[0].is_number_integer() || !l[1].is_number_integer()) {
        throw InvalidInput("word letters must be [a, x] integer pairs");
      }
      word.push_back({l[0].get<int>(), l[1].get<int>()});
    }
    p.add_term(complex_from_json(t.at("coeff")), std::move(word));
  }
  return p;
}

}  // namespace io
}  // namespace almostcomm
