#include "almostcomm/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "almostcomm/matrix_io.hpp"

namespace almostcomm::weyl {

namespace {

// exp(2 pi i k / d), exact on the quarter turns.
Complex root_of_unity(int k, int d) {
  k = ((k % d) + d) % d;
  if ((4 * k) % d == 0) {
    switch ((4 * k) / d) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * k / d);
}

CMatrix clock_power(int d, int k) {
  CMatrix m = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = root_of_unity(i * k, d);
  return m;
}

}  // namespace

WeylPair weyl_pair(int d) {
  if (d < 2) throw InvalidInput("weyl_pair: dimension must be >= 2");
  WeylPair wp;
  wp.dim = d;
  wp.omega = root_of_unity(1, d);
  wp.shift = CMatrix::Zero(d, d);
  wp.clock = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    wp.shift((i + 1) % d, i) = 1.0;
    wp.clock(i, i) = root_of_unity(i, d);
  }
  return wp;
}

std::vector<CMatrix> weyl_basis(int d) {
  const WeylPair wp = weyl_pair(d);
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(d) * d);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      // sigma_{k,l} = sum_j omega^{jl} |j+k><j|
      CMatrix s = CMatrix::Zero(d, d);
      for (int j = 0; j < d; ++j) {
        s((j + k) % d, j) = root_of_unity(j * l, d);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

CMatrix diag_twirl(const CMatrix& c) {
  linalg::require_valid(c);
  const auto d = static_cast<int>(c.rows());
  if (d == 1) return c;
  CMatrix acc = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const CMatrix ck = clock_power(d, k);
    acc += ck * c * ck.adjoint();
  }
  return acc / static_cast<double>(d);
}

SchurCertificate approx_schur_scalar(const CMatrix& c, const WeylPair& wp) {
  linalg::require_valid(c);
  if (c.rows() != wp.dim) throw ShapeError("approx_schur_scalar: dimension mismatch");
  const int d = wp.dim;
  SchurCertificate cert;
  cert.epsilon = std::max(linalg::op_norm(linalg::commutator(c, wp.shift)),
                          linalg::op_norm(linalg::commutator(c, wp.clock)));
  cert.scalar_c = c.trace() / static_cast<double>(d);
  cert.bound = (d - 1) * cert.epsilon;
  cert.actual = linalg::op_norm(c - cert.scalar_c * linalg::identity(d));
  return cert;
}

BipartiteSchurResult approx_schur_bipartite(const CMatrix& c, int d1, int d2) {
  linalg::require_valid(c);
  if (d1 < 1 || d2 < 1 || c.rows() != static_cast<Eigen::Index>(d1) * d2) {
    throw ShapeError("approx_schur_bipartite: dimension must equal d1 * d2");
  }
  BipartiteSchurResult r;
  r.c_prime = linalg::partial_trace(c, d1, d2, linalg::Factor::second) / static_cast<double>(d2);
  if (d2 >= 2) {
    const WeylPair wp = weyl_pair(d2);
    const CMatrix eye1 = linalg::identity(d1);
    r.epsilon = std::max(linalg::op_norm(linalg::commutator(c, linalg::kron(eye1, wp.shift))),
                         linalg::op_norm(linalg::commutator(c, linalg::kron(eye1, wp.clock))));
  }
  r.bound = static_cast<double>(d1) * d2 * d2 * r.epsilon;
  r.actual = linalg::op_norm(c - linalg::kron(r.c_prime, linalg::identity(d2)));
  return r;
}

nlohmann::json to_json(const SchurCertificate& cert) {
  return {{"epsilon", cert.epsilon},
          {"c", io::complex_to_json(cert.scalar_c)},
          {"bound", cert.bound},
          {"actual", cert.actual}};
}

nlohmann::json to_json(const BipartiteSchurResult& r) {
  return {{"epsilon", r.epsilon},
          {"c_prime", io::matrix_to_json(r.c_prime)},
          {"bound", r.bound},
          {"actual", r.actual}};
}

}  // namespace almostcomm::weyl
