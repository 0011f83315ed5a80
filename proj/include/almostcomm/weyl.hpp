#pragma once

#include <vector>

#include <json.hpp>

#include "almostcomm/linalg.hpp"

namespace almostcomm::weyl {

/// Clock-and-shift pair on C^d: shift |i> -> |i+1 mod d>, clock |i> -> omega^i |i>,
/// with omega = exp(2 pi i / d), clock * shift = omega * shift * clock.
struct WeylPair {
  int dim = 0;
  Complex omega;
  CMatrix shift;
  CMatrix clock;
};

/// Throws InvalidInput for d < 2.
[[nodiscard]] WeylPair weyl_pair(int d);

/// The d^2 unitaries shift^k * clock^l, indexed k * d + l. They are pairwise
/// orthogonal under the Hilbert-Schmidt inner product with norm^2 = d.
[[nodiscard]] std::vector<CMatrix> weyl_basis(int d);

/// (1/d) sum_k clock^k c clock^{-k}, which is the diagonal part of c.
[[nodiscard]] CMatrix diag_twirl(const CMatrix& c);

/// Result of the scalar approximate Schur bound. `bound` is the proven
/// (d-1) * epsilon; `actual` is the measured distance to scalar_c * 1.
struct SchurCertificate {
  double epsilon = 0.0;
  Complex scalar_c;
  double bound = 0.0;
  double actual = 0.0;

  [[nodiscard]] bool holds(double slack = 1e-9) const { return actual <= bound + slack; }
};

/// epsilon = max(||[c, shift]||, ||[c, clock]||), scalar_c = Tr(c) / d.
[[nodiscard]] SchurCertificate approx_schur_scalar(const CMatrix& c, const WeylPair& wp);

struct BipartiteSchurResult {
  CMatrix c_prime;  ///< Tr_2(c) / d2
  double epsilon = 0.0;
  double bound = 0.0;  ///< d1 * d2^2 * epsilon
  double actual = 0.0;  ///< ||c - c_prime (x) 1||

  [[nodiscard]] bool holds(double slack = 1e-9) const { return actual <= bound + slack; }
};

/// Bipartite version: epsilon is measured against 1 (x) shift and 1 (x) clock
/// on the second factor. Requires d2 >= 2 (the clock-and-shift pair of C^1 is
/// degenerate); d2 = 1 is handled as the trivial split with bound 0.
[[nodiscard]] BipartiteSchurResult approx_schur_bipartite(const CMatrix& c, int d1, int d2);

[[nodiscard]] nlohmann::json to_json(const SchurCertificate& cert);
[[nodiscard]] nlohmann::json to_json(const BipartiteSchurResult& r);

}  // namespace almostcomm::weyl
