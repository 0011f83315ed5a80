#include "almostcomm/tsirelson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace almostcomm::tsirelson {

namespace {

double trace_of_product_re(const CMatrix& x, const CMatrix& y) {
  // Re Tr(x y) without forming the product.
  return (x.array() * y.transpose().array()).sum().real();
}

// R(i, j) = sum_{k, l} rho_{(i k), (j l)} B_{l k}, so Tr(rho (A (x) B)) = Tr(R A).
CMatrix reduce_with_b(const CMatrix& rho, const CMatrix& b, int da, int db) {
  CMatrix r = CMatrix::Zero(da, da);
  for (int i = 0; i < da; ++i) {
    for (int j = 0; j < da; ++j) {
      Complex acc = 0.0;
      for (int k = 0; k < db; ++k) {
        for (int l = 0; l < db; ++l) acc += rho(i * db + k, j * db + l) * b(l, k);
      }
      r(i, j) = acc;
    }
  }
  return r;
}

GeneratorFamily compressed_family(const GeneratorFamily& A, const CMatrix& projector) {
  std::vector<CMatrix> mats;
  mats.reserve(A.size());
  for (const auto& m : A.matrices()) mats.push_back(projector * m * projector);
  return GeneratorFamily(A.labels(), std::move(mats), FamilyFlags{});
}

Complex root(int n) { return std::polar(1.0, 2.0 * std::numbers::pi / n); }

CMatrix matrix_power(const CMatrix& m, int n) {
  CMatrix out = CMatrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < n; ++i) out = out * m;
  return out;
}

}  // namespace

void Strategy::validate(double tol) const {
  if (!A.flags().povm || !B.flags().povm) throw InvalidInput("strategy: both families must be POVMs");
  linalg::require_valid(rho, "rho");
  if (!linalg::is_psd(rho, tol)) throw InvalidInput("strategy: rho is not PSD");
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > tol) throw InvalidInput("strategy: Tr(rho) != 1");
  if (factor_dims) {
    const auto [da, db] = *factor_dims;
    if (A.dim() != da || B.dim() != db || rho.rows() != static_cast<Eigen::Index>(da) * db) {
      throw InvalidInput("strategy: dimensions do not match the tensor factors");
    }
  } else if (A.dim() != B.dim() || rho.rows() != A.dim()) {
    throw InvalidInput("strategy: A, B and rho must share one dimension");
  }
}

CorrelationTable correlations(const Strategy& s, Model model) {
  CorrelationTable t;
  const auto& al = s.A.labels();
  const auto& bl = s.B.labels();
  if (model == Model::commuting) {
    if (s.A.dim() != s.B.dim() || s.rho.rows() != s.A.dim()) {
      throw ShapeError("correlations: commuting model needs equal dimensions");
    }
    for (std::size_t i = 0; i < al.size(); ++i) {
      const CMatrix ra = s.rho * s.A.matrices()[i];
      for (std::size_t j = 0; j < bl.size(); ++j) {
        t.entries.push_back({al[i].a, bl[j].a, al[i].x, bl[j].x,
                             trace_of_product_re(ra, s.B.matrices()[j])});
      }
    }
    return t;
  }
  if (!s.factor_dims) throw ShapeError("correlations: tensor model needs factor dimensions");
  const auto [da, db] = *s.factor_dims;
  if (s.A.dim() != da || s.B.dim() != db || s.rho.rows() != static_cast<Eigen::Index>(da) * db) {
    throw ShapeError("correlations: factor dimensions do not match");
  }
  std::vector<CMatrix> reduced;
  reduced.reserve(bl.size());
  for (const auto& b : s.B.matrices()) reduced.push_back(reduce_with_b(s.rho, b, da, db));
  for (std::size_t i = 0; i < al.size(); ++i) {
    for (std::size_t j = 0; j < bl.size(); ++j) {
      t.entries.push_back({al[i].a, bl[j].a, al[i].x, bl[j].x,
                           trace_of_product_re(reduced[j], s.A.matrices()[i])});
    }
  }
  return t;
}

double correlation_distance(const CorrelationTable& t1, const CorrelationTable& t2) {
  if (t1.entries.size() != t2.entries.size()) throw ShapeError("correlation tables differ in size");
  double worst = 0.0;
  for (std::size_t i = 0; i < t1.entries.size(); ++i) {
    const auto& e1 = t1.entries[i];
    const auto& e2 = t2.entries[i];
    if (e1.a != e2.a || e1.b != e2.b || e1.x != e2.x || e1.y != e2.y) {
      throw ShapeError("correlation tables index different outcomes");
    }
    worst = std::max(worst, std::abs(e1.p - e2.p));
  }
  return worst;
}

double commutator_eps(const GeneratorFamily& A, const GeneratorFamily& B) {
  if (A.dim() != B.dim()) throw ShapeError("commutator_eps: dimension mismatch");
  double worst = 0.0;
  for (const auto& a : A.matrices()) {
    for (const auto& b : B.matrices()) worst = std::max(worst, linalg::op_norm(a * b - b * a));
  }
  return worst;
}

GeneratorFamily approx_commutant_projection(const GeneratorFamily& B,
                                            const algebra::BlockDecomposition& dec) {
  if (B.dim() != dec.dim) throw ShapeError("approx_commutant_projection: dimension mismatch");
  std::vector<CMatrix> out;
  out.reserve(B.size());
  for (const auto& b : B.matrices()) {
    CMatrix acc = CMatrix::Zero(dec.dim, dec.dim);
    for (const auto& blk : dec.blocks) {
      const CMatrix basis = blk.basis();
      acc += basis * linalg::kron(linalg::identity(blk.d_A), blk.b_factor(b)) * basis.adjoint();
    }
    out.push_back(0.5 * (acc + acc.adjoint()));
  }
  return B.with_matrices(std::move(out), 1e-8);
}

DeterministicBounds tsirelson_bound_deterministic(double c1, int c2, int c3, int d, int L,
                                                  double epsilon) {
  if (!(c1 >= 0.0) || c2 < 0 || c3 < 0 || d < 1 || L < 1 || !(epsilon >= 0.0)) {
    throw InvalidInput("tsirelson_bound_deterministic: invalid parameters");
  }
  if (L > d) throw InvalidInput("tsirelson_bound_deterministic: L must not exceed d");
  const double c = c1 * c2 * c3;
  const double d2 = static_cast<double>(d) * d;
  DeterministicBounds b;
  b.simple = (c * d2) * epsilon;
  b.displayed = (2.0 * c * (c + 1.0) * d2) * epsilon;
  b.proof_end = (c * (static_cast<double>(L) * (L - 1) + (2.0 * c + 1.0) * d2)) * epsilon;
  return b;
}

double tsirelson_bound_probabilistic(double epsilon, double delta, double eta, int d) {
  if (d < 2) throw InvalidInput("tsirelson_bound_probabilistic: d must be >= 2");
  const double inner = stampfli::stampfli_bound(stampfli::BoundKind::doubly, epsilon, delta, eta,
                                                1.0, d, /*selfadjoint=*/true);
  return d * (d - 1.0) * epsilon + d * inner;
}

std::vector<NCPolynomial> GeneratingCertificate::all_polynomials() const {
  std::vector<NCPolynomial> out;
  for (const auto& b : blocks) {
    out.push_back(b.projector);
    out.push_back(b.shift);
    out.push_back(b.clock);
  }
  return out;
}

PolyConstants GeneratingCertificate::constants() const {
  const auto polys = all_polynomials();
  return poly_constants(polys);
}

CertificateCheck validate_certificate(const GeneratingCertificate& cert, const GeneratorFamily& A,
                                      const algebra::BlockDecomposition& dec, double tol) {
  CertificateCheck check;
  check.block_match.assign(cert.blocks.size(), -1);
  if (A.dim() != dec.dim) throw ShapeError("validate_certificate: dimension mismatch");
  if (cert.blocks.size() != dec.blocks.size()) {
    check.message = "certificate has " + std::to_string(cert.blocks.size()) + " blocks, decomposition " +
                    std::to_string(dec.blocks.size());
    return check;
  }
  std::vector<bool> used(dec.blocks.size(), false);
  for (std::size_t i = 0; i < cert.blocks.size(); ++i) {
    const auto& cb = cert.blocks[i];
    const CMatrix p = eval_ncpoly(cb.projector, A);
    int best = -1;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < dec.blocks.size(); ++m) {
      const double e = linalg::op_norm(p - dec.blocks[m].projector);
      if (e < best_err) {
        best_err = e;
        best = static_cast<int>(m);
      }
    }
    check.max_error = std::max(check.max_error, best_err);
    if (best_err > tol || used[static_cast<std::size_t>(best)]) {
      check.message = "projector polynomial " + std::to_string(i) + " matches no free block";
      return check;
    }
    used[static_cast<std::size_t>(best)] = true;
    check.block_match[i] = best;

    const auto& blk = dec.blocks[static_cast<std::size_t>(best)];
    const GeneratorFamily local = compressed_family(A, blk.projector);
    const CMatrix s_full = eval_ncpoly(cb.shift, local);
    const CMatrix t_full = eval_ncpoly(cb.clock, local);
    const int n = blk.d_A;
    const CMatrix eye = linalg::identity(n);
    double err = 0.0;
    for (const CMatrix* x : {&s_full, &t_full}) {
      err = std::max(err, linalg::op_norm(*x - blk.projector * *x * blk.projector));
      const CMatrix xb = blk.to_block(*x);
      err = std::max(err, linalg::op_norm(xb - linalg::kron(blk.a_factor(*x), linalg::identity(blk.d_B))));
    }
    const CMatrix s = blk.a_factor(s_full);
    const CMatrix t = blk.a_factor(t_full);
    err = std::max(err, linalg::op_norm(s.adjoint() * s - eye));
    err = std::max(err, linalg::op_norm(t.adjoint() * t - eye));
    err = std::max(err, linalg::op_norm(matrix_power(s, n) - eye));
    err = std::max(err, linalg::op_norm(matrix_power(t, n) - eye));
    err = std::max(err, linalg::op_norm(t * s - root(n) * s * t));
    check.max_error = std::max(check.max_error, err);
    if (err > tol) {
      check.message = "clock/shift polynomials of block " + std::to_string(i) +
                      " do not produce a clock-and-shift pair";
      return check;
    }
  }
  check.ok = true;
  return check;
}

ProbabilisticBlockCert probabilistic_block_certificate(const GeneratorFamily& B,
                                                       const algebra::BlockDecomposition& dec,
                                                       const ProbabilisticOptions& opts,
                                                       RngSeed rng) {
  if (B.dim() != dec.dim) throw ShapeError("probabilistic_block_certificate: dimension mismatch");
  if (!(opts.epsilon > 0.0)) throw InvalidInput("probabilistic certificate: epsilon must be positive");
  if (opts.n_subspaces < 1 || opts.n_unitaries < 1) {
    throw InvalidInput("probabilistic certificate: zero sample count");
  }
  ProbabilisticBlockCert cert;
  cert.epsilon_sample = opts.epsilon;
  for (const auto& blk : dec.blocks) {
    for (const auto& b : B.matrices()) {
      cert.projector_commutator =
          std::max(cert.projector_commutator, linalg::op_norm(blk.projector * b - b * blk.projector));
    }
  }
  Rng frames(rng.child(1));
  Rng unitaries(rng.child(2));
  bool tested = false;
  for (const auto& blk : dec.blocks) {
    if (blk.d_A < 2) continue;
    const CMatrix eye_b = linalg::identity(blk.d_B);
    for (const auto& b : B.matrices()) {
      const CMatrix xb = blk.to_block(b);
      long failing = 0;
      for (long s = 0; s < opts.n_subspaces; ++s) {
        const CMatrix g = linalg::kron(linalg::haar_frame(blk.d_A, 2, frames), eye_b);
        const CMatrix x = g.adjoint() * xb * g;
        long fails = 0;
        for (long u = 0; u < opts.n_unitaries; ++u) {
          const CMatrix v = linalg::kron(linalg::haar_unitary(2, unitaries), eye_b);
          if (linalg::op_norm(v * x - x * v) > opts.epsilon) ++fails;
        }
        if (stampfli::clopper_pearson_upper(fails, opts.n_unitaries, opts.confidence) > opts.delta_target) {
          ++failing;
        }
      }
      cert.failing_subspaces += failing;
      cert.tested_subspaces += opts.n_subspaces;
      cert.eta = std::max(cert.eta, stampfli::clopper_pearson_upper(failing, opts.n_subspaces,
                                                                    opts.confidence));
      tested = true;
    }
  }
  cert.delta = tested ? opts.delta_target : 0.0;
  cert.epsilon = std::max(cert.epsilon_sample, cert.projector_commutator);
  return cert;
}

Strategy build_tensor_strategy(const Strategy& s, const algebra::BlockDecomposition& dec) {
  s.validate();
  if (s.factor_dims) throw InvalidInput("build_tensor_strategy: input is already a tensor strategy");
  if (dec.dim != s.A.dim()) throw ShapeError("build_tensor_strategy: dimension mismatch");
  const double residual = algebra::verify_decomposition(s.A, dec);
  if (residual > 1e-7) {
    throw ResidualTooLarge("build_tensor_strategy: decomposition residual " + std::to_string(residual) +
                           " exceeds 1e-7");
  }
  int da = 0;
  int db = 0;
  for (const auto& blk : dec.blocks) {
    da += blk.d_A;
    db += blk.d_B;
  }
  // Embedding |l; i, k> -> |offA_l + i> (x) |offB_l + k>.
  CMatrix j = CMatrix::Zero(static_cast<Eigen::Index>(da) * db, dec.dim);
  int off_a = 0;
  int off_b = 0;
  std::vector<std::pair<int, int>> offsets;
  for (const auto& blk : dec.blocks) {
    const CMatrix basis = blk.basis();
    for (int i = 0; i < blk.d_A; ++i) {
      for (int k = 0; k < blk.d_B; ++k) {
        j.row((off_a + i) * db + off_b + k) = basis.col(i * blk.d_B + k).adjoint();
      }
    }
    offsets.emplace_back(off_a, off_b);
    off_a += blk.d_A;
    off_b += blk.d_B;
  }

  auto embed = [&](const GeneratorFamily& fam, bool a_side) {
    const int dim = a_side ? da : db;
    std::vector<CMatrix> mats;
    for (const auto& m : fam.matrices()) {
      CMatrix out = CMatrix::Zero(dim, dim);
      for (std::size_t l = 0; l < dec.blocks.size(); ++l) {
        const auto& blk = dec.blocks[l];
        const int off = a_side ? offsets[l].first : offsets[l].second;
        const int n = a_side ? blk.d_A : blk.d_B;
        out.block(off, off, n, n) = a_side ? blk.a_factor(m) : blk.b_factor(m);
      }
      mats.push_back(0.5 * (out + out.adjoint()));
    }
    return fam.with_matrices(std::move(mats), 1e-8);
  };

  Strategy t;
  t.A = embed(s.A, true);
  t.B = embed(s.B, false);
  t.rho = j * s.rho * j.adjoint();
  t.rho = 0.5 * (t.rho + t.rho.adjoint());
  t.factor_dims = std::make_pair(da, db);
  t.validate(1e-8);
  return t;
}

bool FactorizationReport::certified_violation(double slack) const {
  if (!certificate_check || !certificate_check->ok) return false;
  for (const auto& b : {bounds.schur_simple, bounds.thm_general_displayed, bounds.thm_general_proof}) {
    if (b && max_error > *b + slack) return true;
  }
  return false;
}

PipelineResult run_factorization(const Strategy& s, RngSeed rng, const PipelineOptions& opts) {
  s.validate();
  if (s.factor_dims) throw InvalidInput("run_factorization: expected a commuting-model strategy");
  PipelineResult out;
  out.decomposition = algebra::decompose(s.A, rng);
  const auto& dec = out.decomposition;
  out.b_prime = approx_commutant_projection(s.B, dec);

  FactorizationReport& rep = out.report;
  rep.epsilon = commutator_eps(s.A, s.B);
  rep.decomposition_residual = dec.residual;
  for (const auto& blk : dec.blocks) rep.block_dims.emplace_back(blk.d_A, blk.d_B);
  for (std::size_t i = 0; i < s.B.size(); ++i) {
    const double err = linalg::op_norm(s.B.matrices()[i] - out.b_prime.matrices()[i]);
    rep.rows.push_back({s.B.labels()[i], err});
    rep.max_error = std::max(rep.max_error, err);
  }

  const int d = s.A.dim();
  if (opts.certificate) {
    rep.certificate_check = validate_certificate(*opts.certificate, s.A, dec, opts.certificate_tol);
    const PolyConstants k = opts.certificate->constants();
    rep.constants = k;
    const auto b = tsirelson_bound_deterministic(k.c1, k.c2, k.c3, d, dec.num_blocks(), rep.epsilon);
    rep.bounds.thm_general_displayed = b.displayed;
    rep.bounds.thm_general_proof = b.proof_end;
    if (dec.num_blocks() == 1) rep.bounds.schur_simple = b.simple;
  }
  if (opts.probabilistic && d >= 2) {
    rep.probabilistic = probabilistic_block_certificate(s.B, dec, *opts.probabilistic, rng.child(7));
    rep.bounds.probabilistic = tsirelson_bound_probabilistic(
        rep.probabilistic->epsilon, rep.probabilistic->delta, rep.probabilistic->eta, d);
  }

  out.tensor = build_tensor_strategy(s, dec);
  out.commuting_table = correlations(s, Model::commuting);
  out.tensor_table = correlations(out.tensor, Model::tensor);
  rep.correlation_distance = correlation_distance(out.commuting_table, out.tensor_table);
  return out;
}

}  // namespace almostcomm::tsirelson
