#include <gtest/gtest.h>

#include <cmath>

#include "almostcomm/ncpoly.hpp"
#include "almostcomm/tsirelson.hpp"

using namespace almostcomm;
using namespace almostcomm::tsirelson;

namespace {

CMatrix pauli(int k) {
  CMatrix m(2, 2);
  if (k == 1) m << 0, 1, 1, 0;
  else m << 1, 0, 0, -1;
  return m;
}

GeneratorFamily paulis() { return GeneratorFamily({{0, 1}, {0, 3}}, {pauli(1), pauli(3)}, {true, true, false}); }

GeneratorFamily z_projectors() {
  CMatrix p0 = CMatrix::Zero(2, 2), p1 = CMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  return GeneratorFamily({{0, 0}, {1, 0}}, {p0, p1}, {true, true, true});
}

NCPolynomial poly(const std::vector<Term>& terms) { return NCPolynomial(terms); }

PlantedInstance plant(std::vector<BlockSpec> blocks, double eps, bool cert, std::uint64_t seed) {
  PlantSpec spec;
  spec.blocks = std::move(blocks);
  spec.epsilon = eps;
  spec.certificate = cert;
  return plant_instance(spec, {seed, 0});
}

}  // namespace

TEST(NCPoly, Evaluation) {
  const auto g = paulis();
  EXPECT_LT((eval_ncpoly(poly({{1.0, {{0, 1}}}}), g) - pauli(1)).norm(), 1e-15);
  const NCPolynomial affine = poly({{0.5, {{0, 1}}}, {0.5, {}}});
  EXPECT_LT((eval_ncpoly(affine, g) - 0.5 * (pauli(1) + linalg::identity(2))).norm(), 1e-15);
  CMatrix expect(2, 2);
  expect << 0, -1, 1, 0;
  EXPECT_LT((eval_ncpoly(poly({{1.0, {{0, 1}, {0, 3}}}}), g) - expect).norm(), 1e-15);
  EXPECT_THROW((void)eval_ncpoly(poly({{1.0, {{5, 5}}}}), g), LabelError);
}

TEST(NCPoly, MergesAndCounts) {
  NCPolynomial p;
  p.add_term(1.0, {{0, 1}});
  p.add_term(2.0, {{0, 1}});
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.terms()[0].coeff, Complex(3.0));

  const std::vector<NCPolynomial> one{poly({{1.0, {{0, 0}}}})};
  const auto c1 = poly_constants(one);
  EXPECT_EQ(c1.c1, 1.0);
  EXPECT_EQ(c1.c2, 1);
  EXPECT_EQ(c1.c3, 1);
  const std::vector<NCPolynomial> two{poly({{0.5, {}}, {0.5, {{0, 0}, {0, 0}}}})};
  const auto c2 = poly_constants(two);
  EXPECT_EQ(c2.c1, 0.5);
  EXPECT_EQ(c2.c2, 2);
  EXPECT_EQ(c2.c3, 2);
  EXPECT_THROW((void)poly_constants(std::vector<NCPolynomial>{}), InvalidInput);
}

TEST(NCPoly, JsonRoundTrip) {
  const NCPolynomial p = poly({{Complex(0.25, -1.5), {{1, 0}, {0, 2}}}, {2.0, {}}});
  const auto back = almostcomm::io::poly_from_json(nlohmann::json::parse(almostcomm::io::poly_to_json(p).dump()));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.terms()[0].coeff, p.terms()[0].coeff);
  EXPECT_EQ(back.terms()[0].word, p.terms()[0].word);
  EXPECT_EQ(back.degree(), 2);
}

TEST(Bounds, Deterministic) {
  const auto b = tsirelson_bound_deterministic(1, 1, 1, 2, 1, 0.1);
  EXPECT_EQ(b.simple, 0.4);
  EXPECT_EQ(b.displayed, 1.6);
  EXPECT_NEAR(b.proof_end, 1.2, 1e-15);
  const auto z = tsirelson_bound_deterministic(3, 2, 4, 5, 2, 0.0);
  EXPECT_EQ(z.simple, 0.0);
  EXPECT_EQ(z.displayed, 0.0);
  EXPECT_EQ(z.proof_end, 0.0);
}

TEST(Bounds, Probabilistic) {
  EXPECT_NEAR(tsirelson_bound_probabilistic(0.01, 0.0, 0.0, 2), 0.02 + 2.0 * std::sqrt(0.5) * 0.01, 1e-15);
  EXPECT_NEAR(tsirelson_bound_probabilistic(0.01, 0.0, 0.0, 2), 0.034142, 1e-6);
  const int d = 4;
  EXPECT_NEAR(tsirelson_bound_probabilistic(0.02, 0.0, 0.0, d),
              d * (d - 1) * 0.02 + d * std::sqrt((d * d - 1) / 6.0) * 0.02, 1e-14);
  EXPECT_EQ(tsirelson_bound_probabilistic(0.0, 0.3, 0.0, 3), 0.0);
}

TEST(Correlations, MaximallyMixedProjectors) {
  Strategy s{z_projectors(), z_projectors(), 0.5 * linalg::identity(2), std::nullopt};
  const auto t = correlations(s, Model::commuting);
  ASSERT_EQ(t.entries.size(), 4u);
  for (const auto& e : t.entries) EXPECT_NEAR(e.p, e.a == e.b ? 0.5 : 0.0, 1e-15);
}

TEST(Correlations, ProductStateFactorizes) {
  Rng rng({60, 0});
  auto state = [&](int d) {
    const CMatrix g = linalg::ginibre(d, d, rng);
    CMatrix r = g * g.adjoint();
    return CMatrix(r / r.trace().real());
  };
  const CMatrix ra = state(2), rb = state(2);
  Strategy s{z_projectors(), z_projectors(), linalg::kron(ra, rb), std::make_pair(2, 2)};
  const auto t = correlations(s, Model::tensor);
  for (const auto& e : t.entries) {
    const double pa = ra(e.a, e.a).real(), pb = rb(e.b, e.b).real();
    EXPECT_NEAR(e.p, pa * pb, 1e-14);
  }
}

TEST(Correlations, Distance) {
  CorrelationTable a{{{0, 0, 0, 0, 0.5}, {1, 0, 0, 0, 0.5}}};
  CorrelationTable b = a;
  EXPECT_EQ(correlation_distance(a, b), 0.0);
  b.entries[1].p = 0.2;
  EXPECT_NEAR(correlation_distance(a, b), 0.3, 1e-15);
  b.entries.pop_back();
  EXPECT_THROW((void)correlation_distance(a, b), ShapeError);
}

TEST(CommutatorEps, Examples) {
  EXPECT_EQ(commutator_eps(z_projectors(), z_projectors()), 0.0);
  const auto inst = plant({{2, 2}}, 0.0, false, 61);
  EXPECT_LE(inst.achieved_epsilon, 1e-10);
  for (int t = 0; t < 20; ++t) {
    const auto noisy = plant({{2, 2}}, 1e-3, false, 100 + static_cast<std::uint64_t>(t));
    EXPECT_GT(noisy.achieved_epsilon, 0.0);
    EXPECT_LE(noisy.achieved_epsilon, 4e-3);
  }
}

TEST(Plant, Validation) {
  EXPECT_THROW((void)plant({}, 0.0, false, 1), InvalidInput);
  EXPECT_THROW((void)plant({{0, 2}}, 0.0, false, 1), InvalidInput);
  EXPECT_THROW((void)plant({{2, 2}}, -1.0, false, 1), InvalidInput);
  const auto inst = plant({{2, 3}, {1, 2}}, 0.0, false, 2);
  EXPECT_EQ(inst.strategy.A.dim(), 8);
  EXPECT_LE(inst.ground_truth.residual, 1e-10);
}

TEST(Plant, MonomialCommutatorGrowth) {
  const auto inst = plant({{2, 2}, {1, 2}}, 5e-3, false, 62);
  const double eps = inst.achieved_epsilon;
  const auto& A = inst.strategy.A.matrices();
  Rng rng({62, 1});
  for (int t = 0; t < 100; ++t) {
    const int k = 1 + static_cast<int>(rng.bits() % 6);
    CMatrix word = linalg::identity(inst.strategy.A.dim());
    for (int i = 0; i < k; ++i) word = word * A[rng.bits() % A.size()];
    for (const auto& b : inst.strategy.B.matrices()) {
      EXPECT_LE(linalg::op_norm(linalg::commutator(word, b)), k * eps + 1e-9);
    }
  }
}

TEST(CommutantProjection, Properties) {
  const auto inst = plant({{2, 2}, {1, 3}}, 1e-3, false, 63);
  const auto dec = algebra::decompose(inst.strategy.A, {63, 1});
  const auto bp = approx_commutant_projection(inst.strategy.B, dec);
  const int d = inst.strategy.B.dim();
  for (int y : bp.settings()) {
    CMatrix sum = CMatrix::Zero(d, d);
    for (int b : bp.outcomes(y)) sum += bp.at({b, y});
    EXPECT_LT(linalg::op_norm(sum - linalg::identity(d)), 1e-8);
  }
  for (const auto& m : bp.matrices()) {
    EXPECT_TRUE(linalg::is_psd(m, 1e-9));
    for (const auto& a : inst.strategy.A.matrices()) {
      EXPECT_LE(linalg::op_norm(linalg::commutator(a, m)), dec.residual + 1e-8);
    }
  }
}

TEST(CommutantProjection, FixesCommutingFamily) {
  const auto inst = plant({{2, 3}}, 0.0, false, 64);
  const auto dec = algebra::decompose(inst.strategy.A, {64, 1});
  const auto bp = approx_commutant_projection(inst.strategy.B, dec);
  for (std::size_t i = 0; i < bp.size(); ++i) {
    EXPECT_LE(linalg::op_norm(bp.matrices()[i] - inst.strategy.B.matrices()[i]), 1e-8);
  }
}

TEST(Pipeline, ExactInstance) {
  const auto inst = plant({{2, 3}, {1, 2}}, 0.0, false, 65);
  const auto res = run_factorization(inst.strategy, {65, 1});
  EXPECT_LE(res.report.correlation_distance, 1e-8);
  EXPECT_LE(res.report.max_error, 1e-8);
  EXPECT_EQ(res.tensor.factor_dims, std::make_pair(3, 5));
  EXPECT_NO_THROW(res.tensor.validate(1e-8));
  EXPECT_FALSE(res.report.bounds.thm_general_proof.has_value());
}

TEST(Pipeline, CertifiedNoisyInstance) {
  const auto inst = plant({{2, 3}}, 1e-3, true, 66);
  ASSERT_TRUE(inst.certificate.has_value());
  PipelineOptions opts;
  opts.certificate = inst.certificate;
  const auto res = run_factorization(inst.strategy, {66, 1}, opts);
  const auto& r = res.report;
  ASSERT_TRUE(r.certificate_check.has_value());
  EXPECT_TRUE(r.certificate_check->ok) << r.certificate_check->message;
  ASSERT_TRUE(r.bounds.thm_general_proof.has_value());
  EXPECT_LE(r.max_error, *r.bounds.thm_general_proof);
  EXPECT_LE(r.correlation_distance, r.max_error + 1e-9);
  ASSERT_TRUE(r.bounds.schur_simple.has_value());
  EXPECT_FALSE(r.certified_violation());
}

TEST(Pipeline, ErrorIsLinearInEpsilon) {
  std::vector<double> x, y;
  for (double eps : {1e-4, 1e-3, 1e-2}) {
    const auto inst = plant({{2, 2}, {1, 2}}, eps, false, 67);
    const auto res = run_factorization(inst.strategy, {67, 1});
    x.push_back(std::log(eps));
    y.push_back(std::log(res.report.max_error));
  }
  const double slope = (y[2] - y[0]) / (x[2] - x[0]);
  EXPECT_NEAR(slope, 1.0, 0.1);
}

TEST(Certificate, RejectsWrongPolynomials) {
  const auto inst = plant({{2, 2}}, 0.0, true, 68);
  const auto dec = algebra::decompose(inst.strategy.A, {68, 1});
  auto cert = *inst.certificate;
  EXPECT_TRUE(validate_certificate(cert, inst.strategy.A, dec).ok);
  cert.blocks[0].shift = cert.blocks[0].clock;
  EXPECT_FALSE(validate_certificate(cert, inst.strategy.A, dec).ok);
}

TEST(Probabilistic, BlockCertificate) {
  const auto inst = plant({{2, 2}}, 1e-3, false, 69);
  const auto dec = algebra::decompose(inst.strategy.A, {69, 1});
  ProbabilisticOptions opts;
  opts.epsilon = 0.02;
  opts.n_subspaces = 10;
  opts.n_unitaries = 100;
  const auto cert = probabilistic_block_certificate(inst.strategy.B, dec, opts, {69, 2});
  EXPECT_GE(cert.epsilon, cert.projector_commutator);
  EXPECT_GT(cert.tested_subspaces, 0);
  EXPECT_LE(cert.eta, 1.0);
}

TEST(TensorStrategy, RejectsWrongDecomposition) {
  const auto inst = plant({{2, 2}}, 0.0, false, 70);
  const auto other = plant({{2, 2}}, 0.0, false, 71);
  EXPECT_THROW((void)build_tensor_strategy(inst.strategy, other.ground_truth), ResidualTooLarge);
}

TEST(TsirelsonJson, RoundTrips) {
  const auto inst = plant({{2, 2}, {1, 1}}, 1e-3, true, 72);
  const auto s = tsirelson::io::strategy_from_json(nlohmann::json::parse(tsirelson::io::strategy_to_json(inst.strategy).dump()));
  EXPECT_EQ(s.rho, inst.strategy.rho);
  EXPECT_EQ(s.B.matrices(), inst.strategy.B.matrices());
  const auto c = tsirelson::io::certificate_from_json(tsirelson::io::certificate_to_json(*inst.certificate));
  EXPECT_EQ(c.blocks.size(), inst.certificate->blocks.size());
  PlantSpec spec;
  spec.blocks = {{3, 1}};
  spec.epsilon = 0.01;
  const auto back = tsirelson::io::plant_spec_from_json(tsirelson::io::plant_spec_to_json(spec));
  EXPECT_EQ(back.blocks[0].d_A, 3);
  EXPECT_EQ(back.epsilon, 0.01);
  EXPECT_THROW((void)tsirelson::io::plant_spec_from_json(nlohmann::json{{"blocks", 3}}), InvalidInput);
}

TEST(TsirelsonCsv, MissingBoundsAreMarked) {
  const auto inst = plant({{2, 2}, {1, 2}}, 1e-3, false, 73);
  const auto res = run_factorization(inst.strategy, {73, 1});
  const std::string csv = tsirelson::io::report_to_csv(res.report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), std::string(tsirelson::io::kReportCsvHeader));
  EXPECT_NE(csv.find("n/a"), std::string::npos);
}
