#include <gtest/gtest.h>

#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <limits>

#include "almostcomm/stampfli.hpp"

using namespace almostcomm;
using namespace std::complex_literals;

namespace {

CMatrix sigma3() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMatrix normal_with(const std::vector<Complex>& ev, Rng& rng) {
  const int d = static_cast<int>(ev.size());
  CMatrix diag = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) diag(i, i) = ev[static_cast<std::size_t>(i)];
  const CMatrix u = linalg::haar_unitary(d, rng);
  return u * diag * u.adjoint();
}

// Exhaustive oracle: the smallest enclosing disk is the smallest disk through
// two points (as a diameter) or three points that covers every point.
double brute_force_radius(const std::vector<Complex>& pts) {
  auto covers = [&](Complex c, double r) {
    for (auto p : pts)
      if (std::abs(p - c) > r * (1 + 1e-12) + 1e-14) return false;
    return true;
  };
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = pts.size();
  if (n == 1) return 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex c = 0.5 * (pts[i] + pts[j]);
      const double r = std::abs(pts[i] - c);
      if (r < best && covers(c, r)) best = r;
      for (std::size_t k = j + 1; k < n; ++k) {
        const Complex b = pts[j] - pts[i], e = pts[k] - pts[i];
        const double den = 2.0 * (b.real() * e.imag() - b.imag() * e.real());
        if (std::abs(den) < 1e-14) continue;
        const double b2 = std::norm(b), e2 = std::norm(e);
        const Complex u((e.imag() * b2 - b.imag() * e2) / den, (b.real() * e2 - e.real() * b2) / den);
        const double rr = std::abs(u);
        if (rr < best && covers(pts[i] + u, rr)) best = rr;
      }
    }
  return best;
}

}  // namespace

TEST(EnclosingDisk, Examples) {
  const std::vector<Complex> one{{0.3, -2.0}};
  const auto d1 = stampfli::min_enclosing_disk(one);
  EXPECT_EQ(d1.radius, 0.0);
  EXPECT_EQ(d1.center, one[0]);

  const std::vector<Complex> two{0.0, 1.0};
  const auto d2 = stampfli::min_enclosing_disk(two);
  EXPECT_NEAR(std::abs(d2.center - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(d2.radius, 0.5, 1e-15);

  const std::vector<Complex> three{0.0, 1.0, 1i};
  const auto d3 = stampfli::min_enclosing_disk(three);
  EXPECT_NEAR(std::abs(d3.center - Complex(0.5, 0.5)), 0.0, 1e-12);
  EXPECT_NEAR(d3.radius, std::sqrt(2.0) / 2.0, 1e-12);
  EXPECT_NEAR(brute_force_radius(three), d3.radius, 1e-12);
  EXPECT_THROW((void)stampfli::min_enclosing_disk(std::vector<Complex>{}), InvalidInput);
}

TEST(EnclosingDisk, MatchesBruteForceAndIgnoresOrder) {
  Rng rng({40, 0});
  for (int t = 0; t < 30; ++t) {
    std::vector<Complex> pts;
    const int n = 2 + static_cast<int>(rng.bits() % 8);
    for (int i = 0; i < n; ++i) pts.push_back(0.5 * rng.complex_normal());
    const auto disk = stampfli::min_enclosing_disk(pts);
    for (auto p : pts) EXPECT_LE(std::abs(p - disk.center), disk.radius + 1e-12);
    EXPECT_NEAR(disk.radius, brute_force_radius(pts), 1e-12);
    std::reverse(pts.begin(), pts.end());
    EXPECT_NEAR(stampfli::min_enclosing_disk(pts).radius, disk.radius, 1e-14);
  }
}

TEST(EnclosingDisk, CollinearPoints) {
  const std::vector<Complex> pts{0.0, 0.5, 1.0, 2.0};
  EXPECT_NEAR(stampfli::min_enclosing_disk(pts).radius, 1.0, 1e-12);
}

TEST(NearestScalar, Examples) {
  CMatrix d01 = CMatrix::Zero(2, 2);
  d01(1, 1) = 1.0;
  const auto a = stampfli::nearest_scalar(d01);
  EXPECT_NEAR(std::abs(a.c - 0.5), 0.0, 1e-14);
  EXPECT_NEAR(a.dist, 0.5, 1e-14);
  const auto b = stampfli::nearest_scalar(sigma3());
  EXPECT_NEAR(std::abs(b.c), 0.0, 1e-14);
  EXPECT_NEAR(b.dist, 1.0, 1e-14);
  Rng rng({41, 0});
  const auto c = stampfli::nearest_scalar(normal_with({0.0, 1.0, 1i}, rng));
  EXPECT_NEAR(c.dist, std::sqrt(2.0) / 2.0, 1e-10);
}

TEST(NearestScalar, NumericAgreesOnNormalMatrices) {
  Rng rng({42, 0});
  for (int t = 0; t < 20; ++t) {
    std::vector<Complex> ev;
    for (int i = 0; i < 3; ++i) ev.push_back(rng.complex_normal());
    const CMatrix c = normal_with(ev, rng);
    EXPECT_NEAR(stampfli::nearest_scalar_numeric(c).dist, stampfli::nearest_scalar(c).dist, 1e-7);
  }
}

TEST(NearestScalar, NonNormalIsLocalMinimum) {
  Rng rng({43, 0});
  const CMatrix c = linalg::ginibre(3, 3, rng);
  const auto ns = stampfli::nearest_scalar(c);
  EXPECT_NEAR(ns.dist, linalg::op_norm(c - ns.c * linalg::identity(3)), 1e-12);
  for (int k = 0; k < 8; ++k) {
    const Complex shift = 1e-3 * std::polar(1.0, k * M_PI / 4);
    EXPECT_GE(linalg::op_norm(c - (ns.c + shift) * linalg::identity(3)), ns.dist - 1e-9);
  }
}

TEST(DerivationProbe, Examples) {
  EXPECT_NEAR(stampfli::derivation_norm_probe(linalg::identity(3), 100, {44, 0}), 0.0, 1e-14);
  const double z = stampfli::derivation_norm_probe(sigma3(), 10000, {44, 1});
  EXPECT_GE(z, 1.9);
  EXPECT_LE(z, 2.0 + 1e-9);
  Rng rng({44, 2});
  const double w = stampfli::derivation_norm_probe(normal_with({0.0, 1.0, 1i}, rng), 20000, {44, 3});
  EXPECT_LE(w, std::sqrt(2.0) + 1e-9);
}

TEST(ClopperPearson, MatchesBinomialTail) {
  // The upper bound p solves P(X <= k; n, p) = 1 - confidence.
  for (auto [k, n] : {std::pair{0L, 100L}, std::pair{3L, 50L}, std::pair{10L, 1000L}}) {
    const double p = stampfli::clopper_pearson_upper(k, n, 0.999);
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
    EXPECT_NEAR(boost::math::cdf(dist, static_cast<double>(k)), 0.001, 1e-9);
  }
  EXPECT_NEAR(stampfli::clopper_pearson_upper(0, 1000, 0.999), 1.0 - std::pow(0.001, 1.0 / 1000), 1e-12);
  EXPECT_EQ(stampfli::clopper_pearson_upper(5, 5, 0.999), 1.0);
  EXPECT_THROW((void)stampfli::clopper_pearson_upper(6, 5, 0.9), InvalidInput);
}

TEST(CommutationProb, Examples) {
  const std::vector<int> coords{0, 1};
  const Isometry frame = Isometry::coordinates(3, coords);
  const auto scal = stampfli::estimate_commutation_prob(2.0 * linalg::identity(3), frame, 1e-6, 500, 0.999, {45, 0});
  EXPECT_EQ(scal.failures, 0);
  EXPECT_LT(scal.delta, 0.02);

  CMatrix c = CMatrix::Zero(3, 3);
  c.topLeftCorner(2, 2) = sigma3();
  const auto z = stampfli::estimate_commutation_prob(c, frame, 1.0, 10000, 0.999, {45, 1});
  EXPECT_GT(z.failures, 0);
  const auto big = stampfli::estimate_commutation_prob(c, frame, 2.0 * linalg::op_norm(c), 2000, 0.999, {45, 2});
  EXPECT_EQ(big.failures, 0);
}

TEST(DoublyEstimate, NearScalar) {
  Rng rng({46, 0});
  CMatrix e = linalg::random_hermitian(4, rng);
  e *= 0.01 / linalg::op_norm(e);
  const CMatrix c = 0.7 * linalg::identity(4) + e;
  const auto cert = stampfli::doubly_estimate(c, 0.05, 30, 300, 0.1, 0.999, {46, 1});
  ASSERT_TRUE(cert.eta.has_value());
  EXPECT_LT(*cert.eta, 0.25);
  const double bound = stampfli::stampfli_bound(stampfli::BoundKind::doubly, cert.epsilon, cert.delta, *cert.eta,
                                                linalg::op_norm(c), 4, true);
  EXPECT_GE(bound, stampfli::nearest_scalar(c).dist);
}

TEST(Bounds, Examples) {
  using stampfli::BoundKind;
  EXPECT_NEAR(stampfli::stampfli_bound(BoundKind::single_general, 0.1, 0.0, 0.0, 1.0, 2, false), 0.05, 1e-15);
  EXPECT_EQ(stampfli::stampfli_bound(BoundKind::single_general, 0.1, 0.4, 0.0, 1.0, 2, false), 0.1);
  EXPECT_NEAR(stampfli::stampfli_bound(BoundKind::doubly, 0.1, 0.0, 0.0, 1.0, 2, true), 0.1 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(stampfli::kemperman_factor(0.5), 2.0);
  EXPECT_EQ(stampfli::kemperman_factor(0.0), 1.0);
  EXPECT_TRUE(std::isinf(stampfli::kemperman_factor(1.0)));
  EXPECT_EQ(stampfli::parse_bound_kind(stampfli::to_string(BoundKind::doubly)), BoundKind::doubly);
  EXPECT_THROW((void)stampfli::parse_bound_kind("triple"), InvalidInput);
}

TEST(Bounds, MonotoneInEpsilon) {
  using stampfli::BoundKind;
  for (auto kind : {BoundKind::single_selfadjoint, BoundKind::single_general, BoundKind::qudit_subspace,
                    BoundKind::doubly}) {
    double prev = -1.0;
    for (double eps : {0.0, 0.01, 0.1, 1.0}) {
      const double b = stampfli::stampfli_bound(kind, eps, 0.2, 0.1, 1.0, 4, false);
      EXPECT_GE(b, prev);
      prev = b;
    }
  }
}

TEST(Weingarten, ClosedFormExamples) {
  EXPECT_NEAR(stampfli::block_radius_sq_closed_form(linalg::identity(4)), 0.0, 1e-15);
  EXPECT_NEAR(stampfli::block_radius_sq_closed_form(sigma3()), 1.0, 1e-15);
  CMatrix e = CMatrix::Zero(6, 6);
  e(0, 0) = 1.0;
  EXPECT_NEAR(stampfli::block_radius_sq_closed_form(e), 1.0 / 28.0, 1e-15);
  EXPECT_NEAR(stampfli::radius_sq_2x2(sigma3()), 1.0, 1e-15);
}

TEST(Weingarten, MonteCarloWithinThreeSigma) {
  CMatrix e = CMatrix::Zero(6, 6);
  e(0, 0) = 1.0;
  const auto w = stampfli::expected_block_radius_sq(e, 200000, {47, 0});
  EXPECT_LE(std::abs(w.mc - w.closed_form), 3.0 * w.sigma / std::sqrt(double(w.n)));
  const auto z = stampfli::expected_block_radius_sq(sigma3(), 1000, {47, 1});
  EXPECT_NEAR(z.mc, 1.0, 1e-12);
  EXPECT_THROW((void)stampfli::expected_block_radius_sq(linalg::identity(1), 10, {47, 2}), InvalidInput);
}

TEST(StampfliJson, CertificateFields) {
  const std::vector<int> coords{0, 1};
  const auto cert = stampfli::estimate_commutation_prob(linalg::identity(2), Isometry::coordinates(2, coords), 0.1,
                                                        10, 0.9, {48, 0});
  const auto j = stampfli::to_json(cert);
  EXPECT_TRUE(j.contains("delta"));
  EXPECT_TRUE(j.at("eta").is_null());
  EXPECT_EQ(std::string(stampfli::kWeingartenCsvHeader), "d,n,mc,closed_form,sigma");
}
