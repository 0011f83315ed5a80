#include "almostcomm/stampfli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "almostcomm/matrix_io.hpp"

namespace almostcomm::stampfli {

namespace {

EnclosingDisk disk_from(Complex a) { return {a, 0.0, {a}}; }

EnclosingDisk disk_from(Complex a, Complex b) {
  return {0.5 * (a + b), 0.5 * std::abs(a - b), {a, b}};
}

EnclosingDisk disk_from(Complex a, Complex b, Complex c) {
  const Complex ab = b - a;
  const Complex ac = c - a;
  const double cross = ab.real() * ac.imag() - ab.imag() * ac.real();
  const double scale = std::max({std::norm(ab), std::norm(ac), std::norm(c - b)});
  if (std::abs(cross) <= 1e-14 * scale) {
    // Collinear: the widest pair is a diameter.
    EnclosingDisk best = disk_from(a, b);
    for (const auto& cand : {disk_from(a, c), disk_from(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double d = 2.0 * cross;
  const double b2 = std::norm(ab);
  const double c2 = std::norm(ac);
  const Complex off((ac.imag() * b2 - ab.imag() * c2) / d, (ab.real() * c2 - ac.real() * b2) / d);
  return {a + off, std::abs(off), {a, b, c}};
}

bool covers(const EnclosingDisk& disk, Complex p, double eps) {
  return std::abs(p - disk.center) <= disk.radius + eps;
}

double golden_min(double lo, double hi, double tol, const auto& f) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

void require_rate(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput(std::string(what) + " must lie in [0, 1]");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

EnclosingDisk min_enclosing_disk(std::span<const Complex> points) {
  if (points.empty()) throw InvalidInput("min_enclosing_disk: no points");
  for (const auto& p : points) {
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
      throw InvalidInput("min_enclosing_disk: non-finite point");
    }
  }
  std::vector<Complex> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::mt19937_64 shuffle_rng(0x9e3779b97f4a7c15ULL);
  std::shuffle(pts.begin(), pts.end(), shuffle_rng);

  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, std::abs(p));
  const double eps = 1e-13 * scale;

  EnclosingDisk disk = disk_from(pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (covers(disk, pts[i], eps)) continue;
    disk = disk_from(pts[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (covers(disk, pts[j], eps)) continue;
      disk = disk_from(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (covers(disk, pts[k], eps)) continue;
        disk = disk_from(pts[i], pts[j], pts[k]);
      }
    }
  }
  return disk;
}

NearestScalar nearest_scalar_numeric(const CMatrix& c, double tol) {
  linalg::require_valid(c);
  const auto d = static_cast<int>(c.rows());
  const CMatrix eye = linalg::identity(d);
  const Complex c0 = c.trace() / static_cast<double>(d);
  const double r = linalg::op_norm(c - c0 * eye);
  if (r == 0.0) return {c0, 0.0};
  // |c* - Tr(C)/d| = |Tr(C - c*)| / d <= ||C - c*|| <= r.
  const double step = tol * std::max(1.0, r);
  auto f = [&](double x, double y) { return linalg::op_norm(c - Complex(x, y) * eye); };
  auto inner = [&](double x) {
    return golden_min(c0.imag() - r, c0.imag() + r, step, [&](double y) { return f(x, y); });
  };
  const double x = golden_min(c0.real() - r, c0.real() + r, step,
                              [&](double xx) { return f(xx, inner(xx)); });
  const double y = inner(x);
  return {Complex(x, y), f(x, y)};
}

NearestScalar nearest_scalar(const CMatrix& c) {
  linalg::require_valid(c);
  const auto d = static_cast<int>(c.rows());
  const double tol = linalg::default_tol(c);
  std::vector<Complex> spectrum;
  if (linalg::is_hermitian(c, tol)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) spectrum.emplace_back(es.eigenvalues()(i), 0.0);
  } else if (linalg::is_normal(c, tol)) {
    spectrum = linalg::eigenvalues(c);
  } else {
    return nearest_scalar_numeric(c);
  }
  const EnclosingDisk disk = min_enclosing_disk(spectrum);
  return {disk.center, linalg::op_norm(c - disk.center * linalg::identity(d))};
}

double derivation_norm_probe(const CMatrix& c, long n, RngSeed rng) {
  linalg::require_valid(c);
  if (n < 1) throw InvalidInput("derivation_norm_probe: n must be >= 1");
  Rng r(rng);
  const auto d = static_cast<int>(c.rows());
  double best = 0.0;
  for (long i = 0; i < n; ++i) {
    const CMatrix u = linalg::haar_unitary(d, r);
    best = std::max(best, linalg::op_norm(c * u - u * c));
  }
  return best;
}

double clopper_pearson_upper(long failures, long n, double confidence) {
  if (n < 1) throw InvalidInput("clopper_pearson_upper: n must be >= 1");
  if (failures < 0 || failures > n) throw InvalidInput("clopper_pearson_upper: failures out of range");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidInput("clopper_pearson_upper: confidence must lie in (0, 1)");
  }
  if (failures == n) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(failures + 1), static_cast<double>(n - failures),
                                confidence);
}

ProbabilisticCert estimate_commutation_prob(const CMatrix& c, const Isometry& frame, double epsilon,
                                            long n, double confidence, RngSeed rng) {
  linalg::require_valid(c);
  if (n < 1) throw InvalidInput("estimate_commutation_prob: n must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidInput("estimate_commutation_prob: epsilon must be positive");
  const int k = frame.sub_dim();
  if (k < 2) throw InvalidInput("estimate_commutation_prob: frame must have dimension >= 2");
  const CMatrix ck = linalg::compress(c, frame);
  Rng r(rng);
  long failures = 0;
  for (long i = 0; i < n; ++i) {
    const CMatrix u = linalg::haar_unitary(k, r);
    if (linalg::op_norm(ck * u - u * ck) > epsilon) ++failures;
  }
  ProbabilisticCert cert;
  cert.epsilon = epsilon;
  cert.delta = clopper_pearson_upper(failures, n, confidence);
  cert.n_unitary_samples = n;
  cert.n_subspace_samples = 1;
  cert.subspace_dim = k;
  cert.confidence = confidence;
  cert.seed = rng;
  cert.failures = failures;
  return cert;
}

ProbabilisticCert doubly_estimate(const CMatrix& c, double epsilon, long n_subspaces,
                                  long n_unitaries, double delta_target, double confidence,
                                  RngSeed rng) {
  linalg::require_valid(c);
  const auto d = static_cast<int>(c.rows());
  if (d < 2) throw InvalidInput("doubly_estimate: dimension must be >= 2");
  if (n_subspaces < 1 || n_unitaries < 1) throw InvalidInput("doubly_estimate: zero sample count");
  require_rate(delta_target, "delta_target");
  Rng frames(rng);
  long failing = 0;
  for (long i = 0; i < n_subspaces; ++i) {
    const Isometry frame(linalg::haar_frame(d, 2, frames));
    const auto sub = estimate_commutation_prob(c, frame, epsilon, n_unitaries, confidence,
                                               rng.child(static_cast<std::uint64_t>(i) + 1));
    if (sub.delta > delta_target) ++failing;
  }
  ProbabilisticCert cert;
  cert.epsilon = epsilon;
  cert.delta = delta_target;
  cert.eta = clopper_pearson_upper(failing, n_subspaces, confidence);
  cert.n_unitary_samples = n_unitaries;
  cert.n_subspace_samples = n_subspaces;
  cert.subspace_dim = 2;
  cert.confidence = confidence;
  cert.seed = rng;
  cert.failures = failing;
  return cert;
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::single_selfadjoint: return "single_selfadjoint";
    case BoundKind::single_general: return "single_general";
    case BoundKind::doubly: return "double";
    case BoundKind::qudit_subspace: return "qudit_subspace";
  }
  return "unknown";
}

BoundKind parse_bound_kind(const std::string& s) {
  for (auto k : {BoundKind::single_selfadjoint, BoundKind::single_general, BoundKind::doubly,
                 BoundKind::qudit_subspace}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidInput("unknown bound kind '" + s + "'");
}

double kemperman_factor(double delta) {
  require_rate(delta, "delta");
  if (delta >= 1.0) return std::numeric_limits<double>::infinity();
  const double q = 1.0 / (1.0 - delta);
  // Absorb rounding in 1/(1-delta) so exact integers are not bumped up.
  return std::ceil(q * (1.0 - 1e-12));
}

double stampfli_bound(BoundKind kind, double epsilon, double delta, double eta, double norm_c, int d,
                      bool selfadjoint) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be >= 0");
  if (!(norm_c >= 0.0) || !std::isfinite(norm_c)) throw InvalidInput("norm_c must be >= 0");
  require_rate(delta, "delta");
  const double inf = std::numeric_limits<double>::infinity();
  const double ceil_branch = delta >= 1.0 ? inf : kemperman_factor(delta) * epsilon / 2.0;
  const double linear = std::sqrt(1.0 - delta) * epsilon + 2.0 * std::sqrt(delta) * norm_c;

  switch (kind) {
    case BoundKind::single_selfadjoint:
      return std::min(std::sqrt(2.0) / 2.0 * linear, ceil_branch);
    case BoundKind::single_general:
      return std::min(std::sqrt(2.0) * linear, ceil_branch);
    case BoundKind::qudit_subspace:
      return std::min((selfadjoint ? std::sqrt(2.0) : 2.0 * std::sqrt(2.0)) * linear, ceil_branch);
    case BoundKind::doubly: {
      require_rate(eta, "eta");
      if (d < 2) throw InvalidInput("stampfli_bound: double kind needs d >= 2");
      const double lead = (selfadjoint ? 1.0 : 2.0) * std::sqrt((d * d - 1.0) / 6.0);
      const double b1 = std::sqrt((1.0 - eta) * (1.0 - delta)) * epsilon +
                        2.0 * norm_c * std::sqrt(delta * (1.0 - eta) + eta);
      const double b2 = delta >= 1.0 ? inf
                                     : std::sqrt(1.0 - eta) * kemperman_factor(delta) * epsilon +
                                           2.0 * norm_c * std::sqrt(eta);
      return lead * std::min(b1, b2);
    }
  }
  throw InvalidInput("stampfli_bound: unknown kind");
}

double radius_sq_2x2(const CMatrix& ck) {
  if (ck.rows() != 2 || ck.cols() != 2) throw ShapeError("radius_sq_2x2: expected a 2x2 matrix");
  const Complex tr = ck.trace();
  const Complex det = ck(0, 0) * ck(1, 1) - ck(0, 1) * ck(1, 0);
  return 0.25 * (tr * tr - 4.0 * det).real();
}

double block_radius_sq_closed_form(const CMatrix& c) {
  linalg::require_valid(c);
  const auto d = static_cast<int>(c.rows());
  if (d < 2) throw InvalidInput("block radius: dimension must be >= 2");
  if (!linalg::is_hermitian(c, linalg::default_tol(c))) {
    throw InvalidInput("block radius: matrix must be Hermitian");
  }
  const double tr = c.trace().real();
  const double tr2 = (c * c).trace().real();
  return 3.0 / (2.0 * d * (d * d - 1.0)) * (d * tr2 - tr * tr);
}

WeingartenEstimate expected_block_radius_sq(const CMatrix& c, long n, RngSeed rng) {
  WeingartenEstimate w;
  w.closed_form = block_radius_sq_closed_form(c);
  if (n < 2) throw InvalidInput("expected_block_radius_sq: n must be >= 2");
  w.d = static_cast<int>(c.rows());
  w.n = n;
  const CMatrix h = 0.5 * (c + c.adjoint());
  Rng r(rng);
  double mean = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const CMatrix f = linalg::haar_frame(w.d, 2, r);
    const double x = radius_sq_2x2(f.adjoint() * h * f);
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  w.mc = mean;
  w.sigma = std::sqrt(m2 / static_cast<double>(n - 1));
  return w;
}

nlohmann::json to_json(const ProbabilisticCert& cert) {
  return {{"epsilon", cert.epsilon},
          {"delta", cert.delta},
          {"eta", cert.eta ? nlohmann::json(*cert.eta) : nlohmann::json(nullptr)},
          {"n_unitary_samples", cert.n_unitary_samples},
          {"n_subspace_samples", cert.n_subspace_samples},
          {"subspace_dim", cert.subspace_dim},
          {"confidence", cert.confidence},
          {"failures", cert.failures},
          {"seed", {{"seed", cert.seed.seed}, {"stream_id", cert.seed.stream_id}}}};
}

nlohmann::json to_json(const EnclosingDisk& disk) {
  nlohmann::json support = nlohmann::json::array();
  for (const auto& p : disk.support) support.push_back(io::complex_to_json(p));
  return {{"center", io::complex_to_json(disk.center)}, {"radius", disk.radius}, {"support", support}};
}

std::string csv_row(const WeingartenEstimate& w) {
  return std::to_string(w.d) + "," + std::to_string(w.n) + "," + fmt_double(w.mc) + "," +
         fmt_double(w.closed_form) + "," + fmt_double(w.sigma);
}

}  // namespace almostcomm::stampfli
