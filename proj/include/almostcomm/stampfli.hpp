#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "almostcomm/linalg.hpp"

namespace almostcomm::stampfli {

struct EnclosingDisk {
  Complex center;
  double radius = 0.0;
  /// Up to three input points on the boundary that pin the disk.
  std::vector<Complex> support;
};

/// Smallest disk containing every point (Welzl). The result does not depend
/// on input order. Throws InvalidInput on an empty list.
[[nodiscard]] EnclosingDisk min_enclosing_disk(std::span<const Complex> points);

struct NearestScalar {
  Complex c;
  double dist = 0.0;  ///< ||C - c 1||_op
};

/// argmin_c ||C - c 1||. Normal C goes through the enclosing disk of the
/// spectrum, anything else through nearest_scalar_numeric.
[[nodiscard]] NearestScalar nearest_scalar(const CMatrix& c);

/// Direct minimization of the convex map c -> ||C - c 1|| by nested
/// golden-section search over (Re c, Im c), started at Tr(C)/d.
[[nodiscard]] NearestScalar nearest_scalar_numeric(const CMatrix& c, double tol = 1e-10);

/// max over n Haar unitaries of ||[C, U]||.
[[nodiscard]] double derivation_norm_probe(const CMatrix& c, long n, RngSeed rng);

/// One-sided Clopper-Pearson upper bound for a binomial rate with `failures`
/// out of `n` at level `confidence`.
[[nodiscard]] double clopper_pearson_upper(long failures, long n, double confidence);

struct ProbabilisticCert {
  double epsilon = 0.0;
  double delta = 0.0;
  /// Only present for two-level (subspace and unitary) certificates.
  std::optional<double> eta;
  long n_unitary_samples = 0;
  long n_subspace_samples = 0;
  int subspace_dim = 2;
  double confidence = 0.999;
  RngSeed seed;
  long failures = 0;  ///< unitary failures (single) or failing subspaces (doubly)
};

/// Samples n Haar unitaries U on the frame's range and counts
/// ||[frame^H C frame, U]|| > epsilon. delta is the Clopper-Pearson upper bound.
[[nodiscard]] ProbabilisticCert estimate_commutation_prob(const CMatrix& c, const Isometry& frame,
                                                          double epsilon, long n,
                                                          double confidence, RngSeed rng);

/// Draws n_subspaces Haar 2-frames and runs estimate_commutation_prob on each.
/// A subspace fails when its delta exceeds delta_target; eta bounds that rate.
[[nodiscard]] ProbabilisticCert doubly_estimate(const CMatrix& c, double epsilon, long n_subspaces,
                                                long n_unitaries, double delta_target,
                                                double confidence, RngSeed rng);

enum class BoundKind { single_selfadjoint, single_general, doubly, qudit_subspace };

[[nodiscard]] std::string to_string(BoundKind kind);
/// Accepts the names produced by to_string; InvalidInput otherwise.
[[nodiscard]] BoundKind parse_bound_kind(const std::string& s);

/// ceil(1/(1-delta)), +inf for delta >= 1.
[[nodiscard]] double kemperman_factor(double delta);

/// Closed-form upper bound on inf_c ||C - c 1||. eta is used only by
/// `doubly`, d only by `doubly`; `selfadjoint` selects the reduced leading
/// constant for `doubly` and `qudit_subspace`.
[[nodiscard]] double stampfli_bound(BoundKind kind, double epsilon, double delta, double eta,
                                    double norm_c, int d, bool selfadjoint);

/// R(sigma(C_K))^2 for a 2x2 Hermitian C_K: ((Tr C_K)^2 - 4 det C_K) / 4.
[[nodiscard]] double radius_sq_2x2(const CMatrix& ck);

struct WeingartenEstimate {
  int d = 0;
  long n = 0;
  double mc = 0.0;
  double closed_form = 0.0;
  double sigma = 0.0;  ///< sample standard deviation of R^2
};

/// Monte-Carlo mean of R(sigma(C_K))^2 over Haar 2-frames K, with the closed
/// form 3 / (2d(d^2-1)) (d Tr C^2 - (Tr C)^2). Throws InvalidInput unless C is
/// Hermitian with d >= 2.
[[nodiscard]] WeingartenEstimate expected_block_radius_sq(const CMatrix& c, long n, RngSeed rng);
[[nodiscard]] double block_radius_sq_closed_form(const CMatrix& c);

[[nodiscard]] nlohmann::json to_json(const ProbabilisticCert& cert);
[[nodiscard]] nlohmann::json to_json(const EnclosingDisk& disk);

inline constexpr const char* kWeingartenCsvHeader = "d,n,mc,closed_form,sigma";
[[nodiscard]] std::string csv_row(const WeingartenEstimate& w);

}  // namespace almostcomm::stampfli
