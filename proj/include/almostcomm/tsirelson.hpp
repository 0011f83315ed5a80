#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "almostcomm/algebra.hpp"
#include "almostcomm/ncpoly.hpp"
#include "almostcomm/stampfli.hpp"

namespace almostcomm::tsirelson {

/// Bipartite strategy (A, B, rho). Without factor_dims everything acts on one
/// C^d (commuting model); with factor_dims = (D_A, D_B) the families act on the
/// two factors and rho on C^{D_A} (x) C^{D_B}.
struct Strategy {
  GeneratorFamily A;
  GeneratorFamily B;
  CMatrix rho;
  std::optional<std::pair<int, int>> factor_dims;

  /// Throws InvalidInput unless both families are POVMs, rho is a unit-trace
  /// PSD matrix and the dimensions fit the model.
  void validate(double tol = 1e-9) const;
};

enum class Model { commuting, tensor };

struct CorrelationEntry {
  int a = 0;
  int b = 0;
  int x = 0;
  int y = 0;
  double p = 0.0;
};

/// p(ab|xy), one entry per (A label, B label) pair in family order.
struct CorrelationTable {
  std::vector<CorrelationEntry> entries;
};

/// commuting: Re Tr(rho A B); tensor: Re Tr(rho (A (x) B)).
[[nodiscard]] CorrelationTable correlations(const Strategy& s, Model model);
/// Max entrywise |difference|. ShapeError unless the index sets agree.
[[nodiscard]] double correlation_distance(const CorrelationTable& t1, const CorrelationTable& t2);

/// max over pairs of ||[A_i, B_j]||.
[[nodiscard]] double commutator_eps(const GeneratorFamily& A, const GeneratorFamily& B);

/// B' = sum_l 1_A (x) Tr_A(Pi_l B Pi_l) / d_A^l, written back on C^d.
[[nodiscard]] GeneratorFamily approx_commutant_projection(const GeneratorFamily& B,
                                                          const algebra::BlockDecomposition& dec);

struct DeterministicBounds {
  double displayed = 0.0;  ///< 2 c (c + 1) d^2 eps, c = c1 c2 c3
  double proof_end = 0.0;  ///< c (L(L-1) + (2c + 1) d^2) eps
  double simple = 0.0;     ///< c d^2 eps
};

[[nodiscard]] DeterministicBounds tsirelson_bound_deterministic(double c1, int c2, int c3, int d,
                                                                int L, double epsilon);

/// d(d-1) eps + d sqrt((d^2-1)/6) min(...) with ||B|| <= 1.
[[nodiscard]] double tsirelson_bound_probabilistic(double epsilon, double delta, double eta, int d);

/// Polynomials for one block: P gives Pi_l from the generators; Q1, Q3 give
/// the block's shift and clock (tensored with 1_B) from {Pi_l A Pi_l}.
struct BlockPolynomials {
  NCPolynomial projector;
  NCPolynomial shift;
  NCPolynomial clock;
};

struct GeneratingCertificate {
  std::vector<BlockPolynomials> blocks;

  [[nodiscard]] std::vector<NCPolynomial> all_polynomials() const;
  [[nodiscard]] PolyConstants constants() const;
};

struct CertificateCheck {
  bool ok = false;
  double max_error = 0.0;
  /// Decomposition block index matched by each certificate block (-1 if none).
  std::vector<int> block_match;
  std::string message;
};

/// Evaluates every polynomial and checks it against the decomposition:
/// P_l must equal some Pi_m; Q1, Q3 must be supported on that block, of the
/// form S (x) 1 with S, T unitary, S^n = T^n = 1 and T S = omega S T.
[[nodiscard]] CertificateCheck validate_certificate(const GeneratingCertificate& cert,
                                                    const GeneratorFamily& A,
                                                    const algebra::BlockDecomposition& dec,
                                                    double tol = 1e-8);

struct ProbabilisticOptions {
  double epsilon = 0.0;
  long n_subspaces = 20;
  long n_unitaries = 200;
  double delta_target = 0.1;
  double confidence = 0.999;
};

struct ProbabilisticBlockCert {
  double epsilon_sample = 0.0;
  double projector_commutator = 0.0;  ///< max ||[Pi_l, B]||
  double epsilon = 0.0;               ///< max of the two above
  double delta = 0.0;
  double eta = 0.0;
  long failing_subspaces = 0;
  long tested_subspaces = 0;
};

/// For each block with d_A >= 2 and each B element: draws 2-frames F of H_A^l
/// and Haar U on them, testing ||[U (x) 1, (F^H (x) 1) B_l (F (x) 1)]|| <= eps
/// in the block's tensor coordinates. eta is the largest per-(b, y, l)
/// Clopper-Pearson bound on the fraction of subspaces whose delta exceeds
/// delta_target.
[[nodiscard]] ProbabilisticBlockCert probabilistic_block_certificate(
    const GeneratorFamily& B, const algebra::BlockDecomposition& dec,
    const ProbabilisticOptions& opts, RngSeed rng);

/// Tensor strategy on (sum d_A^l) x (sum d_B^l). Throws ResidualTooLarge when
/// dec does not decompose s.A within 1e-7.
[[nodiscard]] Strategy build_tensor_strategy(const Strategy& s, const algebra::BlockDecomposition& dec);

struct FactorizationRow {
  Label label;  ///< (b, y)
  double actual_error = 0.0;
};

struct BoundSet {
  std::optional<double> schur_simple;
  std::optional<double> thm_general_displayed;
  std::optional<double> thm_general_proof;
  std::optional<double> probabilistic;
};

struct FactorizationReport {
  double epsilon = 0.0;
  std::vector<FactorizationRow> rows;
  double max_error = 0.0;
  BoundSet bounds;
  std::optional<PolyConstants> constants;
  std::optional<CertificateCheck> certificate_check;
  std::optional<ProbabilisticBlockCert> probabilistic;
  double decomposition_residual = 0.0;
  std::vector<std::pair<int, int>> block_dims;
  double correlation_distance = 0.0;

  /// True when a deterministic bound backed by a valid certificate is exceeded.
  [[nodiscard]] bool certified_violation(double slack = 1e-9) const;
};

struct PipelineOptions {
  std::optional<GeneratingCertificate> certificate;
  std::optional<ProbabilisticOptions> probabilistic;
  double certificate_tol = 1e-8;
};

struct PipelineResult {
  algebra::BlockDecomposition decomposition;
  GeneratorFamily b_prime;
  Strategy tensor;
  CorrelationTable commuting_table;
  CorrelationTable tensor_table;
  FactorizationReport report;
};

/// decompose(A) -> B' -> bounds -> tensor strategy -> correlation distance.
[[nodiscard]] PipelineResult run_factorization(const Strategy& s, RngSeed rng,
                                               const PipelineOptions& opts = {});

// Planted instances.

struct BlockSpec {
  int d_A = 1;
  int d_B = 1;
};

struct PlantSpec {
  std::vector<BlockSpec> blocks;
  int a_settings = 2;
  int a_outcomes = 2;
  int b_settings = 2;
  int b_outcomes = 2;
  double epsilon = 0.0;
  /// Use clock/Fourier/block projectors for A and emit a generating certificate.
  bool certificate = false;
};

struct PlantedInstance {
  Strategy strategy;
  algebra::BlockDecomposition ground_truth;
  std::optional<GeneratingCertificate> certificate;
  double achieved_epsilon = 0.0;
};

/// Exact commuting strategy conjugated by a Haar unitary, then B perturbed by
/// Hermitian noise of norm epsilon and renormalized to a POVM.
[[nodiscard]] PlantedInstance plant_instance(const PlantSpec& spec, RngSeed rng);

namespace io {
[[nodiscard]] nlohmann::json strategy_to_json(const Strategy& s);
[[nodiscard]] Strategy strategy_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json certificate_to_json(const GeneratingCertificate& c);
[[nodiscard]] GeneratingCertificate certificate_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json table_to_json(const CorrelationTable& t);
[[nodiscard]] nlohmann::json report_to_json(const FactorizationReport& r);
[[nodiscard]] PlantSpec plant_spec_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json plant_spec_to_json(const PlantSpec& s);

inline constexpr const char* kReportCsvHeader =
    "b,y,actual_error,epsilon,schur_simple,thm_general_displayed,thm_general_proof,"
    "probabilistic,correlation_distance";
/// Header line plus one row per (b, y); missing bounds are written as n/a.
[[nodiscard]] std::string report_to_csv(const FactorizationReport& r);
}  // namespace io

}  // namespace almostcomm::tsirelson
