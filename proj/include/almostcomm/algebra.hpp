#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "almostcomm/linalg.hpp"

namespace almostcomm {

/// Measurement label: outcome a of setting x.
struct Label {
  int a = 0;
  int x = 0;

  friend auto operator<=>(const Label&, const Label&) = default;
};

struct FamilyFlags {
  bool selfadjoint = false;
  bool contractive = false;
  bool povm = false;
};

/// Labeled operator family {A_{a|x}} on a common C^d. The flags are
/// validated at construction; nothing is trusted beyond what they assert.
class GeneratorFamily {
 public:
  GeneratorFamily() = default;
  /// Throws InvalidInput on empty input, mismatched dims, duplicate labels or a
  /// flag that the matrices do not satisfy within `tol`.
  GeneratorFamily(std::vector<Label> labels, std::vector<CMatrix> matrices, FamilyFlags flags,
                  double tol = 1e-9);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return matrices_.size(); }
  [[nodiscard]] const std::vector<Label>& labels() const { return labels_; }
  [[nodiscard]] const std::vector<CMatrix>& matrices() const { return matrices_; }
  [[nodiscard]] const FamilyFlags& flags() const { return flags_; }

  /// Throws LabelError when absent.
  [[nodiscard]] const CMatrix& at(Label label) const;
  [[nodiscard]] bool contains(Label label) const;

  /// Sorted distinct settings x, and the outcomes present for one setting.
  [[nodiscard]] std::vector<int> settings() const;
  [[nodiscard]] std::vector<int> outcomes(int x) const;

  /// Same labels and flags with new matrices (validation re-run).
  [[nodiscard]] GeneratorFamily with_matrices(std::vector<CMatrix> matrices,
                                              double tol = 1e-9) const;

 private:
  int dim_ = 0;
  std::vector<Label> labels_;
  std::vector<CMatrix> matrices_;
  FamilyFlags flags_;
};

namespace algebra {

/// Unital *-algebra given by a Hilbert-Schmidt orthonormal basis.
struct MatrixAlgebra {
  int dim = 0;
  std::vector<CMatrix> basis;

  [[nodiscard]] int alg_dim() const { return static_cast<int>(basis.size()); }
};

/// One Artin-Wedderburn summand. In the basis frame * block_unitary the block
/// algebra acts as B(C^{d_A}) (x) 1_{d_B}, composite index i * d_B + k.
struct Block {
  CMatrix projector;
  Isometry frame;
  CMatrix block_unitary;
  int d_A = 0;
  int d_B = 0;

  /// frame * block_unitary: d x (d_A d_B) isometry onto range(projector).
  [[nodiscard]] CMatrix basis() const { return frame.columns() * block_unitary; }
  /// Operator on the block in tensor coordinates.
  [[nodiscard]] CMatrix to_block(const CMatrix& op) const;
  /// The d_A x d_A factor: Tr_B(to_block(op)) / d_B.
  [[nodiscard]] CMatrix a_factor(const CMatrix& op) const;
  /// The d_B x d_B factor: Tr_A(to_block(op)) / d_A.
  [[nodiscard]] CMatrix b_factor(const CMatrix& op) const;
};

struct BlockDecomposition {
  int dim = 0;
  std::vector<Block> blocks;
  double residual = 0.0;

  [[nodiscard]] int num_blocks() const { return static_cast<int>(blocks.size()); }
};

struct ClosureOptions {
  double tol = 1e-8;
  /// 0 means d^2, which always suffices.
  int max_degree = 0;
};

/// Span of all words in the generators and their adjoints, built degree by
/// degree with Gram-Schmidt. Throws DegreeExceeded if the span still grows at
/// max_degree.
[[nodiscard]] MatrixAlgebra generate_algebra(const GeneratorFamily& gens, ClosureOptions opts = {});
[[nodiscard]] MatrixAlgebra generate_algebra(std::span<const CMatrix> gens, ClosureOptions opts = {});

/// {X : [X, B] = 0 for every basis element B}, from the null space of the
/// stacked commutator maps. `tol` is relative to the largest singular value.
[[nodiscard]] MatrixAlgebra commutant(const MatrixAlgebra& alg, double tol = 1e-5);

/// span(alg) intersected with span(commutant(alg)): principal directions
/// whose angle is at most `tol`.
[[nodiscard]] MatrixAlgebra center(const MatrixAlgebra& alg, double tol = 1e-5);

/// Largest principal-angle sine between two spans (0 when they coincide).
[[nodiscard]] double span_distance(const MatrixAlgebra& a, const MatrixAlgebra& b);

struct ProjectionOptions {
  /// Relative eigenvalue gap (fraction of the spectral spread) that splits clusters.
  double cluster_gap = 1e-6;
  int max_retries = 8;
};

/// Minimal central projections, as spectral projections of a random
/// self-adjoint central element. Retries on successor streams when clusters
/// do not match the center dimension; throws DegenerateSample after that.
[[nodiscard]] std::vector<CMatrix> central_projections(const MatrixAlgebra& alg, RngSeed rng,
                                                       ProjectionOptions opts = {});

/// Builds the per-block tensor split. Throws NotSemisimpleWithinTol when a
/// block dimension is not a perfect square or does not divide the rank.
[[nodiscard]] BlockDecomposition block_factorize(const MatrixAlgebra& alg,
                                                 const std::vector<CMatrix>& projections,
                                                 RngSeed rng = {0x5eed, 0},
                                                 ProjectionOptions opts = {});

/// generate_algebra -> central_projections -> block_factorize.
[[nodiscard]] BlockDecomposition decompose(const GeneratorFamily& gens, RngSeed rng,
                                           ClosureOptions closure = {});

/// Max over generators and blocks of ||to_block(A) - A^l (x) 1|| together with
/// the off-block leakage ||A - sum_l P_l A P_l||.
[[nodiscard]] double verify_decomposition(const GeneratorFamily& gens,
                                          const BlockDecomposition& dec);
[[nodiscard]] double verify_decomposition(std::span<const CMatrix> ops,
                                          const BlockDecomposition& dec);

}  // namespace algebra

namespace io {
[[nodiscard]] nlohmann::json family_to_json(const GeneratorFamily& f);
/// {"d": int, "flags": {...}, "items": [{"a", "x", "matrix"}]}.
[[nodiscard]] GeneratorFamily family_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json decomposition_to_json(const algebra::BlockDecomposition& dec);
[[nodiscard]] algebra::BlockDecomposition decomposition_from_json(const nlohmann::json& j);
}  // namespace io

}  // namespace almostcomm
