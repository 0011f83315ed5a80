#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "almostcomm/errors.hpp"
#include "almostcomm/rng.hpp"

namespace almostcomm {

using Complex = std::complex<double>;
/// Dense complex square matrix; the operator carrier used throughout.
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// d x k matrix with orthonormal columns. The projector onto its range is
/// columns * columns^H.
class Isometry {
 public:
  /// Throws InvalidInput unless columns^H columns = 1_k within tol.
  explicit Isometry(CMatrix columns, double tol = 1e-9);

  [[nodiscard]] int ambient_dim() const { return static_cast<int>(columns_.rows()); }
  [[nodiscard]] int sub_dim() const { return static_cast<int>(columns_.cols()); }
  [[nodiscard]] const CMatrix& columns() const { return columns_; }
  [[nodiscard]] CMatrix projector() const { return columns_ * columns_.adjoint(); }

  /// Frame spanning the given standard basis vectors.
  static Isometry coordinates(int ambient_dim, std::span<const int> indices);

 private:
  CMatrix columns_;
};

namespace linalg {

enum class Factor { first = 1, second = 2 };

/// Throws InvalidInput on a non-square, empty or non-finite matrix.
void require_valid(const CMatrix& m, const char* what = "matrix");
[[nodiscard]] bool is_finite(const CMatrix& m);

/// Default comparison tolerance, 1e-9 * max(1, ||m||_op).
[[nodiscard]] double default_tol(const CMatrix& m);

[[nodiscard]] double op_norm(const CMatrix& m);
[[nodiscard]] double max_norm(const CMatrix& m);
[[nodiscard]] std::vector<double> singular_values(const CMatrix& m);

[[nodiscard]] bool is_hermitian(const CMatrix& m, double tol);
[[nodiscard]] bool is_unitary(const CMatrix& m, double tol);
[[nodiscard]] bool is_psd(const CMatrix& m, double tol);
[[nodiscard]] bool is_normal(const CMatrix& m, double tol);

[[nodiscard]] CMatrix commutator(const CMatrix& a, const CMatrix& b);
[[nodiscard]] CMatrix kron(const CMatrix& a, const CMatrix& b);
[[nodiscard]] CMatrix direct_sum(std::span<const CMatrix> blocks);

/// Unnormalized partial trace over one factor of C^{d1} (x) C^{d2}, with the
/// composite index i * d2 + k.
[[nodiscard]] CMatrix partial_trace(const CMatrix& m, int d1, int d2, Factor traced);

/// frame^H * c * frame, the compression of c to the frame's range.
[[nodiscard]] CMatrix compress(const CMatrix& c, const Isometry& frame);

struct Eigensystem {
  RVector eigenvalues;  // ascending
  CMatrix eigenvectors;  // columns
};

/// Throws InvalidInput if m is not Hermitian within default_tol(m).
[[nodiscard]] Eigensystem hermitian_eigensystem(const CMatrix& m);
[[nodiscard]] std::vector<Complex> eigenvalues(const CMatrix& m);

/// Haar-distributed unitary: complex Ginibre matrix followed by QR with the
/// diagonal of R made positive.
[[nodiscard]] CMatrix haar_unitary(int d, Rng& rng);
[[nodiscard]] CMatrix haar_unitary(int d, RngSeed seed);

/// First k columns of a Haar unitary, i.e. a uniformly random k-frame.
[[nodiscard]] CMatrix haar_frame(int d, int k, Rng& rng);

/// Ginibre matrix with standard complex normal entries.
[[nodiscard]] CMatrix ginibre(int rows, int cols, Rng& rng);
[[nodiscard]] CMatrix random_hermitian(int d, Rng& rng);

/// Inverse square root of a positive definite Hermitian matrix.
[[nodiscard]] CMatrix inverse_sqrt_psd(const CMatrix& m);
/// Zeroes negative eigenvalues of a Hermitian matrix.
[[nodiscard]] CMatrix clip_psd(const CMatrix& m);

[[nodiscard]] CMatrix identity(int d);

}  // namespace linalg
}  // namespace almostcomm
