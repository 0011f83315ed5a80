#include "almostcomm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace almostcomm {

Isometry::Isometry(CMatrix columns, double tol) : columns_(std::move(columns)) {
  if (columns_.rows() < 1 || columns_.cols() < 1 || columns_.cols() > columns_.rows()) {
    throw InvalidInput("isometry must be d x k with 1 <= k <= d");
  }
  if (!linalg::is_finite(columns_)) {
    throw InvalidInput("isometry has non-finite entries");
  }
  const CMatrix gram = columns_.adjoint() * columns_;
  const CMatrix eye = CMatrix::Identity(columns_.cols(), columns_.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > tol) {
    throw InvalidInput("isometry columns are not orthonormal");
  }
}

Isometry Isometry::coordinates(int ambient_dim, std::span<const int> indices) {
  CMatrix cols = CMatrix::Zero(ambient_dim, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] < 0 || indices[j] >= ambient_dim) {
      throw InvalidInput("coordinate index out of range");
    }
    cols(indices[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return Isometry(std::move(cols));
}

namespace linalg {

bool is_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

void require_valid(const CMatrix& m, const char* what) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw InvalidInput(std::string(what) + " must be a non-empty square matrix");
  }
  if (!is_finite(m)) {
    throw InvalidInput(std::string(what) + " has non-finite entries");
  }
}

double default_tol(const CMatrix& m) { return 1e-9 * std::max(1.0, op_norm(m)); }

std::vector<double> singular_values(const CMatrix& m) {
  if (m.size() == 0) throw InvalidInput("empty matrix");
  if (!is_finite(m)) throw InvalidInput("matrix has non-finite entries");
  RVector s;
  if (std::max(m.rows(), m.cols()) <= 64) {
    s = Eigen::JacobiSVD<CMatrix>(m).singularValues();
  } else {
    s = Eigen::BDCSVD<CMatrix>(m).singularValues();
  }
  return {s.data(), s.data() + s.size()};
}

double op_norm(const CMatrix& m) {
  if (m.size() == 0) throw InvalidInput("empty matrix");
  if (!is_finite(m)) throw InvalidInput("matrix has non-finite entries");
  if (std::max(m.rows(), m.cols()) <= 64) {
    return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
  }
  return Eigen::BDCSVD<CMatrix>(m).singularValues()(0);
}

double max_norm(const CMatrix& m) {
  if (m.size() == 0) throw InvalidInput("empty matrix");
  if (!is_finite(m)) throw InvalidInput("matrix has non-finite entries");
  return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const CMatrix eye = CMatrix::Identity(m.rows(), m.cols());
  return (m.adjoint() * m - eye).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const CMatrix& m, double tol) {
  if (!is_hermitian(m, tol)) return false;
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) >= -tol;
}

bool is_normal(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return op_norm(m * m.adjoint() - m.adjoint() * m) <= tol;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw ShapeError("commutator: operands must be square matrices of equal dimension");
  }
  return a * b - b * a;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix direct_sum(std::span<const CMatrix> blocks) {
  if (blocks.empty()) throw InvalidInput("direct_sum of an empty list");
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  CMatrix out = CMatrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

CMatrix partial_trace(const CMatrix& m, int d1, int d2, Factor traced) {
  if (d1 < 1 || d2 < 1 || m.rows() != static_cast<Eigen::Index>(d1) * d2 || m.cols() != m.rows()) {
    throw ShapeError("partial_trace: matrix dimension must equal d1 * d2");
  }
  if (traced == Factor::second) {
    CMatrix out = CMatrix::Zero(d1, d1);
    for (int i = 0; i < d1; ++i) {
      for (int j = 0; j < d1; ++j) {
        out(i, j) = m.block(i * d2, j * d2, d2, d2).trace();
      }
    }
    return out;
  }
  CMatrix out = CMatrix::Zero(d2, d2);
  for (int i = 0; i < d1; ++i) {
    out += m.block(i * d2, i * d2, d2, d2);
  }
  return out;
}

CMatrix compress(const CMatrix& c, const Isometry& frame) {
  if (c.rows() != frame.ambient_dim() || c.cols() != c.rows()) {
    throw ShapeError("compress: frame ambient dimension does not match matrix");
  }
  return frame.columns().adjoint() * c * frame.columns();
}

Eigensystem hermitian_eigensystem(const CMatrix& m) {
  require_valid(m);
  if (!is_hermitian(m, default_tol(m))) {
    throw InvalidInput("hermitian_eigensystem: matrix is not Hermitian");
  }
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<Complex> eigenvalues(const CMatrix& m) {
  require_valid(m);
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

CMatrix ginibre(int rows, int cols, Rng& rng) {
  CMatrix g(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) g(i, j) = rng.complex_normal();
  }
  return g;
}

CMatrix haar_frame(int d, int k, Rng& rng) {
  if (d < 1 || k < 1 || k > d) throw InvalidInput("haar_frame: need 1 <= k <= d");
  const CMatrix g = ginibre(d, k, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, k);
  const CMatrix& r = qr.matrixQR();
  for (int j = 0; j < k; ++j) {
    const double mod = std::abs(r(j, j));
    if (mod > 0.0) q.col(j) *= r(j, j) / mod;
  }
  return q;
}

CMatrix haar_unitary(int d, Rng& rng) {
  if (d < 1) throw InvalidInput("haar_unitary: dimension must be >= 1");
  return haar_frame(d, d, rng);
}

CMatrix haar_unitary(int d, RngSeed seed) {
  Rng rng(seed);
  return haar_unitary(d, rng);
}

CMatrix random_hermitian(int d, Rng& rng) {
  const CMatrix g = ginibre(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

CMatrix inverse_sqrt_psd(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  const RVector& ev = es.eigenvalues();
  if (ev(0) <= 0.0) throw InvalidInput("inverse_sqrt_psd: matrix is not positive definite");
  const RVector inv = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix clip_psd(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  const RVector ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix identity(int d) { return CMatrix::Identity(d, d); }

}  // namespace linalg
}  // namespace almostcomm
