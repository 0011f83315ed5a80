#include "almostcomm/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace almostcomm {

// ---------------------------------------------------------------------------
// GeneratorFamily

GeneratorFamily::GeneratorFamily(std::vector<Label> labels, std::vector<CMatrix> matrices,
                                 FamilyFlags flags, double tol)
    : labels_(std::move(labels)), matrices_(std::move(matrices)), flags_(flags) {
  if (matrices_.empty()) throw InvalidInput("generator family is empty");
  if (labels_.size() != matrices_.size()) {
    throw InvalidInput("generator family: label and matrix counts differ");
  }
  dim_ = static_cast<int>(matrices_.front().rows());
  std::set<Label> seen;
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    const CMatrix& m = matrices_[i];
    linalg::require_valid(m, "generator");
    if (m.rows() != dim_) throw InvalidInput("generator family: mismatched dimensions");
    if (!seen.insert(labels_[i]).second) throw InvalidInput("generator family: duplicate label");
    const double scale = std::max(1.0, linalg::max_norm(m));
    if (flags_.selfadjoint && !linalg::is_hermitian(m, tol * scale)) {
      throw InvalidInput("generator family: selfadjoint flag set on a non-Hermitian matrix");
    }
    if (flags_.contractive && linalg::op_norm(m) > 1.0 + tol) {
      throw InvalidInput("generator family: contractive flag set on a matrix with norm > 1");
    }
    if (flags_.povm && !linalg::is_psd(m, tol)) {
      throw InvalidInput("generator family: povm flag set on a non-PSD matrix");
    }
  }
  if (flags_.povm) {
    const CMatrix eye = linalg::identity(dim_);
    for (int x : settings()) {
      CMatrix sum = CMatrix::Zero(dim_, dim_);
      for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].x == x) sum += matrices_[i];
      }
      if ((sum - eye).cwiseAbs().maxCoeff() > tol) {
        throw InvalidInput("generator family: POVM elements of setting " + std::to_string(x) +
                           " do not sum to the identity");
      }
    }
  }
}

const CMatrix& GeneratorFamily::at(Label label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return matrices_[i];
  }
  throw LabelError("unknown label (" + std::to_string(label.a) + "|" + std::to_string(label.x) +
                   ")");
}

bool GeneratorFamily::contains(Label label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::vector<int> GeneratorFamily::settings() const {
  std::set<int> xs;
  for (const auto& l : labels_) xs.insert(l.x);
  return {xs.begin(), xs.end()};
}

std::vector<int> GeneratorFamily::outcomes(int x) const {
  std::set<int> as;
  for (const auto& l : labels_) {
    if (l.x == x) as.insert(l.a);
  }
  return {as.begin(), as.end()};
}

GeneratorFamily GeneratorFamily::with_matrices(std::vector<CMatrix> matrices, double tol) const {
  return GeneratorFamily(labels_, std::move(matrices), flags_, tol);
}

namespace algebra {

namespace {

using VecMap = Eigen::Map<const CVector>;

CVector vec(const CMatrix& m) { return VecMap(m.data(), m.size()); }

CMatrix unvec(const CVector& v, int d) { return Eigen::Map<const CMatrix>(v.data(), d, d); }

/// Growing orthonormal column set in C^n.
class OrthoBasis {
 public:
  explicit OrthoBasis(Eigen::Index n) : q_(n, std::min<Eigen::Index>(n, 16)) {}

  /// Adds the component of v orthogonal to the current span when its norm
  /// exceeds rel_tol * max(|v|, scale). Returns whether a vector was added.
  bool try_add(CVector v, double rel_tol, double scale = 0.0) {
    const double norm0 = v.norm();
    if (norm0 == 0.0) return false;
    const double ref = std::max(norm0, scale);
    if (count_ == q_.rows()) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (count_ > 0) {
        const auto q = q_.leftCols(count_);
        v -= q * (q.adjoint() * v);
      }
    }
    const double r = v.norm();
    if (r <= rel_tol * ref) return false;
    if (count_ == q_.cols()) q_.conservativeResize(Eigen::NoChange, std::min(q_.rows(), 2 * q_.cols()));
    q_.col(count_++) = v / r;
    return true;
  }

  [[nodiscard]] Eigen::Index size() const { return count_; }
  [[nodiscard]] CMatrix matrix() const { return q_.leftCols(count_); }
  [[nodiscard]] CVector col(Eigen::Index i) const { return q_.col(i); }

 private:
  CMatrix q_;
  Eigen::Index count_ = 0;
};

MatrixAlgebra from_columns(const CMatrix& q, int d) {
  MatrixAlgebra alg;
  alg.dim = d;
  alg.basis.reserve(static_cast<std::size_t>(q.cols()));
  for (Eigen::Index j = 0; j < q.cols(); ++j) alg.basis.push_back(unvec(q.col(j), d));
  return alg;
}

CMatrix stacked(const MatrixAlgebra& alg) {
  const Eigen::Index n2 = static_cast<Eigen::Index>(alg.dim) * alg.dim;
  CMatrix q(n2, alg.alg_dim());
  for (int j = 0; j < alg.alg_dim(); ++j) q.col(j) = vec(alg.basis[static_cast<std::size_t>(j)]);
  return q;
}

struct Cluster {
  int begin = 0;
  int size = 0;
};

// Splits ascending eigenvalues wherever consecutive values differ by more
// than gap * spread.
std::vector<Cluster> cluster_eigenvalues(const RVector& ev, double rel_gap) {
  std::vector<Cluster> out;
  const auto n = static_cast<int>(ev.size());
  if (n == 0) return out;
  const double spread = ev(n - 1) - ev(0);
  const double gap = rel_gap * spread;
  out.push_back({0, 1});
  for (int i = 1; i < n; ++i) {
    if (spread > 1e-12 && ev(i) - ev(i - 1) > gap) {
      out.push_back({i, 1});
    } else {
      ++out.back().size;
    }
  }
  return out;
}

RngSeed retry_stream(RngSeed base, int attempt) {
  return RngSeed{base.seed, base.stream_id + static_cast<std::uint64_t>(attempt)};
}

}  // namespace

CMatrix Block::to_block(const CMatrix& op) const {
  const CMatrix b = basis();
  return b.adjoint() * op * b;
}

CMatrix Block::a_factor(const CMatrix& op) const {
  return linalg::partial_trace(to_block(op), d_A, d_B, linalg::Factor::second) /
         static_cast<double>(d_B);
}

CMatrix Block::b_factor(const CMatrix& op) const {
  return linalg::partial_trace(to_block(op), d_A, d_B, linalg::Factor::first) /
         static_cast<double>(d_A);
}

MatrixAlgebra generate_algebra(std::span<const CMatrix> gens, ClosureOptions opts) {
  if (gens.empty()) throw InvalidInput("generate_algebra: empty generator list");
  const auto d = static_cast<int>(gens.front().rows());
  for (const auto& g : gens) {
    linalg::require_valid(g, "generator");
    if (g.rows() != d) throw ShapeError("generate_algebra: mismatched generator dimensions");
  }
  const int max_degree = opts.max_degree > 0 ? opts.max_degree : d * d;

  std::vector<CMatrix> letters(gens.begin(), gens.end());
  for (const auto& g : gens) {
    if (!linalg::is_hermitian(g, linalg::default_tol(g))) letters.push_back(g.adjoint());
  }

  std::vector<double> letter_norms;
  for (const auto& g : letters) letter_norms.push_back(linalg::op_norm(g));

  OrthoBasis basis(static_cast<Eigen::Index>(d) * d);
  basis.try_add(vec(linalg::identity(d)), opts.tol);

  std::vector<Eigen::Index> frontier;
  for (const auto& g : letters) {
    if (basis.try_add(vec(g), opts.tol)) frontier.push_back(basis.size() - 1);
  }

  int degree = 1;
  while (!frontier.empty()) {
    if (degree > max_degree) {
      throw DegreeExceeded("generate_algebra: span still growing at degree " +
                           std::to_string(degree));
    }
    std::vector<Eigen::Index> next;
    for (const Eigen::Index idx : frontier) {
      const CMatrix word = unvec(basis.col(idx), d);
      for (std::size_t k = 0; k < letters.size(); ++k) {
        // Products that cancel to rounding level must not enter the basis.
        const double scale = word.norm() * letter_norms[k];
        if (basis.try_add(vec(word * letters[k]), opts.tol, scale)) next.push_back(basis.size() - 1);
      }
    }
    frontier = std::move(next);
    ++degree;
  }
  return from_columns(basis.matrix(), d);
}

MatrixAlgebra generate_algebra(const GeneratorFamily& gens, ClosureOptions opts) {
  return generate_algebra(std::span<const CMatrix>(gens.matrices()), opts);
}

MatrixAlgebra commutant(const MatrixAlgebra& alg, double tol) {
  const int d = alg.dim;
  if (d < 1 || alg.basis.empty()) throw InvalidInput("commutant: empty algebra");
  const int n2 = d * d;

  // Gram operator of X -> [X, B] summed over the basis, in column-major vec
  // coordinates: sum_B (conj(B) B^T (x) 1 + 1 (x) B^H B - conj(B) (x) B - B^T (x) B^H).
  CMatrix s1 = CMatrix::Zero(d, d);
  CMatrix s4 = CMatrix::Zero(d, d);
  CMatrix cross = CMatrix::Zero(n2, n2);
  for (const auto& b : alg.basis) {
    s1 += b.conjugate() * b.transpose();
    s4 += b.adjoint() * b;
    cross += linalg::kron(b.conjugate(), b);
  }
  const CMatrix eye = linalg::identity(d);
  CMatrix gram = linalg::kron(s1, eye) + linalg::kron(eye, s4) - cross - cross.adjoint();

  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (gram + gram.adjoint()));
  const RVector& ev = es.eigenvalues();
  const double top = std::max(1.0, ev(n2 - 1));
  const double threshold = tol * tol * top;
  int null_dim = 0;
  while (null_dim < n2 && ev(null_dim) <= threshold) ++null_dim;
  return from_columns(es.eigenvectors().leftCols(null_dim), d);
}

MatrixAlgebra center(const MatrixAlgebra& alg, double tol) {
  const MatrixAlgebra comm = commutant(alg);
  const CMatrix qa = stacked(alg);
  const CMatrix qc = stacked(comm);
  Eigen::BDCSVD<CMatrix> svd(qa.adjoint() * qc, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  int k = 0;
  while (k < s.size() && std::sqrt(2.0 * std::max(0.0, 1.0 - s(k))) <= tol) ++k;
  CMatrix cols = qa * svd.matrixU().leftCols(k);
  // Re-orthonormalize against accumulated rounding.
  if (k > 0) {
    Eigen::HouseholderQR<CMatrix> qr(cols);
    cols = qr.householderQ() * CMatrix::Identity(cols.rows(), k);
  }
  return from_columns(cols, alg.dim);
}

double span_distance(const MatrixAlgebra& a, const MatrixAlgebra& b) {
  if (a.dim != b.dim || a.alg_dim() != b.alg_dim()) return 1.0;
  const CMatrix qa = stacked(a);
  const CMatrix qb = stacked(b);
  return linalg::op_norm(qb - qa * (qa.adjoint() * qb));
}

std::vector<CMatrix> central_projections(const MatrixAlgebra& alg, RngSeed rng,
                                         ProjectionOptions opts) {
  const MatrixAlgebra z = center(alg);
  const int d = alg.dim;
  if (z.alg_dim() <= 1) return {linalg::identity(d)};

  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    Rng r(retry_stream(rng, attempt));
    CMatrix h = CMatrix::Zero(d, d);
    for (const auto& zk : z.basis) h += r.complex_normal() * zk;
    h = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    const auto clusters = cluster_eigenvalues(es.eigenvalues(), opts.cluster_gap);
    if (static_cast<int>(clusters.size()) != z.alg_dim()) continue;
    std::vector<CMatrix> out;
    out.reserve(clusters.size());
    for (const auto& c : clusters) {
      const auto v = es.eigenvectors().middleCols(c.begin, c.size);
      out.push_back(v * v.adjoint());
    }
    return out;
  }
  throw DegenerateSample("central_projections: eigenvalue clusters did not separate after " +
                         std::to_string(opts.max_retries) + " retries");
}

BlockDecomposition block_factorize(const MatrixAlgebra& alg, const std::vector<CMatrix>& projections,
                                   RngSeed rng, ProjectionOptions opts) {
  const int d = alg.dim;
  if (projections.empty()) throw InvalidInput("block_factorize: no projections");
  BlockDecomposition dec;
  dec.dim = d;
  int total = 0;

  for (std::size_t l = 0; l < projections.size(); ++l) {
    const CMatrix& p = projections[l];
    if (p.rows() != d || p.cols() != d) throw ShapeError("block_factorize: projection dimension");
    Eigen::SelfAdjointEigenSolver<CMatrix> pes(0.5 * (p + p.adjoint()));
    int first = 0;
    while (first < d && pes.eigenvalues()(first) < 0.5) ++first;
    const int rank = d - first;
    if (rank == 0) throw InvalidInput("block_factorize: zero projection");
    const CMatrix v = pes.eigenvectors().rightCols(rank);

    // Compressed block algebra Pi_l A Pi_l, as an orthonormal basis on C^rank.
    OrthoBasis block_basis(static_cast<Eigen::Index>(rank) * rank);
    for (const auto& b : alg.basis) {
      block_basis.try_add(vec(v.adjoint() * b * v), 1e-8, b.norm());
    }
    const auto block_dim = static_cast<int>(block_basis.size());
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(block_dim))));
    if (n * n != block_dim || rank % n != 0) {
      throw NotSemisimpleWithinTol("block_factorize: block " + std::to_string(l) +
                                   " has algebra dimension " + std::to_string(block_dim) +
                                   " on rank " + std::to_string(rank));
    }
    const int m = rank / n;
    std::vector<CMatrix> elems;
    for (Eigen::Index k = 0; k < block_basis.size(); ++k) elems.push_back(unvec(block_basis.col(k), rank));

    CMatrix w = linalg::identity(rank);
    if (n > 1) {
      bool built = false;
      for (int attempt = 0; attempt <= opts.max_retries && !built; ++attempt) {
        Rng r(retry_stream(rng.child(l), attempt));
        CMatrix h = CMatrix::Zero(rank, rank);
        CMatrix x = CMatrix::Zero(rank, rank);
        for (const auto& e : elems) {
          h += r.complex_normal() * e;
          x += r.complex_normal() * e;
        }
        h = 0.5 * (h + h.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> hes(h);
        const auto clusters = cluster_eigenvalues(hes.eigenvalues(), opts.cluster_gap);
        if (static_cast<int>(clusters.size()) != n) continue;
        if (std::any_of(clusters.begin(), clusters.end(), [m](const Cluster& c) { return c.size != m; })) {
          continue;
        }
        // Range of a minimal projection; the other copies are reached through
        // the partial isometries p_i x p_1.
        const CMatrix e1 = hes.eigenvectors().middleCols(clusters[0].begin, m);
        const double scale = x.norm();
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
          if (i == 0) {
            w.middleCols(0, m) = e1;
            continue;
          }
          const auto vi = hes.eigenvectors().middleCols(clusters[static_cast<std::size_t>(i)].begin, m);
          const CMatrix f = vi * (vi.adjoint() * x * e1);
          const CMatrix g = f.adjoint() * f;
          Eigen::SelfAdjointEigenSolver<CMatrix> ges(0.5 * (g + g.adjoint()), Eigen::EigenvaluesOnly);
          if (ges.eigenvalues()(0) <= 1e-8 * scale * scale) {
            ok = false;
            break;
          }
          w.middleCols(static_cast<Eigen::Index>(i) * m, m) = f * linalg::inverse_sqrt_psd(g);
        }
        built = ok;
      }
      if (!built) {
        throw DegenerateSample("block_factorize: could not build matrix units for block " +
                               std::to_string(l));
      }
    }
    dec.blocks.push_back(Block{v * v.adjoint(), Isometry(v), w, n, m});
    total += rank;
  }
  if (total != d) throw NotSemisimpleWithinTol("block_factorize: projections are not complete");
  dec.residual = verify_decomposition(std::span<const CMatrix>(alg.basis), dec);
  return dec;
}

BlockDecomposition decompose(const GeneratorFamily& gens, RngSeed rng, ClosureOptions closure) {
  const MatrixAlgebra alg = generate_algebra(gens, closure);
  const auto projections = central_projections(alg, rng.child(1));
  return block_factorize(alg, projections, rng.child(2));
}

double verify_decomposition(std::span<const CMatrix> ops, const BlockDecomposition& dec) {
  double worst = 0.0;
  for (const auto& op : ops) {
    if (op.rows() != dec.dim || op.cols() != dec.dim) {
      throw ShapeError("verify_decomposition: operator dimension does not match");
    }
    CMatrix diag_part = CMatrix::Zero(dec.dim, dec.dim);
    for (const auto& blk : dec.blocks) {
      const CMatrix x = blk.to_block(op);
      const CMatrix a = linalg::partial_trace(x, blk.d_A, blk.d_B, linalg::Factor::second) /
                        static_cast<double>(blk.d_B);
      worst = std::max(worst, linalg::op_norm(x - linalg::kron(a, linalg::identity(blk.d_B))));
      diag_part += blk.projector * op * blk.projector;
    }
    worst = std::max(worst, linalg::op_norm(op - diag_part));
  }
  return worst;
}

double verify_decomposition(const GeneratorFamily& gens, const BlockDecomposition& dec) {
  return verify_decomposition(std::span<const CMatrix>(gens.matrices()), dec);
}

}  // namespace algebra
}  // namespace almostcomm
