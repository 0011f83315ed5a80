#include <algorithm>
#include <cmath>
#include <numbers>

#include "almostcomm/tsirelson.hpp"

namespace almostcomm::tsirelson {

namespace {

// Random full-rank POVM with k outcomes on C^n, kept away from the boundary
// of the PSD cone by mixing in the uniform POVM.
std::vector<CMatrix> random_povm(int n, int k, Rng& rng) {
  std::vector<CMatrix> parts;
  CMatrix sum = CMatrix::Zero(n, n);
  for (int i = 0; i < k; ++i) {
    const CMatrix g = linalg::ginibre(n, n, rng);
    parts.push_back(g * g.adjoint());
    sum += parts.back();
  }
  const CMatrix s = linalg::inverse_sqrt_psd(sum);
  const CMatrix uniform = linalg::identity(n) / static_cast<double>(k);
  for (auto& p : parts) {
    p = 0.8 * (s * p * s) + 0.2 * uniform;
    p = 0.5 * (p + p.adjoint());
  }
  return parts;
}

Complex omega_pow(int k, int n) { return std::polar(1.0, 2.0 * std::numbers::pi * k / n); }

// Per-block local operators for one label, assembled block-diagonally in the
// planted (unrotated) basis.
struct Layout {
  std::vector<int> offsets;
  int dim = 0;
};

Layout layout_of(const std::vector<BlockSpec>& blocks) {
  Layout lay;
  for (const auto& b : blocks) {
    lay.offsets.push_back(lay.dim);
    lay.dim += b.d_A * b.d_B;
  }
  return lay;
}

void normalize_povm(std::vector<CMatrix>& elems, const std::vector<Label>& labels, int d) {
  // Divide every setting by the symmetric square root of its sum.
  std::vector<int> xs;
  for (const auto& l : labels) {
    if (std::find(xs.begin(), xs.end(), l.x) == xs.end()) xs.push_back(l.x);
  }
  for (int x : xs) {
    CMatrix sum = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].x == x) sum += elems[i];
    }
    const CMatrix s = linalg::inverse_sqrt_psd(sum);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].x != x) continue;
      elems[i] = s * elems[i] * s;
      elems[i] = 0.5 * (elems[i] + elems[i].adjoint());
    }
  }
}

}  // namespace

PlantedInstance plant_instance(const PlantSpec& spec, RngSeed rng) {
  if (spec.blocks.empty()) throw InvalidInput("plant_instance: no blocks");
  for (const auto& b : spec.blocks) {
    if (b.d_A < 1 || b.d_B < 1) throw InvalidInput("plant_instance: block dimensions must be >= 1");
  }
  if (spec.b_settings < 1 || spec.b_outcomes < 1) {
    throw InvalidInput("plant_instance: B needs at least one setting and outcome");
  }
  if (!spec.certificate && (spec.a_settings < 1 || spec.a_outcomes < 1)) {
    throw InvalidInput("plant_instance: A needs at least one setting and outcome");
  }
  if (!(spec.epsilon >= 0.0) || !std::isfinite(spec.epsilon) || spec.epsilon > 0.05) {
    throw InvalidInput("plant_instance: epsilon must lie in [0, 0.05]");
  }
  const Layout lay = layout_of(spec.blocks);
  const int d = lay.dim;
  if (d > 256) throw InvalidInput("plant_instance: total dimension exceeds 256");
  const int L = static_cast<int>(spec.blocks.size());

  Rng local_rng(rng.child(1));
  Rng noise_rng(rng.child(2));
  Rng state_rng(rng.child(3));
  const CMatrix u = linalg::haar_unitary(d, rng.child(4));

  auto block_diag = [&](const std::vector<CMatrix>& per_block, bool a_side) {
    CMatrix out = CMatrix::Zero(d, d);
    for (int l = 0; l < L; ++l) {
      const auto& b = spec.blocks[static_cast<std::size_t>(l)];
      const int r = b.d_A * b.d_B;
      out.block(lay.offsets[static_cast<std::size_t>(l)], lay.offsets[static_cast<std::size_t>(l)], r, r) =
          a_side ? linalg::kron(per_block[static_cast<std::size_t>(l)], linalg::identity(b.d_B))
                 : linalg::kron(linalg::identity(b.d_A), per_block[static_cast<std::size_t>(l)]);
    }
    return CMatrix(u * out * u.adjoint());
  };

  PlantedInstance inst;

  // A family.
  std::vector<Label> a_labels;
  std::vector<CMatrix> a_mats;
  if (spec.certificate) {
    int k = std::max(L, 2);
    for (const auto& b : spec.blocks) k = std::max(k, b.d_A);
    const int settings = L > 1 ? 3 : 2;
    for (int x = 0; x < settings; ++x) {
      for (int a = 0; a < k; ++a) {
        std::vector<CMatrix> per_block;
        for (int l = 0; l < L; ++l) {
          const int n = spec.blocks[static_cast<std::size_t>(l)].d_A;
          CMatrix m = CMatrix::Zero(n, n);
          if (x == 0 && a < n) {
            m(a, a) = 1.0;
          } else if (x == 1 && a < n) {
            CVector f(n);
            for (int j = 0; j < n; ++j) f(j) = omega_pow(j * a, n) / std::sqrt(static_cast<double>(n));
            m = f * f.adjoint();
          } else if (x == 2 && a == l) {
            m = linalg::identity(n);
          }
          per_block.push_back(std::move(m));
        }
        a_labels.push_back({a, x});
        a_mats.push_back(block_diag(per_block, true));
      }
    }
    GeneratingCertificate cert;
    for (int l = 0; l < L; ++l) {
      const int n = spec.blocks[static_cast<std::size_t>(l)].d_A;
      BlockPolynomials bp;
      if (L > 1) {
        bp.projector.add_term(1.0, {{l, 2}});
      } else {
        bp.projector.add_term(1.0, {});
      }
      for (int j = 0; j < n; ++j) {
        bp.clock.add_term(omega_pow(j, n), {{j, 0}});
        bp.shift.add_term(omega_pow(-j, n), {{j, 1}});
      }
      cert.blocks.push_back(std::move(bp));
    }
    inst.certificate = std::move(cert);
  } else {
    for (int x = 0; x < spec.a_settings; ++x) {
      std::vector<std::vector<CMatrix>> per_block_povms;
      for (const auto& b : spec.blocks) per_block_povms.push_back(random_povm(b.d_A, spec.a_outcomes, local_rng));
      for (int a = 0; a < spec.a_outcomes; ++a) {
        std::vector<CMatrix> per_block;
        for (int l = 0; l < L; ++l) per_block.push_back(per_block_povms[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)]);
        a_labels.push_back({a, x});
        a_mats.push_back(block_diag(per_block, true));
      }
    }
  }

  // B family: exact, then noisy.
  std::vector<Label> b_labels;
  std::vector<CMatrix> b_mats;
  for (int y = 0; y < spec.b_settings; ++y) {
    std::vector<std::vector<CMatrix>> per_block_povms;
    for (const auto& b : spec.blocks) per_block_povms.push_back(random_povm(b.d_B, spec.b_outcomes, local_rng));
    for (int b = 0; b < spec.b_outcomes; ++b) {
      std::vector<CMatrix> per_block;
      for (int l = 0; l < L; ++l) per_block.push_back(per_block_povms[static_cast<std::size_t>(l)][static_cast<std::size_t>(b)]);
      b_labels.push_back({b, y});
      b_mats.push_back(block_diag(per_block, false));
    }
  }
  if (spec.epsilon > 0.0) {
    for (auto& m : b_mats) {
      CMatrix e = linalg::random_hermitian(d, noise_rng);
      e *= spec.epsilon / linalg::op_norm(e);
      m = linalg::clip_psd(m + e);
    }
    normalize_povm(b_mats, b_labels, d);
  }

  // Full-rank random state.
  const CMatrix g = linalg::ginibre(d, d, state_rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint());

  const FamilyFlags flags{true, true, true};
  inst.strategy.A = GeneratorFamily(std::move(a_labels), std::move(a_mats), flags, 1e-8);
  inst.strategy.B = GeneratorFamily(std::move(b_labels), std::move(b_mats), flags, 1e-8);
  inst.strategy.rho = std::move(rho);
  inst.strategy.validate(1e-8);

  // Ground truth in the rotated basis.
  inst.ground_truth.dim = d;
  for (int l = 0; l < L; ++l) {
    const auto& b = spec.blocks[static_cast<std::size_t>(l)];
    const int r = b.d_A * b.d_B;
    const CMatrix v = u.middleCols(lay.offsets[static_cast<std::size_t>(l)], r);
    inst.ground_truth.blocks.push_back(
        algebra::Block{v * v.adjoint(), Isometry(v), linalg::identity(r), b.d_A, b.d_B});
  }
  inst.ground_truth.residual = algebra::verify_decomposition(inst.strategy.A, inst.ground_truth);
  inst.achieved_epsilon = commutator_eps(inst.strategy.A, inst.strategy.B);
  return inst;
}

}  // namespace almostcomm::tsirelson
