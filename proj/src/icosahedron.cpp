#include "genupb/icosahedron.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace genupb::ico {

double pyramid_lambda() { return std::sqrt(2.0 * kGolden); }

Axes ico_axes() {
  const double g = kGolden;
  Axes axes{Eigen::Vector3d(-g, 0, 1), Eigen::Vector3d(-1, g, 0), Eigen::Vector3d(1, g, 0),
            Eigen::Vector3d(g, 0, 1),  Eigen::Vector3d(0, -1, g), Eigen::Vector3d(0, 1, g)};
  for (auto& v : axes) v.normalize();
  return axes;
}

Pairing standard_pairing() {
  Pairing p;
  for (int k = 1; k <= 5; ++k) {
    int idx = (2 * k + 4) % 5;
    if (idx == 0) idx = 5;
    p.perm[static_cast<size_t>(k - 1)] = idx - 1;
    p.sign[static_cast<size_t>(k - 1)] = 1;
  }
  p.perm[5] = 5;
  p.sign[5] = -1;
  return p;
}

void validate_pairing(const Pairing& pairing) {
  std::array<int, 6> sorted = pairing.perm;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 6; ++i) {
    if (sorted[static_cast<size_t>(i)] != i) throw InputError("Pairing: perm is not a permutation of 0..5");
  }
  for (int s : pairing.sign) {
    if (s != 1 && s != -1) throw InputError("Pairing: signs must be +1 or -1");
  }
}

Axes deform_axes(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InputError("deform_axes: lambda must be finite and > 0");
  }
  const Axes base = ico_axes();
  const Eigen::Vector3d& axis = base[5];
  Axes out;
  for (size_t k = 0; k < 5; ++k) {
    out[k] = (base[k] + (lambda - 1.0) * axis.dot(base[k]) * axis).normalized();
  }
  out[5] = axis;
  return out;
}

std::array<double, 6> p_profile(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InputError("p_profile: lambda must be finite and > 0");
  }
  const double l2 = lambda * lambda;
  const double p6 = (4.0 + 2.0 * l2 - l2 * l2) / (20.0 + 10.0 * l2);
  const double rest = (1.0 - p6) / 5.0;
  return {rest, rest, rest, rest, rest, p6};
}

std::vector<ProductVector> product_vectors(const Axes& axes, const Pairing& pairing) {
  validate_pairing(pairing);
  std::vector<ProductVector> out;
  out.reserve(6);
  for (size_t k = 0; k < 6; ++k) {
    const Eigen::Vector3d chi = double(pairing.sign[k]) * axes[static_cast<size_t>(pairing.perm[k])];
    out.emplace_back(axes[k].cast<Complex>().normalized(), chi.cast<Complex>().normalized());
  }
  return out;
}

Eigen::Matrix<double, 6, 6> product_gram(const Axes& axes, const Pairing& pairing) {
  Eigen::Matrix<double, 6, 6> g;
  std::array<Eigen::Vector3d, 6> unit = axes;
  for (auto& v : unit) v.normalize();
  for (size_t k = 0; k < 6; ++k) {
    for (size_t l = 0; l < 6; ++l) {
      const double ga = unit[k].dot(unit[l]);
      const double gb = double(pairing.sign[k] * pairing.sign[l]) *
                        unit[static_cast<size_t>(pairing.perm[k])].dot(unit[static_cast<size_t>(pairing.perm[l])]);
      g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = ga * gb;
    }
  }
  return g;
}

ProjectionFormState build_state(const IcoConfig& config) {
  const Axes axes = deform_axes(config.lambda);
  const BipartiteDims dims(3, 3);
  const std::vector<ProductVector> members = product_vectors(axes, config.pairing);
  const auto p = p_profile(config.lambda);
  const std::vector<double> pv(p.begin(), p.end());

  GeneralizedUPB upb(dims, members);
  ComplexMatrix q = assemble_q(upb, pv, 5);
  // Real product vectors make Q invariant under partial transposition; average
  // with Q^P so that this holds bit-for-bit rather than up to rounding.
  q = (0.5 * (q + q.adjoint())).eval();
  q = (0.5 * (q + partial_transpose(q, dims))).eval();
  const double idem = (q * q - q).norm();
  if (idem > Tolerances::projection_residual) {
    throw std::runtime_error("build_state: ||Q^2 - Q|| = " + std::to_string(idem) +
                             " (pairing does not yield a projection)");
  }
  const ComplexMatrix rho = (ComplexMatrix::Identity(9, 9) - q) / 4.0;

  if (!config.normalize) {
    // Raw coordinates for the stored members (rescaled copies of the same lines).
    std::vector<ProductVector> raw;
    const double g = kGolden;
    const double raw_norm = std::sqrt(1.0 + g * g);
    for (const auto& m : members) raw.emplace_back(m.phi() * raw_norm, m.chi() * raw_norm);
    upb = GeneralizedUPB(dims, std::move(raw));
  }
  return ProjectionFormState{DensityMatrix::normalized(rho, dims), std::move(upb), pv,
                             HermitianMatrix::hermitian_part(q), 4};
}

PairingEnumeration enumerate_pairings() {
  const Axes axes = ico_axes();
  PairingEnumeration out;
  std::array<int, 6> perm{0, 1, 2, 3, 4, 5};
  do {
    for (int mask = 0; mask < 64; ++mask) {
      Pairing p;
      p.perm = perm;
      for (int k = 0; k < 6; ++k) p.sign[static_cast<size_t>(k)] = (mask >> k) & 1 ? -1 : 1;
      const auto g = product_gram(axes, p);
      bool equiangular = true;
      for (int k = 0; k < 6 && equiangular; ++k)
        for (int l = 0; l < 6 && equiangular; ++l)
          if (k != l && std::abs(g(k, l) + 0.2) > 1e-9) equiangular = false;
      if (!equiangular) continue;
      ComplexVector sum = ComplexVector::Zero(9);
      for (const auto& m : product_vectors(axes, p)) sum += kron(m);
      if (sum.norm() > 1e-9) continue;
      ++out.raw_count;
      if (p.sign[0] == 1) out.pairings.push_back(p);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  out.count = out.raw_count / 2;
  return out;
}

}  // namespace genupb::ico
