#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "genupb/projection_state.hpp"

namespace genupb::ico {

using Axes = std::array<Eigen::Vector3d, 6>;

/// Golden ratio (sqrt5 + 1) / 2.
inline const double kGolden = (2.23606797749978969641 + 1.0) / 2.0;
/// Stretch at which members 1..5 of the family become mutually orthogonal.
double pyramid_lambda();

/// chi_k = sign[k] * axis[perm[k]], zero-based.
struct Pairing {
  std::array<int, 6> perm{};
  std::array<int, 6> sign{};
  bool operator==(const Pairing&) const = default;
};

/// The six normalized symmetry axes through the corners of a regular icosahedron.
Axes ico_axes();

/// chi_k = phi_{(2k+4) mod 5} (residue 0 read as 5) for k = 1..5, chi_6 = -phi_6.
Pairing standard_pairing();

/// Throws InputError unless perm is a permutation of 0..5 and signs are +-1.
void validate_pairing(const Pairing& pairing);

/// Axes stretched by lambda along axis 6, each renormalized. lambda <= 0 throws.
Axes deform_axes(double lambda);

/// p_6 = (4 + 2 l^2 - l^4) / (20 + 10 l^2), p_k = (1 - p_6) / 5 otherwise.
std::array<double, 6> p_profile(double lambda);

/// Normalized product vectors phi_k (x) chi_k for the given axes and pairing.
std::vector<ProductVector> product_vectors(const Axes& axes, const Pairing& pairing);

/// Gram matrix psi_k^dagger psi_l of the normalized product vectors.
Eigen::Matrix<double, 6, 6> product_gram(const Axes& axes, const Pairing& pairing);

struct IcoConfig {
  double lambda = 1.0;
  Pairing pairing = standard_pairing();
  /// When false the UPB keeps the raw (unnormalized) coordinate vectors.
  bool normalize = true;
};

/// rho = (1/4)(1 - Q), Q = 5 sum_k p_k(lambda) psi_k psi_k^dagger.
/// Throws std::runtime_error when ||Q^2 - Q||_F exceeds 1e-9.
ProjectionFormState build_state(const IcoConfig& config);

struct PairingEnumeration {
  /// Acceptable pairings counted modulo a global sign flip of all chi_k.
  int count = 0;
  /// Raw hits over all 720 permutations and 64 sign patterns.
  int raw_count = 0;
  /// One representative per class (the one with sign[0] = +1).
  std::vector<Pairing> pairings;
};

/// Brute force: acceptable means every off-diagonal product Gram entry is -1/5
/// and sum_k psi_k = 0.
PairingEnumeration enumerate_pairings();

}  // namespace genupb::ico
