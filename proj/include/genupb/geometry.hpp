#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genupb/search.hpp"

namespace genupb {

struct DimensionReport {
  int unit_eigen_count = 0;
  int surface_dimension = 0;
  int eq_class_dimension = 0;
  /// 1 minus the largest eigenvalue below the unit window.
  double spectral_gap = 0.0;
  bool trusted = false;
  RankProfile ranks;
  std::vector<std::string> warnings;
};

/// Superoperator phi_P(s) = P s + s P - P s P on hermitian coordinates (an
/// orthogonal projector on the N^2-dimensional real space).
RealMatrix support_superoperator(const ComplexMatrix& projector);
/// s -> P s P on hermitian coordinates.
RealMatrix strict_superoperator(const ComplexMatrix& projector);

/// Number of eigenvalues of a symmetric matrix in (1 - window, 1 + window],
/// together with the gap to the next eigenvalue below.
struct UnitCount {
  int count = 0;
  double gap = 0.0;
  /// Orthonormal eigenvectors of the unit eigenvalues (columns).
  RealMatrix vectors;
};
UnitCount count_unit_eigenvalues(const RealMatrix& m, double window = Tolerances::unit_eigen_window);

/// First-order rank-preserving perturbations: eigenvalue-1 count of P Qbar P,
/// Qbar = Pi Q Pi, with P and Q built from the images of rho0 and rho0^P.
DimensionReport rank_surface_dimension(const DensityMatrix& rho0, double tol = Tolerances::rank_cutoff);

/// Eigenvalue-1 eigenvectors of P Qbar P in hermitian coordinates.
RealMatrix tangent_directions(const DensityMatrix& rho0, double tol = Tolerances::rank_cutoff);

struct ExtremalityCertificate {
  bool is_extremal = false;
  int solution_dim = 0;
  double spectral_gap = 0.0;
  std::vector<std::string> warnings;
};

/// Dimension of {s hermitian : P s P = s and Q s^P Q = s^P}; extremal iff 1.
ExtremalityCertificate extremality_check(const DensityMatrix& rho, double tol = Tolerances::rank_cutoff);

/// rho0 + eps sigma, repaired back to the rank profile of rho0 by the rank
/// search's Newton phase.
SearchOutcome perturb_and_repair(const DensityMatrix& rho0, const HermitianMatrix& sigma, double eps,
                                 const SearchConfig& config = {});

/// Random unit-norm, trace-zero combination of tangent directions.
HermitianMatrix random_tangent_direction(const DensityMatrix& rho0, std::uint64_t seed);

struct NeighborhoodReport {
  int count = 0;
  int extremal = 0;
  int repair_failures = 0;
  double fraction = 0.0;
  std::vector<std::string> failures;
};

NeighborhoodReport neighborhood_extremality_sample(const DensityMatrix& rho0, int count, double eps,
                                                   const SearchConfig& config = {});

}  // namespace genupb
