#pragma once

namespace genupb {

// Single tuning point for every numerical threshold used by the library.
struct Tolerances {
  static constexpr double hermiticity = 1e-12;
  static constexpr double eigen_residual = 1e-10;
  // Relative: eigenvalue counts as nonzero when > rank_cutoff * max eigenvalue.
  static constexpr double rank_cutoff = 1e-8;
  static constexpr double density_trace = 1e-12;
  static constexpr double density_min_eig = -1e-10;
  static constexpr double basis_orthonormality = 1e-12;
  // Eigenvalue-1 window used when counting solution dimensions.
  static constexpr double unit_eigen_window = 1e-6;
  static constexpr double trusted_spectral_gap = 1e-4;
  static constexpr double pinv_cutoff = 1e-10;
  static constexpr double projection_residual = 1e-9;
};

}  // namespace genupb
