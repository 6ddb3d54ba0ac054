#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genupb/upb_analysis.hpp"

namespace genupb {

/// Conjugate gradient on a symmetric positive semidefinite system, started
/// from zero. At most dim(a) iterations, so a singular A yields the
/// minimum-norm least-squares solution for consistent right-hand sides.
/// Throws InputError when A is not symmetric to 1e-10.
RealVector solve_cg(const RealMatrix& A, const RealVector& a, double tol = 1e-14);

enum class SearchStatus { converged, non_converged, singular_abort };
std::string to_string(SearchStatus s);

struct SearchConfig {
  std::uint64_t seed = 1;
  /// Iteration budget per attempt (alternating + Newton steps).
  int max_iter = 10000;
  int global_iters = 300;
  int newton_iters = 40;
  double tol_residual = 1e-10;
  double damping = 1.0;
  int restarts = 100;
  /// Restart when a local rank of the result is deficient.
  bool require_full_local_rank = true;
  /// Projection search only: restart when the image contains a product vector.
  bool reject_image_product = true;
  int image_check_starts = 200;
  /// Restart when the strict-support extremality certificate fails.
  bool require_extremal = true;
  /// Number of rho^P eigenvalues forced to zero; negative selects automatically.
  int rhoP_kernel = -1;
};

struct SearchOutcome {
  SearchStatus status = SearchStatus::non_converged;
  std::optional<DensityMatrix> state;
  int iterations = 0;
  std::vector<double> residual_history;
  std::map<std::string, double> diagnostics;
};

/// PPT state of rank r with rho = P/r for a rank-r projector P.
///
/// Each attempt draws a random complex Wishart matrix, alternates (a) spectral
/// projection onto the target spectrum, (b) clipping of the negative part of
/// rho^P, (c) trace renormalization, and finishes with Gauss-Newton on the
/// first-order eigenvalue conditions: kernel of rho vanishes, image of rho
/// equals 1/r, and the k lowest eigenvalues of rho^P vanish. k runs upward
/// from the number of negative eigenvalues left by the alternating phase.
/// Candidates failing the enabled filters are discarded and the search
/// restarts from a fresh random matrix.
SearchOutcome search_projection_ppt(const BipartiteDims& dims, int r, const SearchConfig& config = {});

/// PPT state with rank(rho) = m and rank(rho^P) = n, no spectral target.
SearchOutcome search_rank_ppt(const BipartiteDims& dims, int m, int n, const SearchConfig& config = {});

/// Newton refinement of an arbitrary hermitian start to rank profile (m, n).
/// Falls back to the alternating phase when the direct refinement fails.
SearchOutcome refine_rank_ppt(const ComplexMatrix& start, const BipartiteDims& dims, int m, int n,
                              const SearchConfig& config = {});

struct TransformSolveConfig {
  int max_outer = 500;
  double cg_tol = 1e-14;
  /// Abort when the conditioned determinant measure drops below this.
  double singular_guard = 1e-6;
  std::uint64_t seed = 1;
  /// Success threshold on ||rho0 (S_A^2 (x) S_B^2) rho0 - rho0||_F.
  double tol = 1e-11;
  double init_noise = 0.3;
  /// After convergence, moves along the solution family that increase the
  /// conditioned determinant (0 keeps the first solution found).
  int balance_steps = 0;
};

struct TransformResult {
  SearchStatus status = SearchStatus::non_converged;
  HermitianMatrix S_A = HermitianMatrix::zero(1);
  HermitianMatrix S_B = HermitianMatrix::zero(1);
  std::optional<ProjectionFormState> state;
  int iterations = 0;
  std::vector<double> residual_history;
  /// prod over factors of |det S| / (||S||_F / sqrt n)^n, one per iteration.
  std::vector<double> det_history;
  int balance_moves = 0;
  /// Outer iterations where the CG step stalled and a direct solve was used.
  int direct_steps = 0;
  int jacobian_rows = 0;
  int jacobian_cols = 0;
  std::vector<std::string> warnings;
};

/// Hermitian S_A, S_B with rho0 (S_A^2 (x) S_B^2) rho0 = rho0, so that
/// S rho0 S / r is of projection form. Coefficients of S_B are kept on the
/// unit sphere (nA^2 + nB^2 - 1 parameters); each step solves the
/// linearized normal equations by conjugate gradient with backtracking,
/// falling back to a direct least-squares solve when CG stalls.
///
/// kernel_upb, when given, is the product basis of ker rho0 and is mapped to
/// the output kernel; otherwise the finder runs on the output. initial holds
/// an optional (S_A, S_B) start replacing the seeded noisy identity.
TransformResult transform_to_projection(
    const DensityMatrix& rho0, const TransformSolveConfig& config = {},
    const std::optional<GeneralizedUPB>& kernel_upb = std::nullopt,
    const std::optional<std::pair<HermitianMatrix, HermitianMatrix>>& initial = std::nullopt,
    const FinderConfig& finder = {});

/// ||rho0 (S_A^2 (x) S_B^2) rho0 - rho0||_F.
double transform_residual(const DensityMatrix& rho0, const ComplexMatrix& S_A, const ComplexMatrix& S_B);

/// Normalized (S_A (x) S_B) rho (S_A (x) S_B)^dagger.
DensityMatrix apply_product_transform(const DensityMatrix& rho, const ComplexMatrix& S_A, const ComplexMatrix& S_B);

struct TangentFamily {
  int dimension = 0;
  int nullity = 0;
  std::vector<std::pair<HermitianMatrix, HermitianMatrix>> generators;
  /// Singular values of the linear map, ascending.
  RealVector singular_values;
};

/// Infinitesimal product transformations 1 + eps (L_A (x) 1 + 1 (x) L_B)
/// preserving projection form: null space of
/// (H_A, H_B) -> rho (H_A (x) 1 + 1 (x) H_B) rho restricted to the image,
/// modulo the trivial direction (1, -1).
TangentFamily tangent_family(const ProjectionFormState& state, double rel_tol = 1e-8);

}  // namespace genupb
