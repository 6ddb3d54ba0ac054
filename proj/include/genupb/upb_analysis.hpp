#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "genupb/projection_state.hpp"

namespace genupb {

struct FinderConfig {
  int starts = 2000;
  /// f = sigma_min(M(phi))^2 below this declares a root.
  double local_tol = 1e-16;
  double dedupe_overlap = 1.0 - 1e-6;
  int max_local_iters = 60;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  /// Stop once this many distinct vectors are known; 0 runs every start.
  int stop_after = 0;
};

struct FinderResult {
  std::vector<ProductVector> vectors;  // normalized factors, deduplicated up to phase
  int starts_used = 0;
  std::vector<std::string> warnings;
};

/// Product vectors phi (x) chi lying in span(subspace).
///
/// subspace holds an orthonormal basis of a D-dimensional subspace of C^N as
/// columns, 1 <= D < N. Each start draws a random phi, pairs it with the
/// best chi and runs Gauss-Newton on the constraint system
/// <u_j | phi (x) chi> = 0 over an orthonormal basis {u_j} of the orthogonal
/// complement. When expected > 0 and fewer vectors are found, a warning is
/// attached (the count itself is data).
FinderResult find_product_vectors(const ComplexMatrix& subspace, const BipartiteDims& dims,
                                  const FinderConfig& config = {}, int expected = 0);

/// Gauss-Newton polish of an approximate product vector onto span(subspace).
ProductVector refine_product_vector(const ComplexMatrix& subspace, const BipartiteDims& dims, const ProductVector& start,
                                    int max_iters = 20);

/// Orthonormal basis of the orthogonal complement of span(columns of v).
ComplexMatrix orthogonal_complement(const ComplexMatrix& v, double rel_tol = Tolerances::rank_cutoff);

/// True iff no product vector is orthogonal to every member.
bool unextendibility_check(const GeneralizedUPB& upb, const FinderConfig& config = {});

/// phi_k (x) conj(chi_k).
GeneralizedUPB conjugate_upb(const GeneralizedUPB& upb);

struct PFitReport {
  std::vector<double> p;
  double residual = 0.0;  // Frobenius norm of the fit error
  int negative_count = 0;
  bool unique = true;     // false when {psi_k psi_k^dagger} is linearly dependent
};

/// Least-squares x minimizing ||sum_k x_k psi_k psi_k^dagger - Q||_F over
/// normalized members; p_k = x_k / d.
PFitReport extract_p(const HermitianMatrix& q, const GeneralizedUPB& upb, int d);
/// d taken from upb_counts(dims).
PFitReport extract_p(const HermitianMatrix& q, const GeneralizedUPB& upb, const BipartiteDims& dims);

struct ProjectionFormReport {
  bool is_proj_form = false;
  int r = 0;
  double purity = 0.0;
  double idempotency = 0.0;  // ||(r rho)^2 - r rho||_F
  int rank_rhoP = 0;
  bool rhoP_is_proj = false;
  double rhoP_purity = 0.0;
  double rhoP_idempotency = 0.0;
};

ProjectionFormReport verify_projection_form(const DensityMatrix& rho, double tol = 1e-8);

struct SymmetryReport {
  bool symmetric = false;
  int rank_rho = 0;
  int rank_rhoP = 0;
  double qp_idempotency = 0.0;
  double p_mismatch = 0.0;
  std::vector<std::string> failures;
};

SymmetryReport symmetry_report(const ProjectionFormState& state, double tol = 1e-8);

/// Kernel UPB, p-fit and (when the fit closes) the assembled projection-form state.
struct ProjectionAnalysis {
  int rank = 0;
  FinderResult kernel;
  int span_dimension = 0;
  std::optional<PFitReport> fit;
  std::optional<ProjectionFormState> state;
};

ProjectionAnalysis analyze_projection(const DensityMatrix& rho, const FinderConfig& config = {},
                                      double fit_tol = 1e-8);

}  // namespace genupb
