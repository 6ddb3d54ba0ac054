#pragma once

#include <string>
#include <vector>

#include "genupb/bipartite.hpp"

namespace genupb {

/// rho = (1/r)(1 - Q) with Q = d * sum_k p_k psi_k psi_k^dagger over the
/// normalized members of the kernel UPB, d = N - r.
struct ProjectionFormState {
  DensityMatrix rho;
  GeneralizedUPB upb;
  std::vector<double> p;
  HermitianMatrix Q;
  int rank = 0;
};

struct ProjectionInvariants {
  double idempotency = 0.0;     // ||Q^2 - Q||_F
  double decomposition = 0.0;   // ||Q - d sum p_k psi_k psi_k^dagger||_F
  double rho_relation = 0.0;    // ||rho - (1 - Q)/r||_F
  double p_sum_error = 0.0;     // |sum p - 1|
  bool passes(double tol = Tolerances::projection_residual) const {
    return idempotency < tol && decomposition < tol && rho_relation < tol && p_sum_error < 1e-10;
  }
};

/// Q assembled from coefficients: d * sum_k p_k psi_k psi_k^dagger (members normalized here).
ComplexMatrix assemble_q(const GeneralizedUPB& upb, const std::vector<double>& p, int d);

ProjectionInvariants check_invariants(const ProjectionFormState& state);

}  // namespace genupb
