#include "genupb/projection_state.hpp"

#include <cmath>
#include <numeric>

namespace genupb {

ComplexMatrix assemble_q(const GeneralizedUPB& upb, const std::vector<double>& p, int d) {
  if (static_cast<int>(p.size()) != upb.size()) throw DimensionError("assemble_q: coefficient count mismatch");
  const int n = upb.dims().total();
  ComplexMatrix q = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < upb.size(); ++k) {
    ComplexVector psi = kron(upb.members()[static_cast<size_t>(k)]);
    psi /= psi.norm();
    q += p[static_cast<size_t>(k)] * (psi * psi.adjoint());
  }
  return double(d) * q;
}

ProjectionInvariants check_invariants(const ProjectionFormState& state) {
  const int n = state.rho.dim();
  const int r = state.rank;
  const ComplexMatrix& q = state.Q.matrix();
  ProjectionInvariants out;
  out.idempotency = (q * q - q).norm();
  out.decomposition = (q - assemble_q(state.upb, state.p, n - r)).norm();
  const ComplexMatrix expected = (ComplexMatrix::Identity(n, n) - q) / double(r);
  out.rho_relation = (state.rho.matrix() - expected).norm();
  out.p_sum_error = std::abs(std::accumulate(state.p.begin(), state.p.end(), 0.0) - 1.0);
  return out;
}

}  // namespace genupb
