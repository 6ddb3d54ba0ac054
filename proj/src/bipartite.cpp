#include "genupb/bipartite.hpp"

#include <algorithm>
#include <cmath>

namespace genupb {

ProductVector::ProductVector(ComplexVector phi, ComplexVector chi)
    : phi_(std::move(phi)), chi_(std::move(chi)) {
  if (phi_.size() == 0 || chi_.size() == 0) throw InputError("ProductVector: empty factor");
  if (phi_.norm() == 0.0 || chi_.norm() == 0.0) throw InputError("ProductVector: zero factor");
  require_finite(phi_, "ProductVector");
  require_finite(chi_, "ProductVector");
}

ProductVector ProductVector::normalized() const {
  return ProductVector(phi_ / phi_.norm(), chi_ / chi_.norm());
}

ComplexVector kron(const ComplexVector& phi, const ComplexVector& chi) {
  const Eigen::Index nB = chi.size();
  ComplexVector out(phi.size() * nB);
  for (Eigen::Index a = 0; a < phi.size(); ++a) out.segment(a * nB, nB) = phi(a) * chi;
  return out;
}

ComplexVector kron(const ProductVector& v) { return kron(v.phi(), v.chi()); }

DensityMatrix::DensityMatrix(HermitianMatrix h, BipartiteDims dims) : h_(std::move(h)), dims_(dims) {
  if (h_.dim() != dims_.total()) {
    throw DimensionError("DensityMatrix: matrix dimension " + std::to_string(h_.dim()) +
                         " does not match " + dims_.str());
  }
  const double tr = h_.trace();
  if (std::abs(tr - 1.0) >= Tolerances::density_trace) {
    throw InputError("DensityMatrix: trace " + std::to_string(tr) + " != 1");
  }
  const double min_eig = eigenvalues_hermitian(h_.matrix())(0);
  if (min_eig < Tolerances::density_min_eig) {
    throw InputError("DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
  }
}

DensityMatrix DensityMatrix::normalized(const ComplexMatrix& m, BipartiteDims dims) {
  require_finite(m, "DensityMatrix::normalized");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  const double tr = h.trace().real();
  if (!(tr > 0.0)) throw InputError("DensityMatrix::normalized: non-positive trace");
  return DensityMatrix(HermitianMatrix::hermitian_part(h / tr), dims);
}

DensityMatrix DensityMatrix::maximally_mixed(BipartiteDims dims) {
  const int n = dims.total();
  return DensityMatrix(HermitianMatrix::hermitian_part(ComplexMatrix::Identity(n, n) / double(n)), dims);
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi, BipartiteDims dims) {
  if (psi.size() != dims.total()) throw DimensionError("DensityMatrix::pure: vector length mismatch");
  const ComplexVector u = psi / psi.norm();
  return DensityMatrix(HermitianMatrix::hermitian_part(u * u.adjoint()), dims);
}

HermitianMatrix DensityMatrix::partial_transpose() const { return genupb::partial_transpose(h_, dims_); }

double DensityMatrix::purity() const { return h_.inner(h_); }

GeneralizedUPB::GeneralizedUPB(BipartiteDims dims, std::vector<ProductVector> members)
    : dims_(dims), members_(std::move(members)) {
  for (const auto& m : members_) {
    if (m.nA() != dims_.nA() || m.nB() != dims_.nB()) {
      throw DimensionError("GeneralizedUPB: member factor sizes do not match " + dims_.str());
    }
  }
}

ComplexMatrix GeneralizedUPB::full_vectors() const {
  ComplexMatrix out(dims_.total(), size());
  for (int k = 0; k < size(); ++k) out.col(k) = kron(members_[static_cast<size_t>(k)]);
  return out;
}

int GeneralizedUPB::span_dimension(double rel_tol) const {
  if (members_.empty()) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(full_vectors());
  const RealVector sv = svd.singularValues();
  const double cut = rel_tol * sv(0);
  return static_cast<int>((sv.array() > cut).count());
}

GeneralizedUPB GeneralizedUPB::normalized() const {
  std::vector<ProductVector> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.normalized());
  return GeneralizedUPB(dims_, std::move(out));
}

int numerical_rank(const RealVector& eigenvalues, double rel_tol) {
  if (eigenvalues.size() == 0) return 0;
  const double top = eigenvalues.maxCoeff();
  if (!(top > 0.0)) return 0;
  return static_cast<int>((eigenvalues.array() > rel_tol * top).count());
}

ComplexMatrix partial_trace_b(const ComplexMatrix& m, const BipartiteDims& dims) {
  const int nA = dims.nA(), nB = dims.nB();
  if (m.rows() != dims.total() || m.cols() != dims.total()) throw DimensionError("partial_trace_b: size mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(nA, nA);
  for (int a = 0; a < nA; ++a)
    for (int a2 = 0; a2 < nA; ++a2)
      for (int b = 0; b < nB; ++b) out(a, a2) += m(a * nB + b, a2 * nB + b);
  return out;
}

ComplexMatrix partial_trace_a(const ComplexMatrix& m, const BipartiteDims& dims) {
  const int nA = dims.nA(), nB = dims.nB();
  if (m.rows() != dims.total() || m.cols() != dims.total()) throw DimensionError("partial_trace_a: size mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(nB, nB);
  for (int b = 0; b < nB; ++b)
    for (int b2 = 0; b2 < nB; ++b2)
      for (int a = 0; a < nA; ++a) out(b, b2) += m(a * nB + b, a * nB + b2);
  return out;
}

RankProfile rank_profile(const DensityMatrix& rho, double tol) {
  RankProfile out;
  out.tol = tol;
  out.rank_rho = numerical_rank(eigenvalues_hermitian(rho.matrix()), tol);
  out.rank_rhoP = numerical_rank(eigenvalues_hermitian(rho.partial_transpose().matrix()), tol);
  out.localA = numerical_rank(eigenvalues_hermitian(partial_trace_b(rho.matrix(), rho.dims())), tol);
  out.localB = numerical_rank(eigenvalues_hermitian(partial_trace_a(rho.matrix(), rho.dims())), tol);
  return out;
}

PptResult is_ppt(const DensityMatrix& rho, double tol) {
  const double min_eig = eigenvalues_hermitian(rho.partial_transpose().matrix())(0);
  return {min_eig >= -tol, min_eig};
}

int expected_rank(const BipartiteDims& dims) { return dims.nA() + dims.nB() - 2; }

UpbCounts upb_counts(const BipartiteDims& dims) {
  // Binomial(nA+nB-2, nA-1), accumulated exactly.
  const int n = dims.nA() + dims.nB() - 2;
  const int k = std::min(dims.nA() - 1, dims.nB() - 1);
  long long p = 1;
  for (int i = 1; i <= k; ++i) p = p * (n - k + i) / i;
  return {p, dims.nA() * dims.nB() - dims.nA() - dims.nB() + 2};
}

namespace {

SubspaceProjector spectral_subspace(const ComplexMatrix& h, double tol, bool image) {
  const Spectrum s = eig_hermitian(h);
  const Eigen::Index n = s.eigenvalues.size();
  const double top = s.eigenvalues(n - 1);
  SubspaceProjector out{HermitianMatrix::zero(static_cast<int>(n)), 0, ComplexMatrix(n, 0), {}};
  if (!(top > 0.0)) {
    if (!image) {
      out.projector = HermitianMatrix::identity(static_cast<int>(n));
      out.rank = static_cast<int>(n);
      out.basis = s.eigenvectors;
    }
    return out;
  }
  int rank = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = s.eigenvalues(i) / top;
    if (ratio > tol) ++rank;
    if (std::abs(ratio) >= tol / 10.0 && std::abs(ratio) <= tol * 10.0) {
      out.warnings.push_back("eigenvalue ratio " + std::to_string(ratio) +
                             " is within a decade of the rank cutoff");
    }
  }
  const int k = image ? rank : static_cast<int>(n) - rank;
  out.basis = image ? ComplexMatrix(s.eigenvectors.rightCols(rank)) : ComplexMatrix(s.eigenvectors.leftCols(k));
  out.rank = k;
  out.projector = HermitianMatrix::hermitian_part(out.basis * out.basis.adjoint());
  return out;
}

}  // namespace

SubspaceProjector image_projector(const ComplexMatrix& h, double tol) { return spectral_subspace(h, tol, true); }

SubspaceProjector kernel_projector(const ComplexMatrix& h, double tol) { return spectral_subspace(h, tol, false); }

}  // namespace genupb
