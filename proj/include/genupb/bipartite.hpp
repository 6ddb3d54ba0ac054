#pragma once

#include <string>
#include <vector>

#include "genupb/hermitian.hpp"

namespace genupb {

/// phi (x) chi with phi in C^nA and chi in C^nB.
class ProductVector {
 public:
  ProductVector(ComplexVector phi, ComplexVector chi);

  const ComplexVector& phi() const { return phi_; }
  const ComplexVector& chi() const { return chi_; }
  int nA() const { return static_cast<int>(phi_.size()); }
  int nB() const { return static_cast<int>(chi_.size()); }

  /// Both factors scaled to unit norm.
  ProductVector normalized() const;

 private:
  ComplexVector phi_;
  ComplexVector chi_;
};

/// Entries (phi (x) chi)_{a*nB + b} = phi_a chi_b.
ComplexVector kron(const ProductVector& v);
ComplexVector kron(const ComplexVector& phi, const ComplexVector& chi);

/// Unit-trace positive semidefinite hermitian matrix on a bipartite space.
class DensityMatrix {
 public:
  /// Validates trace (Tolerances::density_trace) and positivity
  /// (Tolerances::density_min_eig).
  DensityMatrix(HermitianMatrix h, BipartiteDims dims);

  /// Hermitian part of m scaled to unit trace, then validated.
  static DensityMatrix normalized(const ComplexMatrix& m, BipartiteDims dims);
  static DensityMatrix maximally_mixed(BipartiteDims dims);
  static DensityMatrix pure(const ComplexVector& psi, BipartiteDims dims);

  const HermitianMatrix& hermitian() const { return h_; }
  const ComplexMatrix& matrix() const { return h_.matrix(); }
  const BipartiteDims& dims() const { return dims_; }
  int dim() const { return dims_.total(); }

  /// rho^P with respect to subsystem B (not necessarily positive).
  HermitianMatrix partial_transpose() const;
  double purity() const;

 private:
  HermitianMatrix h_;
  BipartiteDims dims_;
};

/// Finite collection of product vectors on a common bipartite space.
class GeneralizedUPB {
 public:
  GeneralizedUPB(BipartiteDims dims, std::vector<ProductVector> members);

  const BipartiteDims& dims() const { return dims_; }
  const std::vector<ProductVector>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }

  /// N x size matrix whose columns are kron(member).
  ComplexMatrix full_vectors() const;
  /// Numerical rank of full_vectors() at relative singular-value cutoff.
  int span_dimension(double rel_tol = Tolerances::rank_cutoff) const;
  GeneralizedUPB normalized() const;

 private:
  BipartiteDims dims_;
  std::vector<ProductVector> members_;
};

struct RankProfile {
  int rank_rho = 0;
  int rank_rhoP = 0;
  int localA = 0;
  int localB = 0;
  double tol = Tolerances::rank_cutoff;
};

/// Number of eigenvalues above rel_tol * max eigenvalue.
int numerical_rank(const RealVector& eigenvalues, double rel_tol = Tolerances::rank_cutoff);

ComplexMatrix partial_trace_b(const ComplexMatrix& m, const BipartiteDims& dims);
ComplexMatrix partial_trace_a(const ComplexMatrix& m, const BipartiteDims& dims);

RankProfile rank_profile(const DensityMatrix& rho, double tol = Tolerances::rank_cutoff);

struct PptResult {
  bool is_ppt = false;
  double min_eigenvalue = 0.0;
};

PptResult is_ppt(const DensityMatrix& rho, double tol = Tolerances::eigen_residual);

/// r = nA + nB - 2.
int expected_rank(const BipartiteDims& dims);

struct UpbCounts {
  long long p = 0;  // product vectors in the kernel
  int d = 0;        // linearly independent ones
};

/// p = (nA+nB-2)! / ((nA-1)! (nB-1)!),  d = nA nB - nA - nB + 2.
UpbCounts upb_counts(const BipartiteDims& dims);

struct SubspaceProjector {
  HermitianMatrix projector;
  int rank = 0;
  /// Orthonormal basis of the range (columns).
  ComplexMatrix basis;
  std::vector<std::string> warnings;
};

/// Projector onto the span of eigenvectors with eigenvalue > tol * max.
/// Warns when an eigenvalue ratio lands in [tol/10, 10 tol].
SubspaceProjector image_projector(const ComplexMatrix& h, double tol = Tolerances::rank_cutoff);
SubspaceProjector kernel_projector(const ComplexMatrix& h, double tol = Tolerances::rank_cutoff);

}  // namespace genupb
