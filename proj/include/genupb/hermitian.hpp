#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "genupb/dims.hpp"
#include "genupb/tolerances.hpp"

namespace genupb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Square complex matrix equal to its adjoint.
///
/// Construction checks max|A - A^dagger| against Tolerances::hermiticity
/// (scaled by the largest entry when that exceeds one) and zeroes the
/// imaginary parts of the diagonal.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(ComplexMatrix m);

  /// (M + M^dagger) / 2 without any check. For computed products whose
  /// asymmetry is pure rounding.
  static HermitianMatrix hermitian_part(const ComplexMatrix& m);
  static HermitianMatrix identity(int n);
  static HermitianMatrix zero(int n);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }
  /// Tr[A B] for hermitian A, B (always real).
  double inner(const HermitianMatrix& other) const;

 private:
  struct Unchecked {};
  HermitianMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}

  ComplexMatrix m_;
};

/// Orthonormal basis of the real vector space of N x N hermitian matrices
/// under <A, B> = Tr[A B].
///
/// Ordering: the N diagonal units E_ii first, then for each pair i < j (row
/// major) the symmetric element (E_ij + E_ji)/sqrt2 followed by the
/// antisymmetric element i(E_ij - E_ji)/sqrt2.
class HermitianBasis {
 public:
  explicit HermitianBasis(int dim);

  int dim() const { return n_; }
  int size() const { return n_ * n_; }

  ComplexMatrix element(int k) const;
  std::vector<ComplexMatrix> elements() const;

  /// Coordinates of the hermitian part of m. Closed form, O(N^2).
  RealVector coords(const ComplexMatrix& m) const;
  /// Sum_k x_k h_k.
  ComplexMatrix compose(const RealVector& x) const;

 private:
  int n_;
};

/// Coordinates of a hermitian matrix in a HermitianBasis.
struct HermitianVector {
  int dim = 0;
  RealVector coords;
};

HermitianVector vectorize(const HermitianMatrix& h, const HermitianBasis& basis);
HermitianMatrix devectorize(const HermitianVector& v, const HermitianBasis& basis);

/// Ascending eigenvalues with the matching orthonormal eigenvectors as columns.
struct Spectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

Spectrum eig_hermitian(const HermitianMatrix& h);
/// Same contract for a matrix the caller knows to be hermitian; only the
/// lower triangle is read.
Spectrum eig_hermitian(const ComplexMatrix& h);
RealVector eigenvalues_hermitian(const ComplexMatrix& h);

/// Transpose of the B factor: (X (x) Y) -> X (x) Y^T, extended linearly.
ComplexMatrix partial_transpose(const ComplexMatrix& m, const BipartiteDims& dims);
HermitianMatrix partial_transpose(const HermitianMatrix& h, const BipartiteDims& dims);
/// Transpose of the A factor: (X (x) Y) -> X^T (x) Y.
ComplexMatrix partial_transpose_a(const ComplexMatrix& m, const BipartiteDims& dims);

/// Real N^2 x N^2 matrix Pi with Pi * vec(H) = vec(H^P). Orthogonal and involutive.
RealMatrix pt_superoperator(const BipartiteDims& dims, const HermitianBasis& basis);

/// Throws InputError when any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, const char* what);

}  // namespace genupb
