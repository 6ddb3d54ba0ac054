#include "genupb/hermitian.hpp"

#include <cmath>
#include <string>

namespace genupb {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
  }
}

}  // namespace

void require_finite(const ComplexMatrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw InputError(std::string(what) + ": non-finite entry");
    }
  }
}

HermitianMatrix::HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {
  require_square(m_, "HermitianMatrix");
  require_finite(m_, "HermitianMatrix");
  const double scale = std::max(1.0, max_abs(m_));
  const double asym = max_abs(m_ - m_.adjoint());
  if (asym >= Tolerances::hermiticity * scale) {
    throw InputError("HermitianMatrix: max|A - A^dagger| = " + std::to_string(asym));
  }
  m_ = (0.5 * (m_ + m_.adjoint())).eval();
  for (Eigen::Index i = 0; i < m_.rows(); ++i) m_(i, i) = m_(i, i).real();
}

HermitianMatrix HermitianMatrix::hermitian_part(const ComplexMatrix& m) {
  require_square(m, "HermitianMatrix::hermitian_part");
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = h(i, i).real();
  return HermitianMatrix(std::move(h), Unchecked{});
}

HermitianMatrix HermitianMatrix::identity(int n) {
  return HermitianMatrix(ComplexMatrix::Identity(n, n), Unchecked{});
}

HermitianMatrix HermitianMatrix::zero(int n) {
  return HermitianMatrix(ComplexMatrix::Zero(n, n), Unchecked{});
}

double HermitianMatrix::inner(const HermitianMatrix& other) const {
  if (other.dim() != dim()) throw DimensionError("HermitianMatrix::inner: dimension mismatch");
  // Tr[A B] = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for hermitian B.
  return (m_.array() * other.m_.conjugate().array()).sum().real();
}

HermitianBasis::HermitianBasis(int dim) : n_(dim) {
  if (dim < 1) throw InputError("HermitianBasis: dimension must be positive");
}

ComplexMatrix HermitianBasis::element(int k) const {
  if (k < 0 || k >= size()) throw InputError("HermitianBasis::element: index out of range");
  ComplexMatrix e = ComplexMatrix::Zero(n_, n_);
  if (k < n_) {
    e(k, k) = 1.0;
    return e;
  }
  int offset = (k - n_) / 2;
  const bool antisym = ((k - n_) % 2) == 1;
  for (int i = 0; i < n_; ++i) {
    const int row_len = n_ - 1 - i;
    if (offset < row_len) {
      const int j = i + 1 + offset;
      if (antisym) {
        e(i, j) = Complex(0.0, 1.0 / kSqrt2);
        e(j, i) = Complex(0.0, -1.0 / kSqrt2);
      } else {
        e(i, j) = 1.0 / kSqrt2;
        e(j, i) = 1.0 / kSqrt2;
      }
      return e;
    }
    offset -= row_len;
  }
  return e;  // unreachable
}

std::vector<ComplexMatrix> HermitianBasis::elements() const {
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<size_t>(size()));
  for (int k = 0; k < size(); ++k) out.push_back(element(k));
  return out;
}

RealVector HermitianBasis::coords(const ComplexMatrix& m) const {
  if (m.rows() != n_ || m.cols() != n_) throw DimensionError("HermitianBasis::coords: dimension mismatch");
  RealVector x(size());
  for (int i = 0; i < n_; ++i) x(i) = m(i, i).real();
  int k = n_;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      // Hermitian part: (m_ij + conj(m_ji)) / 2.
      const Complex h = 0.5 * (m(i, j) + std::conj(m(j, i)));
      x(k++) = kSqrt2 * h.real();
      x(k++) = kSqrt2 * h.imag();
    }
  }
  return x;
}

ComplexMatrix HermitianBasis::compose(const RealVector& x) const {
  if (x.size() != size()) throw DimensionError("HermitianBasis::compose: coordinate count mismatch");
  ComplexMatrix m(n_, n_);
  for (int i = 0; i < n_; ++i) m(i, i) = x(i);
  int k = n_;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      const Complex z(x(k) / kSqrt2, x(k + 1) / kSqrt2);
      m(i, j) = z;
      m(j, i) = std::conj(z);
      k += 2;
    }
  }
  return m;
}

HermitianVector vectorize(const HermitianMatrix& h, const HermitianBasis& basis) {
  if (h.dim() != basis.dim()) throw DimensionError("vectorize: basis dimension mismatch");
  return {h.dim(), basis.coords(h.matrix())};
}

HermitianMatrix devectorize(const HermitianVector& v, const HermitianBasis& basis) {
  if (v.dim != basis.dim()) throw DimensionError("devectorize: basis dimension mismatch");
  return HermitianMatrix::hermitian_part(basis.compose(v.coords));
}

Spectrum eig_hermitian(const ComplexMatrix& h) {
  require_square(h, "eig_hermitian");
  require_finite(h, "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw InputError("eig_hermitian: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Spectrum eig_hermitian(const HermitianMatrix& h) { return eig_hermitian(h.matrix()); }

RealVector eigenvalues_hermitian(const ComplexMatrix& h) {
  require_square(h, "eigenvalues_hermitian");
  require_finite(h, "eigenvalues_hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InputError("eigenvalues_hermitian: eigensolver failed");
  return solver.eigenvalues();
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, const BipartiteDims& dims) {
  const int nA = dims.nA(), nB = dims.nB();
  if (m.rows() != dims.total() || m.cols() != dims.total()) {
    throw DimensionError("partial_transpose: matrix is not " + std::to_string(dims.total()) + " square");
  }
  ComplexMatrix out(m.rows(), m.cols());
  for (int a = 0; a < nA; ++a)
    for (int b = 0; b < nB; ++b)
      for (int a2 = 0; a2 < nA; ++a2)
        for (int b2 = 0; b2 < nB; ++b2)
          out(a * nB + b, a2 * nB + b2) = m(a * nB + b2, a2 * nB + b);
  return out;
}

HermitianMatrix partial_transpose(const HermitianMatrix& h, const BipartiteDims& dims) {
  return HermitianMatrix::hermitian_part(partial_transpose(h.matrix(), dims));
}

ComplexMatrix partial_transpose_a(const ComplexMatrix& m, const BipartiteDims& dims) {
  const int nA = dims.nA(), nB = dims.nB();
  if (m.rows() != dims.total() || m.cols() != dims.total()) {
    throw DimensionError("partial_transpose_a: matrix is not " + std::to_string(dims.total()) + " square");
  }
  ComplexMatrix out(m.rows(), m.cols());
  for (int a = 0; a < nA; ++a)
    for (int b = 0; b < nB; ++b)
      for (int a2 = 0; a2 < nA; ++a2)
        for (int b2 = 0; b2 < nB; ++b2)
          out(a * nB + b, a2 * nB + b2) = m(a2 * nB + b, a * nB + b2);
  return out;
}

RealMatrix pt_superoperator(const BipartiteDims& dims, const HermitianBasis& basis) {
  if (basis.dim() != dims.total()) throw DimensionError("pt_superoperator: basis dimension mismatch");
  const int n2 = basis.size();
  RealMatrix pi(n2, n2);
  for (int k = 0; k < n2; ++k) pi.col(k) = basis.coords(partial_transpose(basis.element(k), dims));
  return pi;
}

}  // namespace genupb
