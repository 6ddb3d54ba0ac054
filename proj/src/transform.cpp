#include "genupb/search.hpp"

#include <cmath>
#include <random>

namespace genupb {

namespace {

ComplexMatrix kron_matrix(const ComplexMatrix& x, const ComplexMatrix& y) {
  ComplexMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return out;
}

/// Orthonormal basis of the complement of a real unit vector.
RealMatrix sphere_tangent(const RealVector& x) {
  Eigen::HouseholderQR<RealMatrix> qr{RealMatrix(x)};
  const RealMatrix q = qr.householderQ();
  return q.rightCols(x.size() - 1);
}

double conditioned_det(const ComplexMatrix& s) {
  const double n = double(s.rows());
  return std::abs(s.determinant()) / std::pow(s.norm() / std::sqrt(n), n);
}

/// The transform equation restricted to the image of rho0: with rho0 = V R0 V^dagger,
/// rho0 G rho0 = rho0  <=>  R0 (V^dagger G V) R0 = R0.
class TransformEquation {
 public:
  TransformEquation(const DensityMatrix& rho0)
      : dims_(rho0.dims()), basis_a_(dims_.nA()), basis_b_(dims_.nB()) {
    const Spectrum s = eig_hermitian(rho0.hermitian());
    rank_ = numerical_rank(s.eigenvalues);
    v_ = s.eigenvectors.rightCols(rank_);
    r0_ = v_.adjoint() * rho0.matrix() * v_;
    basis_r_ = HermitianBasis(rank_);
    target_ = basis_r_->coords(r0_);
  }

  int rank() const { return rank_; }
  const RealVector& target() const { return target_; }
  const HermitianBasis& basis_a() const { return basis_a_; }
  const HermitianBasis& basis_b() const { return basis_b_; }

  RealVector value(const ComplexMatrix& g) const { return basis_r_->coords(r0_ * (v_.adjoint() * g * v_) * r0_); }

  RealVector evaluate(const RealVector& mu, const RealVector& nu) const {
    const ComplexMatrix sa = basis_a_.compose(mu);
    const ComplexMatrix sb = basis_b_.compose(nu);
    return value(kron_matrix(sa * sa, sb * sb));
  }

 private:
  BipartiteDims dims_;
  HermitianBasis basis_a_, basis_b_;
  std::optional<HermitianBasis> basis_r_;
  int rank_ = 0;
  ComplexMatrix v_, r0_;
  RealVector target_;
};

ComplexVector solve_inverse(const ComplexMatrix& s, const ComplexVector& x) {
  return s.partialPivLu().solve(x);
}

}  // namespace

double transform_residual(const DensityMatrix& rho0, const ComplexMatrix& S_A, const ComplexMatrix& S_B) {
  const ComplexMatrix s = kron_matrix(S_A, S_B);
  const ComplexMatrix& r = rho0.matrix();
  return (r * s.adjoint() * s * r - r).norm();
}

DensityMatrix apply_product_transform(const DensityMatrix& rho, const ComplexMatrix& S_A, const ComplexMatrix& S_B) {
  const BipartiteDims& dims = rho.dims();
  if (S_A.rows() != dims.nA() || S_A.cols() != dims.nA() || S_B.rows() != dims.nB() || S_B.cols() != dims.nB())
    throw DimensionError("apply_product_transform: factor shapes do not match " + dims.str());
  const ComplexMatrix s = kron_matrix(S_A, S_B);
  return DensityMatrix::normalized(s * rho.matrix() * s.adjoint(), dims);
}

namespace {

/// Gauss-Newton machinery on (mu, nu) with nu kept on the unit sphere.
class TransformSolver {
 public:
  TransformSolver(const TransformEquation& eq, const BipartiteDims& dims, double cg_tol)
      : eq_(eq), nA_(dims.nA()), nB_(dims.nB()), cg_tol_(cg_tol) {}

  int columns() const { return nA_ * nA_ + nB_ * nB_ - 1; }

  RealVector residual(const RealVector& mu, const RealVector& nu) const { return eq_.target() - eq_.evaluate(mu, nu); }

  RealMatrix jacobian(const RealVector& mu, const RealVector& nu, const RealMatrix& tangent) const {
    const ComplexMatrix sa = eq_.basis_a().compose(mu);
    const ComplexMatrix sb = eq_.basis_b().compose(nu);
    const ComplexMatrix sa2 = sa * sa, sb2 = sb * sb;
    RealMatrix jac(eq_.target().size(), columns());
    for (int k = 0; k < nA_ * nA_; ++k) {
      const ComplexMatrix h = eq_.basis_a().element(k);
      jac.col(k) = eq_.value(kron_matrix(h * sa + sa * h, sb2));
    }
    for (Eigen::Index k = 0; k < tangent.cols(); ++k) {
      const ComplexMatrix t = eq_.basis_b().compose(tangent.col(k));
      jac.col(nA_ * nA_ + k) = eq_.value(kron_matrix(sa2, t * sb + sb * t));
    }
    return jac;
  }

  /// Move by t * dx in local coordinates, renormalizing nu and rescaling mu by the same factor.
  void advance(RealVector& mu, RealVector& nu, const RealMatrix& tangent, const RealVector& dx, double t) const {
    mu += t * dx.head(nA_ * nA_);
    nu += t * (tangent * dx.tail(tangent.cols()));
    const double s = nu.norm();
    nu /= s;
    mu *= s;
  }

  /// One step on the linearized system with step cap and backtracking:
  /// CG on the normal equations, or (direct) a minimum-norm least-squares
  /// solve that keeps quadratic convergence when J is badly conditioned.
  void step(RealVector& mu, RealVector& nu, double nr, bool direct = false) const {
    const RealMatrix tangent = sphere_tangent(nu);
    const RealMatrix jac = jacobian(mu, nu, tangent);
    const RealVector res = residual(mu, nu);
    RealVector dx;
    if (direct) {
      Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(jac);
      cod.setThreshold(Tolerances::pinv_cutoff);
      dx = cod.solve(res);
    } else {
      dx = solve_cg(jac.transpose() * jac, jac.transpose() * res, cg_tol_);
    }
    double t = 1.0;
    const double cap = 0.5 * std::sqrt(mu.squaredNorm() + 1.0);
    const double dn = dx.norm();
    if (dn > cap) t = cap / dn;
    RealVector mu2 = mu, nu2 = nu;
    double best = INFINITY;
    for (int bt = 0; bt < 30; ++bt) {
      mu2 = mu;
      nu2 = nu;
      advance(mu2, nu2, tangent, dx, t);
      best = residual(mu2, nu2).norm();
      if (best < nr) break;
      t *= 0.5;
    }
    // When the full step still leaves most of the residual (long valleys in
    // the overdetermined case), try longer steps up to the cap.
    while (best < nr && best > 0.5 * nr && 2.0 * t * dn <= cap) {
      RealVector mu3 = mu, nu3 = nu;
      advance(mu3, nu3, tangent, dx, 2.0 * t);
      const double r3 = residual(mu3, nu3).norm();
      if (!(r3 < best)) break;
      t *= 2.0;
      best = r3;
      mu2 = std::move(mu3);
      nu2 = std::move(nu3);
    }
    mu = mu2;
    nu = nu2;
  }

  double log_det(const RealVector& mu, const RealVector& nu) const {
    return std::log(conditioned_det(eq_.basis_a().compose(mu))) + std::log(conditioned_det(eq_.basis_b().compose(nu)));
  }

  /// Walk along the solution family towards larger conditioned determinant.
  /// Returns the number of accepted moves.
  int balance(RealVector& mu, RealVector& nu, int steps, double tol) const {
    int accepted = 0;
    double eta = 0.1;
    for (int b = 0; b < steps && eta > 1e-4; ++b) {
      const RealMatrix tangent = sphere_tangent(nu);
      const RealMatrix jac = jacobian(mu, nu, tangent);
      Eigen::JacobiSVD<RealMatrix> svd(jac, Eigen::ComputeFullV);
      const RealVector sv = svd.singularValues();
      int rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-8 * sv(0)) ++rank;
      const RealMatrix null = svd.matrixV().rightCols(columns() - rank);
      if (null.cols() == 0) break;
      // Gradient of log det in local coordinates by central differences.
      const double h0 = log_det(mu, nu);
      RealVector grad(columns());
      for (int k = 0; k < columns(); ++k) {
        RealVector e = RealVector::Zero(columns());
        e(k) = 1e-6;
        RealVector mp = mu, np = nu, mm = mu, nm = nu;
        advance(mp, np, tangent, e, 1.0);
        advance(mm, nm, tangent, e, -1.0);
        grad(k) = (log_det(mp, np) - log_det(mm, nm)) / 2e-6;
      }
      RealVector dir = null * (null.transpose() * grad);
      const double slope = dir.norm();
      if (slope < 1e-6) break;
      dir /= slope;
      // Predicted log-det gain capped at 0.5 per move.
      const double len = std::min(eta * std::sqrt(mu.squaredNorm() + 1.0), 0.5 / slope);
      RealVector mu2 = mu, nu2 = nu;
      advance(mu2, nu2, tangent, dir, len);
      double nr = residual(mu2, nu2).norm();
      for (int it = 0; it < 20 && nr >= tol; ++it) {
        step(mu2, nu2, nr, true);
        nr = residual(mu2, nu2).norm();
      }
      if (nr < tol && log_det(mu2, nu2) > h0) {
        mu = mu2;
        nu = nu2;
        ++accepted;
      } else {
        eta *= 0.5;
      }
    }
    return accepted;
  }

 private:
  const TransformEquation& eq_;
  int nA_, nB_;
  double cg_tol_;
};

}  // namespace

TransformResult transform_to_projection(const DensityMatrix& rho0, const TransformSolveConfig& config,
                                        const std::optional<GeneralizedUPB>& kernel_upb,
                                        const std::optional<std::pair<HermitianMatrix, HermitianMatrix>>& initial,
                                        const FinderConfig& finder) {
  if (config.max_outer < 1 || !(config.singular_guard > 0.0 && config.singular_guard < 1.0) || !(config.tol > 0.0) ||
      config.balance_steps < 0)
    throw InputError("transform_to_projection: invalid config");
  const BipartiteDims& dims = rho0.dims();
  const int nA = dims.nA(), nB = dims.nB(), N = dims.total();
  if (kernel_upb && !(kernel_upb->dims() == dims)) throw DimensionError("transform_to_projection: UPB dims differ");

  const TransformEquation eq(rho0);
  const TransformSolver solver(eq, dims, config.cg_tol);
  const int r = eq.rank();
  TransformResult out;
  out.jacobian_rows = r * r;
  out.jacobian_cols = solver.columns();
  if (r != expected_rank(dims)) {
    out.warnings.push_back("rank " + std::to_string(r) + " differs from the lowest rank " +
                           std::to_string(expected_rank(dims)));
  }

  RealVector mu, nu;
  std::mt19937_64 rng(config.seed);
  if (initial) {
    if (initial->first.dim() != nA || initial->second.dim() != nB)
      throw DimensionError("transform_to_projection: initial factors have wrong shape");
    mu = eq.basis_a().coords(initial->first.matrix());
    nu = eq.basis_b().coords(initial->second.matrix());
  } else {
    std::normal_distribution<double> g;
    mu = eq.basis_a().coords(ComplexMatrix::Identity(nA, nA));
    nu = eq.basis_b().coords(ComplexMatrix::Identity(nB, nB));
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) += config.init_noise * g(rng);
    for (Eigen::Index i = 0; i < nu.size(); ++i) nu(i) += config.init_noise * g(rng);
  }
  if (!(nu.norm() > 0.0)) throw InputError("transform_to_projection: S_B must be nonzero");
  mu *= nu.norm();
  nu.normalize();
  {
    const RealVector f = eq.evaluate(mu, nu);
    const double ff = f.squaredNorm();
    if (!(ff > 0.0)) throw InputError("transform_to_projection: initial transformation annihilates rho0");
    mu *= std::sqrt(std::abs(f.dot(eq.target()) / ff));
  }

  const HermitianBasis& ba = eq.basis_a();
  const HermitianBasis& bb = eq.basis_b();
  out.status = SearchStatus::non_converged;
  int polish = 0;
  double last = INFINITY;
  for (int it = 0; it <= config.max_outer; ++it) {
    out.iterations = it;
    const double nr = solver.residual(mu, nu).norm();
    const double det = conditioned_det(ba.compose(mu)) * conditioned_det(bb.compose(nu));
    out.residual_history.push_back(nr);
    out.det_history.push_back(det);
    if (nr < config.tol) {
      // A few extra steps push the residual to rounding level; large
      // transformations amplify whatever is left in the p-fit.
      if (out.status == SearchStatus::converged && (++polish > 4 || nr > 0.5 * last)) break;
      out.status = SearchStatus::converged;
    }
    last = nr;
    if (out.status != SearchStatus::converged && !(det >= config.singular_guard)) {
      out.status = SearchStatus::singular_abort;
      break;
    }
    if (it == config.max_outer) break;
    // CG first; a stalled CG step (badly conditioned J near a singular S)
    // is redone with the direct least-squares solve.
    const RealVector mu0 = mu, nu0 = nu;
    solver.step(mu, nu, nr);
    if (solver.residual(mu, nu).norm() > 0.9 * nr) {
      mu = mu0;
      nu = nu0;
      solver.step(mu, nu, nr, true);
      ++out.direct_steps;
    }
  }
  if (out.status == SearchStatus::converged && config.balance_steps > 0) {
    out.balance_moves = solver.balance(mu, nu, config.balance_steps, config.tol);
    out.residual_history.push_back(solver.residual(mu, nu).norm());
    out.det_history.push_back(conditioned_det(ba.compose(mu)) * conditioned_det(bb.compose(nu)));
  }

  out.S_A = HermitianMatrix::hermitian_part(ba.compose(mu));
  out.S_B = HermitianMatrix::hermitian_part(bb.compose(nu));
  if (out.status != SearchStatus::converged) return out;

  // S rho0 S / r is a projection up to the solver residual; snap its spectrum
  // to {0, 1/r} so rounding in badly conditioned S does not leak into Q.
  const DensityMatrix raw = apply_product_transform(rho0, out.S_A.matrix(), out.S_B.matrix());
  const ComplexMatrix img = eig_hermitian(raw.hermitian()).eigenvectors.rightCols(r);
  const DensityMatrix rho = DensityMatrix::normalized(img * img.adjoint() / double(r), dims);
  const HermitianMatrix q = HermitianMatrix::hermitian_part(ComplexMatrix::Identity(N, N) - double(r) * rho.matrix());
  std::vector<ProductVector> members;
  if (kernel_upb) {
    const ComplexMatrix kernel = kernel_projector(rho.matrix()).basis;
    for (const auto& m : kernel_upb->members()) {
      const ProductVector mapped(solve_inverse(out.S_A.matrix(), m.phi()), solve_inverse(out.S_B.matrix(), m.chi()));
      members.push_back(refine_product_vector(kernel, dims, mapped.normalized()));
    }
  } else {
    const int expected = r == expected_rank(dims) ? static_cast<int>(upb_counts(dims).p) : 0;
    FinderConfig fc = finder;
    if (expected > 0 && fc.stop_after == 0) fc.stop_after = expected;
    FinderResult fr = find_product_vectors(kernel_projector(rho.matrix()).basis, dims, fc, expected);
    for (auto& w : fr.warnings) out.warnings.push_back(w);
    members = std::move(fr.vectors);
  }
  if (members.empty()) {
    out.warnings.push_back("no kernel product vectors; projection-form state not assembled");
    return out;
  }
  GeneralizedUPB upb(dims, std::move(members));
  const PFitReport fit = extract_p(q, upb, N - r);
  if (!(fit.residual < 1e-8)) out.warnings.push_back("p-fit residual " + std::to_string(fit.residual));
  out.state = ProjectionFormState{rho, std::move(upb), fit.p, q, r};
  return out;
}

TangentFamily tangent_family(const ProjectionFormState& state, double rel_tol) {
  const BipartiteDims& dims = state.rho.dims();
  const int nA = dims.nA(), nB = dims.nB();
  const TransformEquation eq(state.rho);
  const HermitianBasis& ba = eq.basis_a();
  const HermitianBasis& bb = eq.basis_b();
  const int cols = nA * nA + nB * nB;
  const int r = eq.rank();
  RealMatrix map(r * r, cols);
  const ComplexMatrix ia = ComplexMatrix::Identity(nA, nA), ib = ComplexMatrix::Identity(nB, nB);
  for (int k = 0; k < nA * nA; ++k) map.col(k) = eq.value(kron_matrix(ba.element(k), ib));
  for (int k = 0; k < nB * nB; ++k) map.col(nA * nA + k) = eq.value(kron_matrix(ia, bb.element(k)));

  Eigen::JacobiSVD<RealMatrix> svd(map, Eigen::ComputeFullV);
  const RealVector sv = svd.singularValues();
  TangentFamily out;
  out.singular_values = sv.reverse();
  int small = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= rel_tol * sv(0)) ++small;
  out.nullity = small + std::max(0, cols - static_cast<int>(sv.size()));
  const RealMatrix null = svd.matrixV().rightCols(out.nullity);

  RealVector trivial(cols);
  trivial << ba.coords(ia), -bb.coords(ib);
  trivial.normalize();
  const RealMatrix reduced = null - trivial * (trivial.transpose() * null);
  Eigen::JacobiSVD<RealMatrix> rsvd(reduced, Eigen::ComputeThinU);
  for (Eigen::Index i = 0; i < rsvd.singularValues().size(); ++i) {
    if (rsvd.singularValues()(i) < 0.5) continue;
    const RealVector x = rsvd.matrixU().col(i);
    out.generators.emplace_back(HermitianMatrix::hermitian_part(ba.compose(x.head(nA * nA))),
                                HermitianMatrix::hermitian_part(bb.compose(x.tail(nB * nB))));
  }
  out.dimension = static_cast<int>(out.generators.size());
  return out;
}

}  // namespace genupb
