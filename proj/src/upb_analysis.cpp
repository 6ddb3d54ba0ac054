#include "genupb/upb_analysis.hpp"

#include <cmath>
#include <random>

namespace genupb {

namespace {

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Orthonormal basis of the complement of a unit vector.
ComplexMatrix tangent_basis(const ComplexVector& x) {
  Eigen::HouseholderQR<ComplexMatrix> qr{ComplexMatrix(x)};
  const ComplexMatrix q = qr.householderQ();
  return q.rightCols(x.size() - 1);
}

ComplexVector random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

/// Linear constraints <u_j | phi (x) chi> for an orthonormal complement {u_j}.
class ConstraintSystem {
 public:
  ConstraintSystem(const ComplexMatrix& complement, const BipartiteDims& dims)
      : nA_(dims.nA()), nB_(dims.nB()), m_(static_cast<int>(complement.cols())),
        by_phi_(m_ * nB_, nA_), by_chi_(m_ * nA_, nB_) {
    for (int j = 0; j < m_; ++j) {
      for (int a = 0; a < nA_; ++a) {
        for (int b = 0; b < nB_; ++b) {
          const Complex c = std::conj(complement(a * nB_ + b, j));
          by_phi_(j * nB_ + b, a) = c;
          by_chi_(j * nA_ + a, b) = c;
        }
      }
    }
  }

  int rows() const { return m_; }

  /// m x nB matrix acting on chi.
  ComplexMatrix given_phi(const ComplexVector& phi) const {
    const ComplexVector v = by_phi_ * phi;
    return Eigen::Map<const RowMajorMatrix>(v.data(), m_, nB_);
  }

  /// m x nA matrix acting on phi.
  ComplexMatrix given_chi(const ComplexVector& chi) const {
    const ComplexVector v = by_chi_ * chi;
    return Eigen::Map<const RowMajorMatrix>(v.data(), m_, nA_);
  }

 private:
  int nA_, nB_, m_;
  ComplexMatrix by_phi_;
  ComplexMatrix by_chi_;
};

struct LocalResult {
  ComplexVector phi;
  ComplexVector chi;
  double objective;
};

LocalResult smallest_pair(const ConstraintSystem& sys, const ComplexVector& phi) {
  const ComplexMatrix m = sys.given_phi(phi);
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const Eigen::Index last = m.cols() - 1;
  const double smin = sys.rows() >= m.cols() ? svd.singularValues()(last) : 0.0;
  return {phi, svd.matrixV().col(last), smin * smin};
}

LocalResult local_descent(const ConstraintSystem& sys, ComplexVector phi, int max_iters) {
  ComplexVector chi = smallest_pair(sys, phi).chi;
  const Eigen::Index nA = phi.size();
  for (int it = 0; it < max_iters; ++it) {
    const ComplexMatrix m_phi = sys.given_phi(phi);
    const ComplexVector res = m_phi * chi;
    const double rn = res.norm();
    if (rn < 1e-15) break;
    if (it >= 25 && rn > 1e-4) break;
    const ComplexMatrix t_phi = tangent_basis(phi);
    const ComplexMatrix t_chi = tangent_basis(chi);
    ComplexMatrix jac(res.size(), t_phi.cols() + t_chi.cols());
    jac << sys.given_chi(chi) * t_phi, m_phi * t_chi;
    const ComplexVector step = -jac.completeOrthogonalDecomposition().solve(res);
    phi += t_phi * step.head(nA - 1);
    phi.normalize();
    chi += t_chi * step.tail(t_chi.cols());
    chi.normalize();
    if (step.norm() < 1e-14) break;
  }
  return smallest_pair(sys, phi);
}

}  // namespace

ComplexMatrix orthogonal_complement(const ComplexMatrix& v, double rel_tol) {
  const Eigen::Index n = v.rows();
  if (v.cols() == 0) return ComplexMatrix::Identity(n, n);
  Eigen::JacobiSVD<ComplexMatrix> svd(v, Eigen::ComputeFullU);
  const RealVector sv = svd.singularValues();
  const Eigen::Index rank = (sv.array() > rel_tol * sv(0)).count();
  return svd.matrixU().rightCols(n - rank);
}

FinderResult find_product_vectors(const ComplexMatrix& subspace, const BipartiteDims& dims,
                                  const FinderConfig& config, int expected) {
  const Eigen::Index n = dims.total();
  if (subspace.rows() != n) throw DimensionError("find_product_vectors: subspace vectors have wrong length");
  const Eigen::Index d = subspace.cols();
  if (d < 1 || d >= n) throw InputError("find_product_vectors: need 1 <= D < N");
  if (config.starts < 1) throw InputError("find_product_vectors: starts must be >= 1");

  const ComplexMatrix complement = orthogonal_complement(subspace);
  const ConstraintSystem sys(complement, dims);
  std::mt19937_64 rng(config.seed);

  FinderResult out;
  std::vector<ComplexVector> seen;
  for (int s = 0; s < config.starts; ++s) {
    out.starts_used = s + 1;
    const LocalResult local = local_descent(sys, random_unit(dims.nA(), rng), config.max_local_iters);
    if (!(local.objective < config.local_tol)) continue;
    const ComplexVector psi = kron(local.phi, local.chi);
    bool duplicate = false;
    for (const auto& q : seen) {
      if (std::abs(q.dot(psi)) > config.dedupe_overlap) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    seen.push_back(psi);
    out.vectors.emplace_back(local.phi, local.chi);
    if (config.stop_after > 0 && static_cast<int>(out.vectors.size()) >= config.stop_after) break;
  }
  if (expected > 0 && static_cast<int>(out.vectors.size()) < expected) {
    out.warnings.push_back("found " + std::to_string(out.vectors.size()) + " of " + std::to_string(expected) +
                           " expected product vectors after " + std::to_string(out.starts_used) + " starts");
  }
  return out;
}

ProductVector refine_product_vector(const ComplexMatrix& subspace, const BipartiteDims& dims, const ProductVector& start,
                                    int max_iters) {
  if (subspace.rows() != dims.total() || start.nA() != dims.nA() || start.nB() != dims.nB())
    throw DimensionError("refine_product_vector: shapes do not match " + dims.str());
  const ConstraintSystem sys(orthogonal_complement(subspace), dims);
  const LocalResult local = local_descent(sys, start.phi().normalized(), max_iters);
  ComplexVector chi = local.chi;
  // Keep the phase of the starting chi.
  const Complex ov = chi.dot(start.chi());
  if (std::abs(ov) > 0.0) chi *= ov / std::abs(ov);
  return ProductVector(local.phi, chi);
}

bool unextendibility_check(const GeneralizedUPB& upb, const FinderConfig& config) {
  const ComplexMatrix complement = orthogonal_complement(upb.full_vectors());
  if (complement.cols() == 0) return true;
  FinderConfig cfg = config;
  cfg.stop_after = 1;
  return find_product_vectors(complement, upb.dims(), cfg).vectors.empty();
}

GeneralizedUPB conjugate_upb(const GeneralizedUPB& upb) {
  std::vector<ProductVector> out;
  out.reserve(upb.members().size());
  for (const auto& m : upb.members()) out.emplace_back(m.phi(), m.chi().conjugate());
  return GeneralizedUPB(upb.dims(), std::move(out));
}

PFitReport extract_p(const HermitianMatrix& q, const GeneralizedUPB& upb, int d) {
  const int n = upb.dims().total();
  if (q.dim() != n) throw DimensionError("extract_p: Q dimension does not match the UPB");
  if (d < 1) throw InputError("extract_p: d must be positive");
  const HermitianBasis basis(n);
  const int k = upb.size();
  RealMatrix design(basis.size(), k);
  for (int i = 0; i < k; ++i) {
    ComplexVector psi = kron(upb.members()[static_cast<size_t>(i)]);
    psi /= psi.norm();
    design.col(i) = basis.coords(psi * psi.adjoint());
  }
  const RealVector target = basis.coords(q.matrix());

  PFitReport out;
  if (k == 0) {
    out.residual = target.norm();
    out.unique = false;
    return out;
  }
  Eigen::JacobiSVD<RealMatrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector sv = svd.singularValues();
  const double cut = Tolerances::pinv_cutoff * sv(0);
  RealVector utb = svd.matrixU().transpose() * target;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) {
      utb(i) /= sv(i);
      ++rank;
    } else {
      utb(i) = 0.0;
    }
  }
  const RealVector x = svd.matrixV() * utb;
  out.unique = rank == k;
  out.residual = (design * x - target).norm();
  out.p.resize(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    out.p[static_cast<size_t>(i)] = x(i) / double(d);
    if (out.p[static_cast<size_t>(i)] < 0.0) ++out.negative_count;
  }
  return out;
}

PFitReport extract_p(const HermitianMatrix& q, const GeneralizedUPB& upb, const BipartiteDims& dims) {
  return extract_p(q, upb, upb_counts(dims).d);
}

namespace {

struct ProjectionTest {
  int rank;
  double purity;
  double idempotency;
  bool ok;
};

ProjectionTest projection_test(const ComplexMatrix& m, double tol) {
  const int r = numerical_rank(eigenvalues_hermitian(m));
  const double purity = (m.array() * m.conjugate().array()).sum().real();
  const ComplexMatrix scaled = double(r) * m;
  const double idem = (scaled * scaled - scaled).norm();
  const bool ok = r > 0 && std::abs(purity - 1.0 / r) < tol && idem < tol;
  return {r, purity, idem, ok};
}

}  // namespace

ProjectionFormReport verify_projection_form(const DensityMatrix& rho, double tol) {
  const ProjectionTest a = projection_test(rho.matrix(), tol);
  const ProjectionTest b = projection_test(rho.partial_transpose().matrix(), tol);
  ProjectionFormReport out;
  out.is_proj_form = a.ok;
  out.r = a.rank;
  out.purity = a.purity;
  out.idempotency = a.idempotency;
  out.rank_rhoP = b.rank;
  out.rhoP_is_proj = b.ok;
  out.rhoP_purity = b.purity;
  out.rhoP_idempotency = b.idempotency;
  return out;
}

SymmetryReport symmetry_report(const ProjectionFormState& state, double tol) {
  SymmetryReport out;
  const int n = state.rho.dim();
  const RankProfile ranks = rank_profile(state.rho);
  out.rank_rho = ranks.rank_rho;
  out.rank_rhoP = ranks.rank_rhoP;
  if (out.rank_rho != out.rank_rhoP) {
    out.failures.push_back("rank(rho^P) = " + std::to_string(out.rank_rhoP) + " differs from rank(rho) = " +
                           std::to_string(out.rank_rho));
  }
  const int r = state.rank;
  const ComplexMatrix qp = ComplexMatrix::Identity(n, n) - double(r) * state.rho.partial_transpose().matrix();
  out.qp_idempotency = (qp * qp - qp).norm();
  if (!(out.qp_idempotency < tol)) {
    out.failures.push_back("Q^P is not a projection: ||(Q^P)^2 - Q^P|| = " + std::to_string(out.qp_idempotency));
  }
  if (state.upb.size() > 0) {
    const PFitReport conj = extract_p(HermitianMatrix::hermitian_part(qp), conjugate_upb(state.upb), n - r);
    double mismatch = 0.0;
    for (size_t k = 0; k < state.p.size(); ++k) mismatch = std::max(mismatch, std::abs(conj.p[k] - state.p[k]));
    out.p_mismatch = mismatch;
    if (!(mismatch < tol)) out.failures.push_back("conjugate-UPB coefficients differ by " + std::to_string(mismatch));
  } else {
    out.failures.push_back("no kernel UPB");
  }
  out.symmetric = out.failures.empty();
  return out;
}

ProjectionAnalysis analyze_projection(const DensityMatrix& rho, const FinderConfig& config, double fit_tol) {
  ProjectionAnalysis out;
  const int n = rho.dim();
  const SubspaceProjector kernel = kernel_projector(rho.matrix());
  out.rank = n - kernel.rank;
  if (kernel.rank == 0) return out;
  const BipartiteDims& dims = rho.dims();
  const int expected = out.rank == expected_rank(dims) ? static_cast<int>(upb_counts(dims).p) : 0;
  FinderConfig cfg = config;
  if (expected > 0 && cfg.stop_after == 0) cfg.stop_after = expected;
  out.kernel = find_product_vectors(kernel.basis, dims, cfg, expected);
  if (out.kernel.vectors.empty()) return out;
  GeneralizedUPB upb(dims, out.kernel.vectors);
  out.span_dimension = upb.span_dimension();
  const HermitianMatrix q =
      HermitianMatrix::hermitian_part(ComplexMatrix::Identity(n, n) - double(out.rank) * rho.matrix());
  out.fit = extract_p(q, upb, n - out.rank);
  if (out.fit->residual < fit_tol) {
    out.state = ProjectionFormState{rho, std::move(upb), out.fit->p, q, out.rank};
  }
  return out;
}

}  // namespace genupb
