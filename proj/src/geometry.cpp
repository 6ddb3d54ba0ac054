#include "genupb/geometry.hpp"

#include <cmath>
#include <random>

namespace genupb {

namespace {

template <class F>
RealMatrix superoperator(int n, F&& f) {
  const HermitianBasis basis(n);
  RealMatrix out(n * n, n * n);
  for (int k = 0; k < n * n; ++k) out.col(k) = basis.coords(f(basis.element(k)));
  return out;
}

RealMatrix symmetrized(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

struct Projectors {
  ComplexMatrix p, q;
  RankProfile ranks;
  std::vector<std::string> warnings;
};

Projectors support_projectors(const DensityMatrix& rho, double tol) {
  Projectors out;
  SubspaceProjector a = image_projector(rho.matrix(), tol);
  SubspaceProjector b = image_projector(rho.partial_transpose().matrix(), tol);
  out.p = a.projector.matrix();
  out.q = b.projector.matrix();
  out.ranks = rank_profile(rho, tol);
  for (auto& w : a.warnings) out.warnings.push_back("rho: " + w);
  for (auto& w : b.warnings) out.warnings.push_back("rho^P: " + w);
  return out;
}

RealMatrix combined_condpert(const DensityMatrix& rho0, double tol, std::vector<std::string>* warnings,
                             RankProfile* ranks) {
  const BipartiteDims& dims = rho0.dims();
  Projectors pr = support_projectors(rho0, tol);
  if (warnings) *warnings = pr.warnings;
  if (ranks) *ranks = pr.ranks;
  const RealMatrix pi = pt_superoperator(dims, HermitianBasis(dims.total()));
  const RealMatrix sp = support_superoperator(pr.p);
  const RealMatrix qbar = pi * support_superoperator(pr.q) * pi;
  return symmetrized(sp * qbar * sp);
}

}  // namespace

RealMatrix support_superoperator(const ComplexMatrix& projector) {
  return superoperator(static_cast<int>(projector.rows()), [&](const ComplexMatrix& s) -> ComplexMatrix {
    const ComplexMatrix ps = projector * s;
    return ps + s * projector - ps * projector;
  });
}

RealMatrix strict_superoperator(const ComplexMatrix& projector) {
  return superoperator(static_cast<int>(projector.rows()),
                       [&](const ComplexMatrix& s) -> ComplexMatrix { return projector * s * projector; });
}

UnitCount count_unit_eigenvalues(const RealMatrix& m, double window) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("count_unit_eigenvalues: eigensolver failed");
  const RealVector& w = es.eigenvalues();
  UnitCount out;
  double below = -INFINITY;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > 1.0 - window && w(i) <= 1.0 + window) {
      idx.push_back(i);
    } else if (w(i) <= 1.0 - window) {
      below = std::max(below, w(i));
    }
  }
  out.count = static_cast<int>(idx.size());
  out.gap = std::isfinite(below) ? 1.0 - below : 1.0;
  out.vectors.resize(m.rows(), out.count);
  for (int k = 0; k < out.count; ++k) out.vectors.col(k) = es.eigenvectors().col(idx[static_cast<size_t>(k)]);
  return out;
}

DimensionReport rank_surface_dimension(const DensityMatrix& rho0, double tol) {
  DimensionReport out;
  const RealMatrix m = combined_condpert(rho0, tol, &out.warnings, &out.ranks);
  const UnitCount uc = count_unit_eigenvalues(m);
  const BipartiteDims& dims = rho0.dims();
  out.unit_eigen_count = uc.count;
  out.surface_dimension = uc.count - 1;
  out.eq_class_dimension = out.surface_dimension - (2 * (dims.nA() * dims.nA() + dims.nB() * dims.nB()) - 4);
  out.spectral_gap = uc.gap;
  out.trusted = uc.gap > Tolerances::trusted_spectral_gap;
  if (!out.trusted) out.warnings.push_back("untrusted count: spectral gap " + std::to_string(uc.gap));
  return out;
}

RealMatrix tangent_directions(const DensityMatrix& rho0, double tol) {
  return count_unit_eigenvalues(combined_condpert(rho0, tol, nullptr, nullptr)).vectors;
}

ExtremalityCertificate extremality_check(const DensityMatrix& rho, double tol) {
  const BipartiteDims& dims = rho.dims();
  Projectors pr = support_projectors(rho, tol);
  const RealMatrix pi = pt_superoperator(dims, HermitianBasis(dims.total()));
  const RealMatrix sp = strict_superoperator(pr.p);
  const RealMatrix sq = pi * strict_superoperator(pr.q) * pi;
  const UnitCount uc = count_unit_eigenvalues(symmetrized(sp * sq * sp));
  ExtremalityCertificate out;
  out.solution_dim = uc.count;
  out.is_extremal = uc.count == 1;
  out.spectral_gap = uc.gap;
  out.warnings = pr.warnings;
  if (uc.gap <= Tolerances::trusted_spectral_gap)
    out.warnings.push_back("untrusted count: spectral gap " + std::to_string(uc.gap));
  return out;
}

SearchOutcome perturb_and_repair(const DensityMatrix& rho0, const HermitianMatrix& sigma, double eps,
                                 const SearchConfig& config) {
  if (sigma.dim() != rho0.dim()) throw DimensionError("perturb_and_repair: sigma has wrong dimension");
  if (!std::isfinite(eps)) throw InputError("perturb_and_repair: eps must be finite");
  const RankProfile ranks = rank_profile(rho0);
  if (eps == 0.0) {
    SearchOutcome out;
    out.status = SearchStatus::converged;
    out.state = rho0;
    return out;
  }
  const ComplexMatrix start = rho0.matrix() + eps * sigma.matrix();
  SearchOutcome out = refine_rank_ppt(start, rho0.dims(), ranks.rank_rho, ranks.rank_rhoP, config);
  if (out.state) out.diagnostics["distance"] = (out.state->matrix() - rho0.matrix()).norm();
  return out;
}

HermitianMatrix random_tangent_direction(const DensityMatrix& rho0, std::uint64_t seed) {
  const RealMatrix dirs = tangent_directions(rho0);
  const int n = rho0.dim();
  const HermitianBasis basis(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RealVector c(dirs.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
  ComplexMatrix s = basis.compose(dirs * c);
  s -= s.trace().real() * rho0.matrix();
  const double nrm = s.norm();
  if (!(nrm > 0.0)) return HermitianMatrix::zero(n);
  return HermitianMatrix::hermitian_part(s / nrm);
}

NeighborhoodReport neighborhood_extremality_sample(const DensityMatrix& rho0, int count, double eps,
                                                   const SearchConfig& config) {
  if (count < 1) throw InputError("neighborhood_extremality_sample: count must be >= 1");
  NeighborhoodReport out;
  out.count = count;
  for (int i = 0; i < count; ++i) {
    const HermitianMatrix sigma = random_tangent_direction(rho0, config.seed + static_cast<std::uint64_t>(i));
    const SearchOutcome rep = perturb_and_repair(rho0, sigma, eps, config);
    if (!rep.state) {
      ++out.repair_failures;
      out.failures.push_back("sample " + std::to_string(i) + ": repair did not converge");
      continue;
    }
    if (extremality_check(*rep.state).is_extremal) {
      ++out.extremal;
    } else {
      out.failures.push_back("sample " + std::to_string(i) + ": not extremal");
    }
  }
  out.fraction = double(out.extremal) / double(count);
  return out;
}

}  // namespace genupb
