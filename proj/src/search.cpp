#include "genupb/search.hpp"

#include "genupb/geometry.hpp"

#include <cmath>
#include <random>

namespace genupb {

RealVector solve_cg(const RealMatrix& A, const RealVector& a, double tol) {
  if (A.rows() != A.cols() || A.rows() != a.size()) throw DimensionError("solve_cg: shape mismatch");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw InputError("solve_cg: A is not symmetric");
  RealVector x = RealVector::Zero(a.size());
  RealVector r = a;
  RealVector p = r;
  double rs = r.squaredNorm();
  const double target = tol * a.norm();
  if (std::sqrt(rs) <= target || rs == 0.0) return x;
  for (Eigen::Index it = 0; it < a.size(); ++it) {
    const RealVector ap = A * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rs / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rn = r.squaredNorm();
    if (std::sqrt(rn) <= target) break;
    p = r + (rn / rs) * p;
    rs = rn;
  }
  return x;
}

std::string to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::converged: return "converged";
    case SearchStatus::non_converged: return "non_converged";
    case SearchStatus::singular_abort: return "singular_abort";
  }
  return "unknown";
}

namespace {

struct Block {
  ComplexMatrix w;    // columns spanning the constrained eigenspace
  bool transposed;    // constraint acts on rho^P
  double target;      // diagonal target value
};

/// Rows of the linearized conditions w_a^dagger X w_b = target delta_ab
/// (X = rho or rho^P) as functionals of the hermitian coordinates of rho.
void append_block(const Block& blk, const ComplexMatrix& x, const BipartiteDims& dims, const HermitianBasis& basis,
                  std::vector<RealVector>& rows, std::vector<double>& res) {
  const Eigen::Index k = blk.w.cols();
  const ComplexMatrix y = blk.w.adjoint() * x * blk.w;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      ComplexMatrix m = blk.w.col(b) * blk.w.col(a).adjoint();
      if (blk.transposed) m = partial_transpose(m, dims);
      rows.push_back(basis.coords(m));
      res.push_back(y(a, b).real() - (a == b ? blk.target : 0.0));
      if (a != b) {
        rows.push_back(basis.coords(Complex(0, -1) * m));
        res.push_back(y(a, b).imag());
      }
    }
  }
}

enum class Mode { projection, ranks };

struct NewtonResult {
  ComplexMatrix rho;
  double residual;
  int iterations;
};

/// Gauss-Newton with the kernel blocks of rho (dimension N - m) and rho^P
/// (k lowest). Projection mode adds the image block with target 1/m, rank
/// mode a trace row.
NewtonResult newton(ComplexMatrix rho, const BipartiteDims& dims, Mode mode, int m, int k, int iters,
                    double damping, std::vector<double>& history) {
  const int n = dims.total();
  const HermitianBasis basis(n);
  double nr = INFINITY;
  int it = 0;
  for (; it < iters; ++it) {
    const Spectrum s = eig_hermitian(rho);
    const ComplexMatrix rp = partial_transpose(rho, dims);
    const Spectrum sp = eig_hermitian(rp);
    std::vector<RealVector> rows;
    std::vector<double> res;
    if (n - m > 0) append_block({s.eigenvectors.leftCols(n - m), false, 0.0}, rho, dims, basis, rows, res);
    if (mode == Mode::projection) {
      append_block({s.eigenvectors.rightCols(m), false, 1.0 / m}, rho, dims, basis, rows, res);
    } else {
      rows.push_back(basis.coords(ComplexMatrix::Identity(n, n)));
      res.push_back(rho.trace().real() - 1.0);
    }
    if (k > 0) append_block({sp.eigenvectors.leftCols(k), true, 0.0}, rp, dims, basis, rows, res);

    RealMatrix jac(static_cast<Eigen::Index>(rows.size()), n * n);
    RealVector rv(static_cast<Eigen::Index>(res.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      jac.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
      rv(static_cast<Eigen::Index>(i)) = res[i];
    }
    nr = rv.norm();
    history.push_back(nr);
    if (!std::isfinite(nr) || nr > 1.0 || nr < 1e-13) break;
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(jac);
    cod.setThreshold(Tolerances::pinv_cutoff);
    const RealVector step = -damping * cod.solve(rv);
    rho += basis.compose(step);
  }
  return {rho, nr, it};
}

ComplexMatrix random_start(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix rho = x * x.adjoint();
  return rho / rho.trace().real();
}

/// Keep the m largest eigenvalues (clipped at zero), or replace them by `level` when given.
ComplexMatrix truncate(const ComplexMatrix& h, int m, std::optional<double> level = std::nullopt) {
  const Spectrum s = eig_hermitian(h);
  const int n = static_cast<int>(h.rows());
  RealVector w = RealVector::Zero(n);
  for (int i = n - m; i < n; ++i) w(i) = level ? *level : std::max(0.0, s.eigenvalues(i));
  return s.eigenvectors * w.asDiagonal() * s.eigenvectors.adjoint();
}

ComplexMatrix clip_negative(const ComplexMatrix& h) {
  const Spectrum s = eig_hermitian(h);
  return s.eigenvectors * s.eigenvalues.cwiseMax(0.0).asDiagonal() * s.eigenvectors.adjoint();
}

bool full_local_ranks(const DensityMatrix& rho) {
  const RankProfile p = rank_profile(rho);
  return p.localA == rho.dims().nA() && p.localB == rho.dims().nB();
}

}  // namespace

SearchOutcome search_projection_ppt(const BipartiteDims& dims, int r, const SearchConfig& config) {
  const int n = dims.total();
  if (r <= 1 || r >= n) throw InputError("search_projection_ppt: need 1 < r < N");
  if (config.restarts < 1 || config.max_iter < 1 || !(config.damping > 0.0 && config.damping <= 1.0))
    throw InputError("search_projection_ppt: invalid config");
  std::mt19937_64 rng(config.seed);
  SearchOutcome out;
  int rejected_local = 0, rejected_image = 0, rejected_extremal = 0;
  for (int attempt = 0; attempt < config.restarts; ++attempt) {
    out.diagnostics["restarts_used"] = attempt + 1;
    ComplexMatrix rho = random_start(n, rng);
    int ap = 0;
    for (; ap < std::min(config.global_iters, config.max_iter); ++ap) {
      rho = truncate(rho, r, 1.0 / r);
      const Spectrum sp = eig_hermitian(partial_transpose(rho, dims));
      out.residual_history.push_back(std::max(0.0, -sp.eigenvalues(0)));
      if (sp.eigenvalues(0) > -1e-14) break;
      rho = partial_transpose(clip_negative(partial_transpose(rho, dims)), dims);
      rho /= rho.trace().real();
    }
    out.iterations += ap;
    int attempt_iters = ap;
    const ComplexMatrix rho0 = truncate(rho, r, 1.0 / r);
    const RealVector wp = eigenvalues_hermitian(partial_transpose(rho0, dims));
    const int k0 = static_cast<int>((wp.array() < 0.0).count());

    std::optional<ComplexMatrix> found;
    int found_k = 0;
    const int k_lo = config.rhoP_kernel >= 0 ? config.rhoP_kernel : k0;
    const int k_hi = config.rhoP_kernel >= 0 ? config.rhoP_kernel : n - r;
    for (int k = k_lo; k <= k_hi; ++k) {
      if (attempt_iters >= config.max_iter) break;
      NewtonResult nt = newton(rho0, dims, Mode::projection, r, k, config.newton_iters, config.damping,
                               out.residual_history);
      out.iterations += nt.iterations;
      attempt_iters += nt.iterations;
      if (!(nt.residual < config.tol_residual)) continue;
      const ComplexMatrix clean = truncate(nt.rho, r, 1.0 / r);
      const double mp = eigenvalues_hermitian(partial_transpose(clean, dims))(0);
      if (mp > Tolerances::density_min_eig) {
        found = clean;
        found_k = k;
        break;
      }
    }
    if (!found) continue;
    const DensityMatrix state = DensityMatrix::normalized(*found, dims);
    if (config.require_full_local_rank && !full_local_ranks(state)) {
      ++rejected_local;
      continue;
    }
    if (config.reject_image_product) {
      FinderConfig fc;
      fc.starts = config.image_check_starts;
      fc.stop_after = 1;
      fc.seed = config.seed ^ 0x5bd1e995ULL;
      if (!find_product_vectors(image_projector(state.matrix()).basis, dims, fc).vectors.empty()) {
        ++rejected_image;
        continue;
      }
    }
    if (config.require_extremal && !extremality_check(state).is_extremal) {
      ++rejected_extremal;
      continue;
    }
    out.status = SearchStatus::converged;
    out.state = state;
    out.diagnostics["active_k"] = found_k;
    out.diagnostics["rank_rhoP"] = rank_profile(state).rank_rhoP;
    out.diagnostics["min_eig_rhoP"] = eigenvalues_hermitian(state.partial_transpose().matrix())(0);
    out.diagnostics["residual"] = out.residual_history.back();
    break;
  }
  out.diagnostics["rejected_local_rank"] = rejected_local;
  out.diagnostics["rejected_image_product"] = rejected_image;
  out.diagnostics["rejected_not_extremal"] = rejected_extremal;
  return out;
}

namespace {

bool check_rank_result(const ComplexMatrix& rho, const BipartiteDims& dims, int m, int n) {
  const RealVector w = eigenvalues_hermitian(rho);
  const RealVector wp = eigenvalues_hermitian(partial_transpose(rho, dims));
  const double tol = -Tolerances::eigen_residual;
  return w(0) > tol && wp(0) > tol && numerical_rank(w) == m && numerical_rank(wp) == n;
}

void validate_ranks(const BipartiteDims& dims, int m, int n) {
  if (m < 1 || n < 1 || m > dims.total() || n > dims.total())
    throw InputError("rank search: ranks must lie in [1, N]");
}

}  // namespace

SearchOutcome refine_rank_ppt(const ComplexMatrix& start, const BipartiteDims& dims, int m, int n,
                              const SearchConfig& config) {
  validate_ranks(dims, m, n);
  if (start.rows() != dims.total() || start.cols() != dims.total())
    throw DimensionError("refine_rank_ppt: start has wrong shape");
  require_finite(start, "refine_rank_ppt");
  const int N = dims.total();
  SearchOutcome out;
  ComplexMatrix rho = HermitianMatrix::hermitian_part(start).matrix();
  for (int phase = 0; phase < 2; ++phase) {
    if (phase == 1) {
      for (int it = 0; it < config.global_iters; ++it) {
        rho = truncate(rho, m);
        rho = partial_transpose(truncate(partial_transpose(rho, dims), n), dims);
        rho /= rho.trace().real();
      }
      rho = truncate(rho, m);
      rho /= rho.trace().real();
      out.iterations += config.global_iters;
    }
    NewtonResult nt =
        newton(rho, dims, Mode::ranks, m, N - n, config.newton_iters, config.damping, out.residual_history);
    out.iterations += nt.iterations;
    if (nt.residual < config.tol_residual) {
      const ComplexMatrix h = HermitianMatrix::hermitian_part(nt.rho).matrix();
      if (check_rank_result(h, dims, m, n)) {
        out.status = SearchStatus::converged;
        out.state = DensityMatrix::normalized(h, dims);
        out.diagnostics["phase"] = phase;
        out.diagnostics["residual"] = nt.residual;
        return out;
      }
    }
  }
  return out;
}

SearchOutcome search_rank_ppt(const BipartiteDims& dims, int m, int n, const SearchConfig& config) {
  validate_ranks(dims, m, n);
  if (config.restarts < 1 || config.max_iter < 1 || !(config.damping > 0.0 && config.damping <= 1.0))
    throw InputError("search_rank_ppt: invalid config");
  const int N = dims.total();
  std::mt19937_64 rng(config.seed);
  SearchOutcome out;
  int rejected_local = 0;
  for (int attempt = 0; attempt < config.restarts; ++attempt) {
    out.diagnostics["restarts_used"] = attempt + 1;
    ComplexMatrix rho = random_start(N, rng);
    for (int it = 0; it < std::min(config.global_iters, config.max_iter); ++it) {
      rho = truncate(rho, m);
      rho = partial_transpose(truncate(partial_transpose(rho, dims), n), dims);
      rho /= rho.trace().real();
    }
    rho = truncate(rho, m);
    rho /= rho.trace().real();
    // Alternating projections land on the PPT boundary; full ranks need the interior.
    if (m == N && n == N) rho = 0.5 * rho + 0.5 * ComplexMatrix::Identity(N, N) / double(N);
    const int global_used = std::min(config.global_iters, config.max_iter);
    out.iterations += global_used;
    // max_iter bounds the whole attempt, as in the projection search
    const int newton_budget = std::min(config.newton_iters, config.max_iter - global_used);
    NewtonResult nt =
        newton(rho, dims, Mode::ranks, m, N - n, newton_budget, config.damping, out.residual_history);
    out.iterations += nt.iterations;
    if (!(nt.residual < config.tol_residual)) continue;
    const ComplexMatrix h = HermitianMatrix::hermitian_part(nt.rho).matrix();
    if (!check_rank_result(h, dims, m, n)) continue;
    DensityMatrix state = DensityMatrix::normalized(h, dims);
    if (config.require_full_local_rank && !full_local_ranks(state)) {
      ++rejected_local;
      continue;
    }
    out.status = SearchStatus::converged;
    out.state = std::move(state);
    out.diagnostics["residual"] = nt.residual;
    break;
  }
  out.diagnostics["rejected_local_rank"] = rejected_local;
  return out;
}

}  // namespace genupb
