#include "doctest.h"

#include <random>

#include "genupb/icosahedron.hpp"
#include "genupb/search.hpp"

using namespace genupb;

namespace {

ComplexVector e(int n, int i) {
  ComplexVector v = ComplexVector::Zero(n);
  v(i) = 1.0;
  return v;
}

double phase_free_overlap(const ComplexVector& a, const ComplexVector& b) {
  return std::abs(a.normalized().dot(b.normalized()));
}

DensityMatrix random_state(const BipartiteDims& d, int rank, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix x(d.total(), rank);
  for (int i = 0; i < x.rows(); ++i)
    for (int k = 0; k < rank; ++k) x(i, k) = Complex(g(rng), g(rng));
  return DensityMatrix::normalized(x * x.adjoint(), d);
}

}  // namespace

TEST_CASE("finder on the icosahedron kernel") {
  const ProjectionFormState st = ico::build_state({});
  const BipartiteDims d(3, 3);
  const ComplexMatrix kernel = kernel_projector(st.rho.matrix()).basis;
  const FinderResult fr = find_product_vectors(kernel, d);
  REQUIRE(fr.vectors.size() == 6);
  const ComplexMatrix proj = kernel * kernel.adjoint();
  for (const auto& v : fr.vectors) {
    const ComplexVector psi = kron(v);
    CHECK((psi - proj * psi).norm() < 1e-8);
    double best = 0;
    for (const auto& m : st.upb.members()) best = std::max(best, phase_free_overlap(psi, kron(m)));
    CHECK(best > 1 - 1e-8);
  }
  CHECK_THROWS_AS(find_product_vectors(ComplexMatrix(9, 0), d), InputError);
}

TEST_CASE("finder on a one-dimensional product subspace") {
  const BipartiteDims d(3, 3);
  const ComplexMatrix sub = kron(e(3, 0), e(3, 0));
  const FinderResult fr = find_product_vectors(sub, d, {}, 1);
  REQUIRE(fr.vectors.size() == 1);
  CHECK(phase_free_overlap(kron(fr.vectors[0]), sub.col(0)) > 1 - 1e-10);
}

TEST_CASE("finder reports partial results") {
  const BipartiteDims d(3, 3);
  FinderConfig cfg;
  cfg.starts = 3;
  const ComplexMatrix kernel = kernel_projector(ico::build_state({}).rho.matrix()).basis;
  const FinderResult fr = find_product_vectors(kernel, d, cfg, 6);
  CHECK(fr.vectors.size() <= 6);
  if (fr.vectors.size() < 6) CHECK_FALSE(fr.warnings.empty());
}

TEST_CASE("unextendibility") {
  const BipartiteDims d(3, 3);
  CHECK(unextendibility_check(ico::build_state({}).upb));
  ico::IcoConfig pyr;
  pyr.lambda = ico::pyramid_lambda();
  const GeneralizedUPB full = ico::build_state(pyr).upb;
  const GeneralizedUPB five(d, {full.members().begin(), full.members().begin() + 5});
  CHECK(unextendibility_check(five));
  std::vector<ProductVector> diag;
  for (int i = 0; i < 3; ++i) diag.emplace_back(e(3, i), e(3, i));
  CHECK_FALSE(unextendibility_check(GeneralizedUPB(d, diag)));
}

TEST_CASE("conjugate UPB") {
  const GeneralizedUPB ico = ico::build_state({}).upb;
  const GeneralizedUPB c = conjugate_upb(ico);
  for (int k = 0; k < ico.size(); ++k) CHECK(c.members()[k].chi() == ico.members()[k].chi());
  const BipartiteDims d(3, 3);
  ComplexVector phi(3), chi(3);
  phi << 1, Complex(0, 1), 2;
  chi << Complex(1, -1), 0.5, Complex(0, 3);
  const GeneralizedUPB u(d, {ProductVector(phi, chi)});
  const GeneralizedUPB uc = conjugate_upb(u);
  CHECK(conjugate_upb(uc).members()[0].chi() == chi);
  const ComplexVector a = kron(u.members()[0]), b = kron(uc.members()[0]);
  CHECK((ComplexMatrix(b * b.adjoint()) - partial_transpose(ComplexMatrix(a * a.adjoint()), d)).norm() < 1e-14);
}

TEST_CASE("extract_p examples") {
  const ProjectionFormState st = ico::build_state({});
  const PFitReport f = extract_p(st.Q, st.upb, st.rho.dims());
  CHECK(f.residual < 1e-10);
  CHECK(f.unique);
  for (double p : f.p) CHECK(std::abs(p - 1.0 / 6) < 1e-10);
  CHECK(f.negative_count == 0);

  ico::IcoConfig pyr;
  pyr.lambda = ico::pyramid_lambda();
  const ProjectionFormState ps = ico::build_state(pyr);
  const PFitReport fp = extract_p(ps.Q, ps.upb, ps.rho.dims());
  for (int k = 0; k < 5; ++k) CHECK(std::abs(fp.p[static_cast<size_t>(k)] - 0.2) < 1e-8);
  CHECK(std::abs(fp.p[5]) < 1e-8);

  // duplicated member: dependent design matrix is flagged, minimum-norm split
  std::vector<ProductVector> dup = st.upb.members();
  dup.push_back(dup[0]);
  const PFitReport fd = extract_p(st.Q, GeneralizedUPB(st.rho.dims(), dup), st.rho.dims());
  CHECK_FALSE(fd.unique);
  CHECK(fd.residual < 1e-10);
  CHECK(fd.p[0] == doctest::Approx(fd.p[6]));
}

TEST_CASE("projection form verification") {
  const BipartiteDims d(3, 3);
  const ProjectionFormReport ico = verify_projection_form(ico::build_state({}).rho);
  CHECK(ico.is_proj_form);
  CHECK(ico.rhoP_is_proj);
  CHECK(ico.r == 4);
  CHECK(ico.purity == doctest::Approx(0.25));
  const ProjectionFormReport mm = verify_projection_form(DensityMatrix::maximally_mixed(d));
  CHECK(mm.is_proj_form);
  CHECK(mm.r == 9);

  SearchConfig cfg;
  cfg.seed = 3;
  const SearchOutcome so = search_rank_ppt(d, 4, 4, cfg);
  REQUIRE(so.state);
  CHECK_FALSE(verify_projection_form(*so.state).is_proj_form);
}

TEST_CASE("symmetry reports") {
  const SymmetryReport ico = symmetry_report(ico::build_state({}));
  CHECK(ico.symmetric);
  CHECK(ico.failures.empty());

  const BipartiteDims d(3, 3);
  SearchConfig cfg;
  cfg.seed = 5;
  const SearchOutcome so = search_projection_ppt(d, 4, cfg);
  REQUIRE(so.state);
  const ProjectionAnalysis pa = analyze_projection(*so.state);
  REQUIRE(pa.state);
  CHECK(symmetry_report(*pa.state).symmetric);
  CHECK(pa.kernel.vectors.size() == 6);
  CHECK(pa.span_dimension == 5);
  // no product vector in the image
  const ComplexMatrix image = image_projector(so.state->matrix()).basis;
  CHECK(find_product_vectors(image, d).vectors.empty());
}

TEST_CASE("3x4 rank-5 kernel holds 10 product vectors spanning 7 dimensions") {
  const BipartiteDims d(3, 4);
  SearchConfig cfg;
  cfg.seed = 2;
  const SearchOutcome so = search_projection_ppt(d, 5, cfg);
  REQUIRE(so.state);
  const ProjectionAnalysis pa = analyze_projection(*so.state);
  CHECK(pa.kernel.vectors.size() == 10);
  CHECK(pa.span_dimension == 7);
  REQUIRE(pa.state);
  CHECK(check_invariants(*pa.state).passes(1e-8));
}

TEST_CASE("trace inequality, rank ordering and equality bridge") {
  std::mt19937_64 rng(99);
  const BipartiteDims d(3, 3);
  for (int t = 0; t < 200; ++t) {
    const int r = 1 + t % 9;
    const DensityMatrix rho = random_state(d, r, rng);
    const int rank = rank_profile(rho).rank_rho;
    CHECK(rho.purity() >= 1.0 / rank - 1e-12);
  }
  // states proportional to projections
  std::vector<DensityMatrix> proj = {ico::build_state({}).rho, DensityMatrix::maximally_mixed(d)};
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix rho = random_state(d, 3 + t % 5, rng);
    const ComplexMatrix b = image_projector(rho.matrix()).basis;
    proj.push_back(DensityMatrix::normalized(b * b.adjoint(), d));
  }
  for (const auto& rho : proj) {
    const ProjectionFormReport rep = verify_projection_form(rho);
    REQUIRE(rep.is_proj_form);
    CHECK(rep.rank_rhoP >= rep.r);
    if (rep.rank_rhoP == rep.r) CHECK(rep.rhoP_idempotency < 1e-8);
  }
}
