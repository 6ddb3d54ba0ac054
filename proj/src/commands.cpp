#include "genupb/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include "CLI11.hpp"

#include "genupb/geometry.hpp"
#include "genupb/icosahedron.hpp"

namespace genupb::cli {

using io::Json;

namespace {

Json json_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json ranks_json(const RankProfile& r) {
  return {{"rank_rho", r.rank_rho}, {"rank_rhoP", r.rank_rhoP}, {"local_A", r.localA}, {"local_B", r.localB}};
}

Json fit_json(const PFitReport& f) {
  const double mn = f.p.empty() ? NAN : *std::min_element(f.p.begin(), f.p.end());
  return {{"p", f.p},
          {"residual", f.residual},
          {"negative_count", f.negative_count},
          {"min_p", json_or_null(mn)},
          {"unique", f.unique}};
}

Json invariants_json(const ProjectionInvariants& inv) {
  return {{"idempotency", inv.idempotency},
          {"decomposition", inv.decomposition},
          {"rho_relation", inv.rho_relation},
          {"p_sum_error", inv.p_sum_error},
          {"passes", inv.passes(1e-8)}};
}

Json history_tail(const std::vector<double>& h) {
  return h.empty() ? Json(nullptr) : Json(h.back());
}

ComplexMatrix random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) z(i, k) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR();
  for (int k = 0; k < n; ++k) q.col(k) *= std::polar(1.0, std::arg(r(k, k)));
  return q;
}

// Runs f(i) for i in [0, n) on up to 'jobs' threads.
template <class F>
void parallel_for(int n, int jobs, F&& f) {
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) f(i);
  };
  const int t = std::clamp(jobs, 1, std::max(1, n));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// One batch run, independent of every other run.
Json batch_run(const BatchOptions& o, std::uint64_t seed, double* min_p) {
  const BipartiteDims dims(o.nA, o.nB);
  Json rec;
  rec["command"] = "batch";
  rec["source"] = o.source;
  rec["dims"] = {o.nA, o.nB};
  rec["seed"] = seed;
  std::optional<ProjectionFormState> state;
  if (o.source == "ico") {
    if (o.nA != 3 || o.nB != 3) throw InputError("batch --source ico needs --dims 3 3");
    const ProjectionFormState ico = ico::build_state({});
    std::mt19937_64 rng(seed);
    const ComplexMatrix ua = random_unitary(3, rng), ub = random_unitary(3, rng);
    const DensityMatrix rho = apply_product_transform(ico.rho, ua, ub);
    ProjectionAnalysis pa = analyze_projection(rho);
    rec["status"] = pa.state ? "converged" : "non_converged";
    state = std::move(pa.state);
  } else {
    SearchConfig sc;
    sc.seed = seed;
    const int r = expected_rank(dims);
    const SearchOutcome so = search_rank_ppt(dims, r, r, sc);
    rec["search_status"] = to_string(so.status);
    if (!so.state) {
      rec["status"] = to_string(so.status);
      return rec;
    }
    TransformSolveConfig tc;
    tc.seed = seed;
    tc.balance_steps = o.balance_steps;
    const TransformResult tr = transform_to_projection(*so.state, tc);
    rec["status"] = to_string(tr.status);
    rec["iterations"] = tr.iterations;
    rec["residual"] = history_tail(tr.residual_history);
    rec["det"] = history_tail(tr.det_history);
    state = tr.state;
  }
  if (!state) return rec;
  const ProjectionInvariants inv = check_invariants(*state);
  rec["invariants"] = invariants_json(inv);
  rec["p"] = state->p;
  if (!inv.passes(1e-8)) {
    rec["status"] = "invariant_failure";
    return rec;
  }
  *min_p = *std::min_element(state->p.begin(), state->p.end());
  rec["min_p"] = *min_p;
  return rec;
}

int report_error(std::ostream& err, const std::exception& e, int code) {
  err << "genupb: " << e.what() << "\n";
  return code;
}

}  // namespace

Json analysis_report(const DensityMatrix& rho) {
  const BipartiteDims& dims = rho.dims();
  Json j;
  j["format_version"] = io::kFormatVersion;
  j["dims"] = {dims.nA(), dims.nB()};
  const RankProfile ranks = rank_profile(rho);
  j["ranks"] = ranks_json(ranks);
  const PptResult ppt = is_ppt(rho);
  j["ppt"] = {{"is_ppt", ppt.is_ppt}, {"min_eigenvalue_rhoP", ppt.min_eigenvalue}};
  j["purity"] = rho.purity();
  const ProjectionFormReport pf = verify_projection_form(rho);
  j["projection_form"] = {{"is_proj_form", pf.is_proj_form},
                          {"r", pf.r},
                          {"idempotency", pf.idempotency},
                          {"rhoP_is_proj", pf.rhoP_is_proj},
                          {"rhoP_idempotency", pf.rhoP_idempotency}};
  const int lowest = expected_rank(dims);
  Json kernel;
  kernel["lowest_rank"] = lowest;
  if (ranks.rank_rho == lowest) {
    const UpbCounts c = upb_counts(dims);
    kernel["expected_product_vectors"] = c.p;
    kernel["expected_span"] = c.d;
  }
  const ProjectionAnalysis pa = analyze_projection(rho);
  kernel["product_vectors"] = static_cast<int>(pa.kernel.vectors.size());
  kernel["span"] = pa.span_dimension;
  kernel["finder_starts"] = pa.kernel.starts_used;
  kernel["warnings"] = pa.kernel.warnings;
  j["kernel"] = std::move(kernel);
  j["p_fit"] = pa.fit ? fit_json(*pa.fit) : Json(nullptr);
  if (pa.state) {
    const SymmetryReport sr = symmetry_report(*pa.state);
    j["symmetry"] = {{"symmetric", sr.symmetric}, {"qp_idempotency", sr.qp_idempotency}, {"p_mismatch", sr.p_mismatch}};
  } else {
    j["symmetry"] = nullptr;
  }
  return j;
}

Json dimension_report(const DensityMatrix& rho) {
  Json j;
  j["format_version"] = io::kFormatVersion;
  j["dims"] = {rho.dims().nA(), rho.dims().nB()};
  const DimensionReport d = rank_surface_dimension(rho);
  j["ranks"] = ranks_json(d.ranks);
  j["dimension"] = {{"unit_eigen_count", d.unit_eigen_count},
                    {"surface_dimension", d.surface_dimension},
                    {"eq_class_dimension", d.eq_class_dimension},
                    {"spectral_gap", d.spectral_gap},
                    {"trusted", d.trusted},
                    {"warnings", d.warnings}};
  const ExtremalityCertificate ex = extremality_check(rho);
  j["extremality"] = {{"is_extremal", ex.is_extremal},
                      {"solution_dim", ex.solution_dim},
                      {"spectral_gap", ex.spectral_gap},
                      {"warnings", ex.warnings}};
  return j;
}

Json verify_report(const DensityMatrix& rho) {
  Json j = analysis_report(rho);
  const Json d = dimension_report(rho);
  j["dimension"] = d["dimension"];
  j["extremality"] = d["extremality"];
  return j;
}

Json search_record(const BipartiteDims& dims, int rank, int rankP, bool projection, const SearchConfig& cfg,
                   std::optional<DensityMatrix>* state) {
  const SearchOutcome so =
      projection ? search_projection_ppt(dims, rank, cfg) : search_rank_ppt(dims, rank, rankP, cfg);
  Json rec;
  rec["command"] = "search";
  rec["config"] = {{"dims", {dims.nA(), dims.nB()}},
                   {"rank", rank},
                   {"projection", projection},
                   {"max_iter", cfg.max_iter},
                   {"restarts", cfg.restarts}};
  if (!projection) rec["config"]["rankP"] = rankP;
  rec["seed"] = cfg.seed;
  rec["status"] = to_string(so.status);
  rec["iterations"] = so.iterations;
  rec["residual"] = history_tail(so.residual_history);
  Json diag = Json::object();
  for (const auto& [k, v] : so.diagnostics) diag[k] = json_or_null(v);
  rec["diagnostics"] = std::move(diag);
  if (so.state) {
    const DensityMatrix& rho = *so.state;
    rec["ranks"] = ranks_json(rank_profile(rho));
    const ProjectionFormReport pf = verify_projection_form(rho);
    rec["projection_form"] = {{"is_proj_form", pf.is_proj_form}, {"rhoP_is_proj", pf.rhoP_is_proj}};
    if (projection && rank == expected_rank(dims)) {
      const ProjectionAnalysis pa = analyze_projection(rho);
      rec["product_vectors"] = static_cast<int>(pa.kernel.vectors.size());
      if (pa.fit) {
        rec["p_fit"] = fit_json(*pa.fit);
        rec["negative_p"] = pa.fit->negative_count > 0;
      }
    }
  }
  if (state) *state = so.state;
  return rec;
}

BatchResult run_batch(const BatchOptions& o) {
  if (o.runs < 1) throw InputError("batch: --runs must be >= 1");
  if (o.jobs < 1) throw InputError("batch: --jobs must be >= 1");
  if (o.source != "search" && o.source != "ico") throw InputError("batch: --source must be search or ico");
  (void)BipartiteDims(o.nA, o.nB);
  std::vector<Json> records(static_cast<size_t>(o.runs));
  std::vector<double> mins(static_cast<size_t>(o.runs), NAN);
  parallel_for(o.runs, o.jobs, [&](int i) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(i);
    try {
      records[static_cast<size_t>(i)] = batch_run(o, seed, &mins[static_cast<size_t>(i)]);
    } catch (const std::exception& e) {
      records[static_cast<size_t>(i)] = {{"command", "batch"}, {"seed", seed}, {"status", "error"}, {"error", e.what()}};
    }
  });
  BatchResult out;
  out.records = std::move(records);
  for (double m : mins) {
    if (std::isfinite(m)) {
      out.min_p.push_back(m);
    } else {
      ++out.failures;
    }
  }
  out.histogram = io::make_histogram(out.min_p, o.bins);
  int negative = 0, inside = 0;
  for (double m : out.min_p) {
    if (m < 0.0) ++negative;
    if (m > 0.0 && m < 1.0 / 6.0 - 1e-9) ++inside;
  }
  Json s;
  s["format_version"] = io::kFormatVersion;
  s["command"] = "batch";
  s["source"] = o.source;
  s["dims"] = {o.nA, o.nB};
  s["runs"] = o.runs;
  s["seed"] = o.seed;
  s["successes"] = static_cast<int>(out.min_p.size());
  s["failures"] = out.failures;
  if (!out.min_p.empty()) {
    s["min_p_low"] = *std::min_element(out.min_p.begin(), out.min_p.end());
    s["min_p_high"] = *std::max_element(out.min_p.begin(), out.min_p.end());
  }
  s["negative"] = negative;
  s["strictly_inside_0_sixth"] = inside;
  out.summary = std::move(s);
  return out;
}

namespace {

struct Options {
  double lambda = 1.0;
  std::string out, in, upb, records, histogram, source = "search";
  std::vector<int> dims{3, 3};
  int rank = 4, rankP = -1, runs = 1, max_iter = 10000, restarts = 100, jobs = 1, bins = 50;
  int balance = 30, max_outer = 500, batch_runs = 200;
  bool projection = false;
  std::uint64_t seed = 1;
};

BipartiteDims dims_of(const Options& o) {
  if (o.dims.size() != 2) throw InputError("--dims takes two integers");
  return BipartiteDims(o.dims[0], o.dims[1]);
}

DensityMatrix load(const std::string& path) { return io::read_state(path).rho; }

int cmd_ico(const Options& o, std::ostream& out) {
  ico::IcoConfig cfg;
  cfg.lambda = o.lambda;
  const ProjectionFormState st = ico::build_state(cfg);
  const auto closed = ico::p_profile(o.lambda);
  Json meta = {{"generator", "ico"}, {"lambda", o.lambda}};
  Json rep;
  rep["format_version"] = io::kFormatVersion;
  rep["command"] = "ico";
  rep["lambda"] = o.lambda;
  rep["p"] = st.p;
  rep["p_profile"] = std::vector<double>(closed.begin(), closed.end());
  rep["invariants"] = invariants_json(check_invariants(st));
  if (!o.out.empty()) {
    io::write_state(o.out + ".state.json", st.rho, meta);
    io::write_json(o.out + ".upb.json", io::upb_to_json(st.upb, st.p));
    rep["files"] = {o.out + ".state.json", o.out + ".upb.json"};
  }
  out << rep.dump(1) << "\n";
  return kSuccess;
}

int cmd_search(const Options& o, std::ostream& out) {
  const BipartiteDims dims = dims_of(o);
  if (o.runs < 1) throw InputError("--runs must be >= 1");
  std::ofstream file;
  if (!o.records.empty()) {
    file.open(o.records, std::ios::app);
    if (!file) throw InputError("cannot open " + o.records);
  }
  io::RunLog log(o.records.empty() ? out : file);
  int converged = 0;
  for (int i = 0; i < o.runs; ++i) {
    SearchConfig cfg;
    cfg.seed = o.seed + static_cast<std::uint64_t>(i);
    cfg.max_iter = o.max_iter;
    cfg.restarts = o.restarts;
    std::optional<DensityMatrix> state;
    Json rec = search_record(dims, o.rank, o.rankP < 0 ? o.rank : o.rankP, o.projection, cfg, &state);
    if (state) {
      ++converged;
      if (!o.out.empty()) {
        const std::string path = o.out + "/search_" + dims.str() + "_r" + std::to_string(o.rank) + "_seed" +
                                 std::to_string(cfg.seed) + ".json";
        io::write_state(path, *state, {{"generator", "search"}, {"seed", cfg.seed}, {"projection", o.projection}});
        rec["file"] = path;
      }
    }
    log.append(rec);
  }
  return converged > 0 ? kSuccess : kNonConvergence;
}

int cmd_transform(const Options& o, std::ostream& out) {
  const DensityMatrix rho0 = load(o.in);
  std::optional<GeneralizedUPB> kernel;
  if (!o.upb.empty()) kernel = io::upb_from_json(io::read_json(o.upb));
  TransformSolveConfig cfg;
  cfg.seed = o.seed;
  cfg.balance_steps = o.balance;
  cfg.max_outer = o.max_outer;
  const TransformResult tr = transform_to_projection(rho0, cfg, kernel);
  Json rec;
  rec["format_version"] = io::kFormatVersion;
  rec["command"] = "transform";
  rec["input"] = o.in;
  rec["seed"] = o.seed;
  rec["status"] = to_string(tr.status);
  rec["iterations"] = tr.iterations;
  rec["residual"] = history_tail(tr.residual_history);
  rec["det"] = history_tail(tr.det_history);
  rec["balance_moves"] = tr.balance_moves;
  rec["direct_steps"] = tr.direct_steps;
  rec["warnings"] = tr.warnings;
  if (tr.state) {
    rec["p"] = tr.state->p;
    rec["invariants"] = invariants_json(check_invariants(*tr.state));
    if (!o.out.empty()) {
      io::write_state(o.out + ".state.json", tr.state->rho, {{"generator", "transform"}, {"seed", o.seed}, {"input", o.in}});
      io::write_json(o.out + ".upb.json", io::upb_to_json(tr.state->upb, tr.state->p));
      io::write_json(o.out + ".S.json", io::transform_to_json(tr.S_A.matrix(), tr.S_B.matrix()));
      rec["files"] = {o.out + ".state.json", o.out + ".upb.json", o.out + ".S.json"};
    }
  }
  out << rec.dump(1) << "\n";
  return tr.status == SearchStatus::converged && tr.state ? kSuccess : kNonConvergence;
}

int cmd_batch(const Options& o, std::ostream& out) {
  const BipartiteDims dims = dims_of(o);
  BatchOptions b;
  b.nA = dims.nA();
  b.nB = dims.nB();
  b.runs = o.batch_runs;
  b.seed = o.seed;
  b.jobs = o.jobs;
  b.bins = o.bins;
  b.source = o.source;
  b.balance_steps = o.balance;
  BatchResult r = run_batch(b);
  if (!o.records.empty()) {
    std::ofstream file(o.records, std::ios::app);
    if (!file) throw InputError("cannot open " + o.records);
    io::RunLog log(file);
    for (const auto& rec : r.records) log.append(rec);
  }
  if (!o.histogram.empty()) {
    std::ofstream file(o.histogram);
    if (!file) throw InputError("cannot open " + o.histogram);
    file << io::histogram_csv(r.histogram);
    r.summary["histogram"] = o.histogram;
  }
  out << r.summary.dump(1) << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-rank extremal PPT states from generalized unextendible product bases"};
  app.require_subcommand(1);
  Options o;

  auto* ico = app.add_subcommand("ico", "Icosahedron state for a stretch lambda");
  ico->add_option("--lambda", o.lambda, "Stretch along the first axis (> 0)");
  ico->add_option("--out", o.out, "Output prefix for .state.json and .upb.json");

  auto* search = app.add_subcommand("search", "Numerical PPT search, one JSON record per run");
  search->add_option("--dims", o.dims, "Subsystem dimensions A B")->expected(2);
  search->add_option("--rank", o.rank, "Rank of rho");
  search->add_option("--rankP", o.rankP, "Rank of rho^P (rank search only; default --rank)");
  search->add_flag("--projection", o.projection, "Search for rho proportional to a projection");
  search->add_option("--seed", o.seed, "Seed of the first run; run i uses seed + i");
  search->add_option("--runs", o.runs, "Number of runs");
  search->add_option("--max-iter", o.max_iter, "Iteration budget per attempt");
  search->add_option("--restarts", o.restarts, "Attempts per run");
  search->add_option("--out", o.out, "Directory for converged StateFiles");
  search->add_option("--records", o.records, "Append records to this JSONL file instead of stdout");

  auto* transform = app.add_subcommand("transform", "Product transformation to projection form");
  transform->add_option("--in", o.in, "Input StateFile")->required();
  transform->add_option("--upb", o.upb, "Optional UPB file for the kernel of the input");
  transform->add_option("--seed", o.seed, "Seed for the starting point");
  transform->add_option("--balance", o.balance, "Balancing moves after convergence");
  transform->add_option("--max-outer", o.max_outer, "Outer iteration limit");
  transform->add_option("--out", o.out, "Output prefix for .state.json, .upb.json, .S.json");

  auto* analyze = app.add_subcommand("analyze", "Ranks, PPT, projection form, kernel UPB and p-fit");
  analyze->add_option("--in", o.in, "Input StateFile")->required();
  auto* dimension = app.add_subcommand("dimension", "Rank-surface dimension and extremality");
  dimension->add_option("--in", o.in, "Input StateFile")->required();
  auto* verify = app.add_subcommand("verify", "analyze and dimension combined");
  verify->add_option("--in", o.in, "Input StateFile")->required();

  auto* batch = app.add_subcommand("batch", "Seeded pipelines with a histogram of the smallest p_k");
  batch->add_option("--dims", o.dims, "Subsystem dimensions A B")->expected(2);
  batch->add_option("--runs", o.batch_runs, "Number of runs");
  batch->add_option("--seed", o.seed, "Seed of the first run; run i uses seed + i");
  batch->add_option("--jobs", o.jobs, "Worker threads");
  batch->add_option("--bins", o.bins, "Histogram bins");
  batch->add_option("--source", o.source, "search or ico")->check(CLI::IsMember({"search", "ico"}));
  batch->add_option("--balance", o.balance, "Balancing moves in each transform");
  batch->add_option("--histogram", o.histogram, "CSV output");
  batch->add_option("--records", o.records, "Append records to this JSONL file");

  // CLI11 consumes a reversed argument list without the program name.
  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "genupb: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    if (*ico) return cmd_ico(o, out);
    if (*search) return cmd_search(o, out);
    if (*transform) return cmd_transform(o, out);
    if (*analyze) {
      out << analysis_report(load(o.in)).dump(1) << "\n";
      return kSuccess;
    }
    if (*dimension) {
      out << dimension_report(load(o.in)).dump(1) << "\n";
      return kSuccess;
    }
    if (*verify) {
      out << verify_report(load(o.in)).dump(1) << "\n";
      return kSuccess;
    }
    if (*batch) return cmd_batch(o, out);
  } catch (const InputError& e) {
    return report_error(err, e, kInvalidInput);
  } catch (const std::exception& e) {
    return report_error(err, e, kNonConvergence);
  }
  return kInvalidInput;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace genupb::cli
