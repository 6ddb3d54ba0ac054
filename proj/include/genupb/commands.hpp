#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "genupb/io.hpp"
#include "genupb/search.hpp"

namespace genupb::cli {

enum ExitCode : int { kSuccess = 0, kNonConvergence = 1, kInvalidInput = 2 };

/// Entry point shared by the genupb executable and the tests. argv[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// Reports behind analyze / dimension / verify. Deterministic for a given input.
io::Json analysis_report(const DensityMatrix& rho);
io::Json dimension_report(const DensityMatrix& rho);
io::Json verify_report(const DensityMatrix& rho);

struct BatchOptions {
  int nA = 3, nB = 3;
  int runs = 200;
  std::uint64_t seed = 1;
  int jobs = 1;
  int bins = 50;
  /// "search": seeded rank search followed by transform_to_projection;
  /// "ico": icosahedron state under a seeded random local unitary.
  std::string source = "search";
  int balance_steps = 30;
};

struct BatchResult {
  std::vector<io::Json> records;  // seed order
  std::vector<double> min_p;      // successful runs only, seed order
  int failures = 0;
  io::Histogram histogram;
  io::Json summary;
};

BatchResult run_batch(const BatchOptions& options);

/// One record for a projection or rank search with the given seed.
io::Json search_record(const BipartiteDims& dims, int rank, int rankP, bool projection, const SearchConfig& cfg,
                       std::optional<DensityMatrix>* state = nullptr);

}  // namespace genupb::cli
