#pragma once

#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "genupb/bipartite.hpp"

namespace genupb::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Raised for unreadable or malformed files; callers map it to exit code 2.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

// Doubles are written in shortest round-trip form, so write/read is bit-exact.
Json complex_matrix_to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const Json& j);
Json complex_vector_to_json(const ComplexVector& v);
ComplexVector complex_vector_from_json(const Json& j);

struct StateFile {
  DensityMatrix rho;
  Json metadata = Json::object();
};

Json state_to_json(const DensityMatrix& rho, const Json& metadata = Json::object());
StateFile state_from_json(const Json& j);

Json upb_to_json(const GeneralizedUPB& upb, const std::optional<std::vector<double>>& p = std::nullopt);
GeneralizedUPB upb_from_json(const Json& j, std::vector<double>* p = nullptr);

/// {"format_version", "kind":"transform", "S_A", "S_B"} as complex matrices.
Json transform_to_json(const ComplexMatrix& S_A, const ComplexMatrix& S_B);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
StateFile read_state(const std::filesystem::path& path);
void write_state(const std::filesystem::path& path, const DensityMatrix& rho, const Json& metadata = Json::object());

/// 'bins' uniform bins over [min, max] of the values; a degenerate range is
/// widened by 1e-9 on each side so every value lands in a bin.
struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<long long> counts;
};
Histogram make_histogram(const std::vector<double>& values, int bins = 50);
/// "# format_version: 1" then a bin_low,bin_high,count table.
std::string histogram_csv(const Histogram& h);

/// JSON-lines sink; append is serialized so concurrent producers can share it.
class RunLog {
 public:
  explicit RunLog(std::ostream& out) : out_(&out) {}
  void append(const Json& record);
 private:
  std::ostream* out_;
  std::mutex mu_;
};

}  // namespace genupb::io
