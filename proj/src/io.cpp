#include "genupb/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace genupb::io {

namespace {

Complex entry(const Json& e) {
  if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
    throw FormatError("expected [re, im] pair");
  return {e[0].get<double>(), e[1].get<double>()};
}

void require_kind(const Json& j, const char* kind) {
  if (!j.is_object()) throw FormatError(std::string(kind) + " file: top level must be an object");
  if (!j.contains("format_version") || j["format_version"] != kFormatVersion)
    throw FormatError(std::string(kind) + " file: unsupported or missing format_version");
  if (j.contains("kind") && j["kind"] != kind)
    throw FormatError(std::string("expected kind '") + kind + "', got " + j["kind"].dump());
}

BipartiteDims read_dims(const Json& j) {
  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 2)
    throw FormatError("dims must be [nA, nB]");
  try {
    return BipartiteDims(j["dims"][0].get<int>(), j["dims"][1].get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dims: ") + e.what());
  }
}

}  // namespace

Json complex_matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix complex_matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw FormatError("matrix must be a list of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto c = static_cast<Eigen::Index>(j[0].size());
  ComplexMatrix m(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) throw FormatError("ragged matrix rows");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = entry(row[static_cast<size_t>(k)]);
  }
  return m;
}

Json complex_vector_to_json(const ComplexVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

ComplexVector complex_vector_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw FormatError("vector must be a non-empty list of [re, im]");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = entry(j[i]);
  return v;
}

Json state_to_json(const DensityMatrix& rho, const Json& metadata) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "state";
  j["dims"] = {rho.dims().nA(), rho.dims().nB()};
  j["matrix"] = complex_matrix_to_json(rho.matrix());
  j["metadata"] = metadata.is_null() ? Json::object() : metadata;
  return j;
}

StateFile state_from_json(const Json& j) {
  require_kind(j, "state");
  const BipartiteDims dims = read_dims(j);
  if (!j.contains("matrix")) throw FormatError("state file: missing matrix");
  const ComplexMatrix m = complex_matrix_from_json(j["matrix"]);
  if (m.rows() != dims.total() || m.cols() != dims.total())
    throw FormatError("state file: matrix is not " + std::to_string(dims.total()) + "x" + std::to_string(dims.total()));
  // The remaining checks (hermiticity, trace, positivity) are DensityMatrix's.
  StateFile out{DensityMatrix(HermitianMatrix(m), dims), j.value("metadata", Json::object())};
  return out;
}

Json upb_to_json(const GeneralizedUPB& upb, const std::optional<std::vector<double>>& p) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "upb";
  j["dims"] = {upb.dims().nA(), upb.dims().nB()};
  Json members = Json::array();
  for (const auto& m : upb.members())
    members.push_back({{"phi", complex_vector_to_json(m.phi())}, {"chi", complex_vector_to_json(m.chi())}});
  j["members"] = std::move(members);
  if (p) j["p"] = *p;
  return j;
}

GeneralizedUPB upb_from_json(const Json& j, std::vector<double>* p) {
  require_kind(j, "upb");
  const BipartiteDims dims = read_dims(j);
  if (!j.contains("members") || !j["members"].is_array()) throw FormatError("upb file: missing members");
  std::vector<ProductVector> members;
  for (const auto& m : j["members"]) {
    if (!m.contains("phi") || !m.contains("chi")) throw FormatError("upb member needs phi and chi");
    members.emplace_back(complex_vector_from_json(m["phi"]), complex_vector_from_json(m["chi"]));
  }
  if (p) {
    p->clear();
    if (j.contains("p")) *p = j["p"].get<std::vector<double>>();
  }
  return GeneralizedUPB(dims, std::move(members));
}

Json transform_to_json(const ComplexMatrix& S_A, const ComplexMatrix& S_B) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "transform";
  j["S_A"] = complex_matrix_to_json(S_A);
  j["S_B"] = complex_matrix_to_json(S_B);
  return j;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(1) << "\n";
}

StateFile read_state(const std::filesystem::path& path) {
  const Json j = read_json(path);
  try {
    return state_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_state(const std::filesystem::path& path, const DensityMatrix& rho, const Json& metadata) {
  write_json(path, state_to_json(rho, metadata));
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw InputError("make_histogram: bins must be >= 1");
  Histogram h;
  h.counts.assign(static_cast<size_t>(bins), 0);
  double lo = 0.0, hi = 1.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw InputError("make_histogram: non-finite value");
  }
  if (!(hi > lo)) {
    lo -= 1e-9;
    hi += 1e-9;
  }
  const double w = (hi - lo) / bins;
  for (int k = 0; k <= bins; ++k) h.edges.push_back(k == bins ? hi : lo + k * w);
  for (double v : values) {
    int k = static_cast<int>((v - lo) / w);
    k = std::clamp(k, 0, bins - 1);
    ++h.counts[static_cast<size_t>(k)];
  }
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out.precision(17);
  out << "# format_version: " << kFormatVersion << "\n";
  out << "bin_low,bin_high,count\n";
  for (size_t k = 0; k < h.counts.size(); ++k) out << h.edges[k] << "," << h.edges[k + 1] << "," << h.counts[k] << "\n";
  return out.str();
}

void RunLog::append(const Json& record) {
  const std::string line = record.dump();
  std::lock_guard<std::mutex> lock(mu_);
  *out_ << line << "\n";
  out_->flush();
}

}  // namespace genupb::io
