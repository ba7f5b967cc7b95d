#pragma once

#include <string>

#include <json.hpp>

#include "igtk/correction.hpp"
#include "igtk/expectation.hpp"
#include "igtk/geometry.hpp"
#include "igtk/immersion.hpp"
#include "igtk/mc_harness.hpp"
#include "igtk/singular.hpp"

namespace igtk {

using nlohmann::json;

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// FNV-1a hash of a canonical config string, hex-encoded.
std::string config_hash(const std::string& canonical);

// Standard document envelope: {"version", "config_hash", "seed"} + payload.
json document(const std::string& canonical_config, std::uint64_t seed);

json to_json(const Eigen::VectorXd& v);
json to_json(const Eigen::MatrixXd& m);  // flat row-major + dims
json to_json(const Tensor3& t);
json to_json(const Tensor4& t);
json to_json(const MomentTable& t);
json to_json(const GeometrySnapshot& s);
json to_json(const ImmersionReport& r);
json to_json(const NormalChart& c);
json to_json(const CorrectionReport& r);
json to_json(const SimulationResult& r);
json to_json(const FitRecord& f);
json to_json(const SingularReport& r);
json to_json(const NormalCrossingSpec& s);

NormalCrossingSpec spec_from_json(const json& j);

// CSV emitters (full round-trip precision via format_double).
std::string simulation_csv(const SimulationResult& r);
std::string singular_csv(const SingularReport& r);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace igtk
