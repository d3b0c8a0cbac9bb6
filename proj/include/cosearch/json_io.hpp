#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "cosearch/bundle_catalog.hpp"
#include "cosearch/codesign_search.hpp"
#include "cosearch/device_model.hpp"
#include "cosearch/errors.hpp"
#include "cosearch/gpu_occupancy.hpp"
#include "cosearch/perf_estimator.hpp"

namespace cosearch {

using Json = nlohmann::ordered_json;

/// Parses JSON text; syntax errors become ParseError carrying the line.
Json parse_json(std::string_view text);

inline std::string join_path(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

template <class T>
T get_as(const Json& v, const std::string& field) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ParseError("expected a boolean", 0, field);
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ParseError("expected an integer", 0, field);
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ParseError("expected a number", 0, field);
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ParseError("expected a string", 0, field);
  }
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what(), 0, field);
  }
}

template <class T>
T require(const Json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("expected an object", 0, path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field", 0, join_path(path, key));
  return get_as<T>(*it, join_path(path, key));
}

template <class T>
T field_or(const Json& obj, std::string_view key, const std::string& path, T fallback) {
  if (!obj.is_object()) throw ParseError("expected an object", 0, path);
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return get_as<T>(*it, join_path(path, key));
}

// Device model
void to_json(Json& j, const DspMode& m);
void to_json(Json& j, const BramResource& r);
void to_json(Json& j, const DeviceSpec& d);
void to_json(Json& j, const PackResult& p);
DeviceSpec device_from_json(const Json& j);
PackResult pack_result_from_json(const Json& j, const std::string& path = "");

// Bundles and architectures
void to_json(Json& j, const IpTemplate& ip);
void to_json(Json& j, const Bundle& b);
void to_json(Json& j, const ArchFrame& f);
IpTemplate ip_from_json(const Json& j, const std::string& path);
Bundle bundle_from_json(const Json& j, const std::string& path);
std::vector<Bundle> catalog_from_json(const Json& j);

/// {"bundle": id or object, "reps", "channels", "downsample_after",
///  "input_shape": [H, W, C], "frame"?}. Emitted archs always inline the bundle.
Json arch_to_json(const DnnArch& arch, bool with_layers = false);
DnnArch arch_from_json(const Json& j, const std::vector<Bundle>& catalog,
                       const std::string& path = "");

// Estimator
void to_json(Json& j, const AccelConfig& c);
AccelConfig accel_config_from_json(const Json& j, const std::string& path = "");
Json report_to_json(const EstimateReport& r, bool with_layers = true);
EstimateReport report_from_json(const Json& j, const std::string& path = "");
void to_json(Json& j, const Violation& v);
Json verdict_to_json(const Verdict& v);

// Search
using DeviceResolver = std::function<DeviceSpec(const std::string&)>;

ImplementationOptions impl_options_from_json(const Json& j, const std::string& path,
                                             ImplementationOptions base);
SearchConfig search_config_from_json(const Json& j, const DeviceResolver& resolve_device,
                                     const std::vector<Bundle>& catalog);
BundleTemplate bundle_template_from_json(const Json& j);
Json candidate_to_json(const Candidate& c);
Candidate candidate_from_json(const Json& j, const std::string& path);
Json search_result_to_json(const SearchResult& r);
SearchResult search_result_from_json(const Json& j);
Json bundle_selection_to_json(const BundleSelection& s);

// GPU
void to_json(Json& j, const GpuArchParams& a);
void to_json(Json& j, const GpuKernelParams& k);
GpuArchParams gpu_arch_from_json(const Json& j, const std::string& path = "");
GpuKernelParams gpu_kernel_from_json(const Json& j, const std::string& path = "");
Json occupancy_to_json(const OccupancyReport& r);
OccupancyReport occupancy_from_json(const Json& j, const std::string& path = "");

}  // namespace cosearch
