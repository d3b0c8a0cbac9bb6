#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosearch/bundle_catalog.hpp"
#include "cosearch/device_model.hpp"
#include "cosearch/perf_estimator.hpp"
#include "cosearch/quality_proxy.hpp"

namespace cosearch {

// ---------------------------------------------------------------------------
// Implementation side: pick an AccelConfig for a given architecture.

struct ImplementationOptions {
  int tile_height = 32;
  int tile_width = 32;
  bool double_buffer = true;
  std::int64_t layer_overhead_cycles = 0;

  bool operator==(const ImplementationOptions&) const = default;
};

/// Splits `budget` DSPs across the DSP-using IP kinds of `arch`: each kind gets
/// one DSP plus a share of the rest proportional to its packed MAC demand.
/// Every kind's share is non-decreasing in `budget`.
AccelConfig proportional_config(const DnnArch& arch, const DeviceSpec& device,
                                std::int64_t budget, const ImplementationOptions& opts);

struct FitResult {
  AccelConfig cfg;
  EstimateReport report;
  Verdict verdict;
};

/// Smallest proportional DSP budget that meets target_fps. When even the full
/// device misses the target, returns the full-budget design with its
/// violations.
FitResult fit_implementation(const DnnArch& arch, const DeviceSpec& device, double target_fps,
                             const ImplementationOptions& opts);

// ---------------------------------------------------------------------------
// Bundle selection over a fixed template network.

struct BundleTemplate {
  int reps = 3;
  int channels = 64;
  Shape input_shape{160, 160, 3};
  std::vector<int> downsample_after{0, 1};
  double target_fps = 30.0;
  ImplementationOptions impl;
  double dsp_weight = 0.5;
  double bram_weight = 0.5;
  std::optional<PackQuery> precision;
};

struct BundlePoint {
  std::string bundle_id;
  double cost = 0.0;
  double score = 0.0;
  AccelConfig cfg;
  EstimateReport report;
};

struct BundleSelection {
  std::vector<BundlePoint> evaluated;  // catalog order, excluded bundles omitted
  std::vector<BundlePoint> selected;   // Pareto frontier, best score first
  std::vector<std::string> diagnostics;
};

/// Resource cost = dsp_weight * DSP fraction + bram_weight * BRAM fraction.
double resource_cost(const EstimateReport& report, const DeviceSpec& device, double dsp_weight,
                     double bram_weight);

BundleSelection select_bundles(const std::vector<Bundle>& catalog, const QualityProxy& proxy,
                               const DeviceSpec& device, const BundleTemplate& tmpl);

// ---------------------------------------------------------------------------
// Stochastic coordinate descent over the architecture.

enum class CoordinateGroup { reps, downsample, channels };
enum class Objective { proxy_score, score_then_fps };
enum class GroupSelection { uniform, round_robin };

std::string_view to_string(CoordinateGroup g);
std::string_view to_string(Objective o);
std::string_view to_string(GroupSelection g);
CoordinateGroup coordinate_group_from_string(std::string_view s);
Objective objective_from_string(std::string_view s);
GroupSelection group_selection_from_string(std::string_view s);

struct Bounds {
  int min = 0;
  int max = 0;

  bool operator==(const Bounds&) const = default;
};

struct SearchConfig {
  DeviceSpec device;
  std::vector<Bundle> bundles;
  double target_fps = 30.0;
  Shape input_shape{224, 224, 3};
  std::uint64_t seed = 1;
  int max_iters = 200;
  int proposals_per_iter = 8;
  Bounds channel_bounds{16, 512};
  Bounds reps_bounds{1, 16};
  Bounds downsample_bounds{0, 5};
  Objective objective = Objective::proxy_score;
  GroupSelection group_selection = GroupSelection::uniform;
  /// Channel-group proposals rescale up to this many entries at once.
  int max_channel_moves = 3;
  ImplementationOptions impl;
  std::optional<PackQuery> precision;  // overrides every bundle IP
  std::optional<ArchFrame> frame;
  /// Optional starting network; used for the bundle with the same id.
  std::optional<DnnArch> initial;

  void validate() const;
};

struct Candidate {
  DnnArch arch;
  AccelConfig cfg;
  EstimateReport report;
  double score = 0.0;
};

struct TraceEntry {
  std::string bundle;
  int iter = 0;
  CoordinateGroup group = CoordinateGroup::reps;
  bool accepted = false;
  double score = 0.0;  // state after this step
  double fps = 0.0;
  std::int64_t dsp = 0;

  bool operator==(const TraceEntry&) const = default;
};

struct SearchResult {
  Candidate best;
  std::vector<TraceEntry> trace;
  std::int64_t feasible_count = 0;
  std::uint64_t seed = 0;
};

/// True when `a` ranks strictly above `b`: higher score, then lower latency,
/// then fewer DSPs, then the lexicographically smaller arch encoding.
bool ranks_above(const Candidate& a, const Candidate& b);

/// Minimal seed network for a bundle: fewest replications and channels, as
/// many early down-samplings as the bounds allow.
DnnArch minimal_arch(const Bundle& bundle, const SearchConfig& cfg);

/// Runs one hill-climbing chain per candidate bundle and returns the best
/// feasible design. Identical for any `workers` value.
SearchResult scd_search(const SearchConfig& cfg, const QualityProxy& proxy, int workers = 1);

/// bundle,iter,group,accepted,score,fps,dsp
std::string trace_csv(const SearchResult& result);

}  // namespace cosearch
