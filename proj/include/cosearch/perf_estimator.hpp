#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cosearch/bundle_catalog.hpp"
#include "cosearch/device_model.hpp"

namespace cosearch {

/// Implementation parameters of the folded Bundle accelerator: one engine per
/// IP kind, shared by every layer of that kind.
struct AccelConfig {
  std::map<IpKind, std::int64_t> dsp_alloc;
  int tile_height = 32;
  int tile_width = 32;
  bool double_buffer = true;
  std::int64_t layer_overhead_cycles = 0;  // pipeline fill per layer

  std::int64_t total_dsp() const;
  void validate(const DeviceSpec& device) const;

  bool operator==(const AccelConfig&) const = default;
};

struct LayerEstimate {
  std::int64_t compute_cycles = 0;
  std::int64_t memory_cycles = 0;
  std::int64_t cycles = 0;
  std::int64_t tiles = 0;
  std::int64_t in_tile_bits = 0;
  std::int64_t out_tile_bits = 0;
  std::int64_t weight_bits = 0;
  std::int64_t bram_blocks = 0;  // blocks held by resident buffers
  std::int64_t offchip_bits = 0;
  bool weights_spilled = false;
  bool activations_spilled = false;

  bool operator==(const LayerEstimate&) const = default;
};

struct EstimateReport {
  std::int64_t total_cycles = 0;
  double clock_hz = 0.0;
  double latency_s = 0.0;
  double fps = 0.0;  // +inf for a zero-cycle network
  std::int64_t dsp_used = 0;
  std::map<std::string, std::int64_t> bram_blocks_used;
  std::int64_t offchip_bits_moved = 0;
  std::vector<LayerEstimate> per_layer;

  /// Throws InvariantViolation if the latency/fps arithmetic or counts are off.
  void check_invariants() const;

  bool operator==(const EstimateReport&) const = default;
};

/// Analytical latency and resource model.
///
/// Per layer, compute takes ceil(macs / (dsp_alloc[kind] * pack_factor))
/// cycles. The output map is tiled tile_height x tile_width; the weight buffer
/// and the input/output tile buffers are allocated from the device's primary
/// block RAM. Weights are allocated first and, when resident, streamed once per
/// layer; otherwise they are re-fetched for every tile and no block RAM is left
/// for activations. Activation tiles stay on chip when they fit into the
/// remaining blocks (only the network input and output touch DRAM); otherwise
/// every tile is read and written off-chip. Layer cycles are
/// max(compute, memory) with double buffering and compute + memory without.
EstimateReport estimate(const DnnArch& arch, const AccelConfig& cfg, const DeviceSpec& device);

struct Violation {
  std::string constraint;  // "fps", "dsp" or "bram:<block type>"
  double required = 0.0;
  double actual = 0.0;
  double margin = 0.0;  // how far past the limit, always > 0

  bool operator==(const Violation&) const = default;
};

struct Verdict {
  bool feasible = true;
  std::vector<Violation> violations;
};

Verdict check_feasible(const EstimateReport& report, const DeviceSpec& device, double target_fps);

}  // namespace cosearch
