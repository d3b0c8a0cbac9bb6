#include "cosearch/perf_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cosearch/errors.hpp"

namespace cosearch {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t weight_count(const Layer& l) {
  const std::int64_t k2 = std::int64_t{l.ip.kernel} * l.ip.kernel;
  switch (l.ip.kind) {
    case IpKind::conv_kxk: return k2 * l.in.c * l.out.c;
    case IpKind::dw_conv_kxk: return k2 * l.in.c;
    case IpKind::conv_1x1: return l.in.c * l.out.c;
    case IpKind::pool: return 0;
  }
  return 0;
}

}  // namespace

std::int64_t AccelConfig::total_dsp() const {
  std::int64_t total = 0;
  for (const auto& [kind, n] : dsp_alloc) total += n;
  return total;
}

void AccelConfig::validate(const DeviceSpec& device) const {
  if (tile_height < 1 || tile_width < 1) throw ConfigurationError("tile dimensions must be >= 1");
  if (layer_overhead_cycles < 0) throw ConfigurationError("layer overhead must be >= 0");
  for (const auto& [kind, n] : dsp_alloc) {
    if (n < 0) throw ConfigurationError("negative DSP allocation for " + std::string(to_string(kind)));
  }
  if (total_dsp() > device.dsp_count) {
    throw ConfigurationError("allocates " + std::to_string(total_dsp()) + " DSPs, device '" +
                             device.name + "' has " + std::to_string(device.dsp_count));
  }
}

EstimateReport estimate(const DnnArch& arch, const AccelConfig& cfg, const DeviceSpec& device) {
  cfg.validate(device);
  const BramResource& bram = device.primary_bram();

  EstimateReport rep;
  rep.clock_hz = device.clock_hz;
  rep.per_layer.reserve(arch.layers.size());

  std::map<IpKind, bool> present;
  std::int64_t peak_blocks = 0;

  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const Layer& l = arch.layers[i];
    LayerEstimate le;

    if (uses_dsp(l.ip.kind)) {
      auto it = cfg.dsp_alloc.find(l.ip.kind);
      if (it == cfg.dsp_alloc.end() || it->second == 0) {
        throw ConfigurationError("no DSPs allocated for " + std::string(to_string(l.ip.kind)) +
                                 " layers");
      }
      present[l.ip.kind] = true;
      const std::int64_t per_cycle = it->second * pack_factor(device, l.ip.precision()).macs_per_dsp;
      le.compute_cycles = ceil_div(l.macs, per_cycle);
    }

    const std::int64_t th = std::min<std::int64_t>(cfg.tile_height, l.out.h);
    const std::int64_t tw = std::min<std::int64_t>(cfg.tile_width, l.out.w);
    le.tiles = ceil_div(l.out.h, th) * ceil_div(l.out.w, tw);
    const std::int64_t in_th = std::min(l.in.h, (th - 1) * l.ip.stride + l.ip.kernel);
    const std::int64_t in_tw = std::min(l.in.w, (tw - 1) * l.ip.stride + l.ip.kernel);
    le.in_tile_bits = in_th * in_tw * l.in.c * l.ip.act_bits;
    le.out_tile_bits = th * tw * l.out.c * l.ip.act_bits;
    le.weight_bits = weight_count(l) * l.ip.weight_bits;

    const std::int64_t weight_blocks = bram_blocks(le.weight_bits, bram.type);
    const std::int64_t act_blocks =
        bram_blocks(le.in_tile_bits, bram.type) + bram_blocks(le.out_tile_bits, bram.type);

    std::int64_t remaining = bram.count;
    if (weight_blocks <= remaining) {
      le.offchip_bits += le.weight_bits;
      le.bram_blocks += weight_blocks;
      remaining -= weight_blocks;
    } else {
      le.weights_spilled = true;
      le.offchip_bits += le.weight_bits * le.tiles;
      remaining = 0;
    }
    if (act_blocks <= remaining) {
      le.bram_blocks += act_blocks;
      if (i == 0) le.offchip_bits += l.in.elements() * l.ip.act_bits;
      if (i + 1 == arch.layers.size()) le.offchip_bits += l.out.elements() * l.ip.act_bits;
    } else {
      le.activations_spilled = true;
      le.offchip_bits += (le.in_tile_bits + le.out_tile_bits) * le.tiles;
    }

    if (le.offchip_bits > 0) {
      if (!(device.ext_bandwidth_bits_per_cycle > 0.0)) {
        throw ConfigurationError("device '" + device.name + "' has no external bandwidth");
      }
      le.memory_cycles = static_cast<std::int64_t>(
          std::ceil(static_cast<double>(le.offchip_bits) / device.ext_bandwidth_bits_per_cycle));
    }

    le.cycles = (cfg.double_buffer ? std::max(le.compute_cycles, le.memory_cycles)
                                   : le.compute_cycles + le.memory_cycles) +
                cfg.layer_overhead_cycles;

    rep.total_cycles += le.cycles;
    rep.offchip_bits_moved += le.offchip_bits;
    peak_blocks = std::max(peak_blocks, le.bram_blocks);
    rep.per_layer.push_back(le);
  }

  for (const auto& [kind, n] : cfg.dsp_alloc) {
    if (present.count(kind)) rep.dsp_used += n;
  }
  rep.bram_blocks_used[bram.type.name] = peak_blocks;
  rep.latency_s = static_cast<double>(rep.total_cycles) / device.clock_hz;
  rep.fps = rep.total_cycles == 0 ? std::numeric_limits<double>::infinity() : 1.0 / rep.latency_s;
  return rep;
}

void EstimateReport::check_invariants() const {
  if (total_cycles < 0 || dsp_used < 0 || offchip_bits_moved < 0) {
    throw InvariantViolation("report", "negative count");
  }
  if (!(clock_hz > 0.0)) throw InvariantViolation("clock_hz", "must be > 0");
  const double expect_latency = static_cast<double>(total_cycles) / clock_hz;
  if (std::abs(latency_s - expect_latency) > 1e-12 * std::max(1.0, expect_latency)) {
    throw InvariantViolation("latency_s", "differs from total_cycles / clock_hz");
  }
  if (total_cycles == 0) {
    if (!std::isinf(fps)) throw InvariantViolation("fps", "zero-cycle report must have infinite fps");
  } else if (std::abs(fps * latency_s - 1.0) > 1e-12) {
    throw InvariantViolation("fps", "differs from 1 / latency_s");
  }
  for (const auto& [name, n] : bram_blocks_used) {
    if (n < 0) throw InvariantViolation("bram_blocks_used", "negative count for " + name);
  }
  std::int64_t sum = 0;
  for (const auto& l : per_layer) {
    if (l.compute_cycles < 0 || l.memory_cycles < 0 || l.cycles < 0 || l.bram_blocks < 0 ||
        l.offchip_bits < 0) {
      throw InvariantViolation("per_layer", "negative count");
    }
    sum += l.cycles;
  }
  if (!per_layer.empty() && sum != total_cycles) {
    throw InvariantViolation("total_cycles", "differs from the per-layer sum");
  }
}

Verdict check_feasible(const EstimateReport& report, const DeviceSpec& device, double target_fps) {
  Verdict v;
  if (!(report.fps >= target_fps)) {
    v.violations.push_back({"fps", target_fps, report.fps, target_fps - report.fps});
  }
  if (report.dsp_used > device.dsp_count) {
    v.violations.push_back({"dsp", static_cast<double>(device.dsp_count),
                            static_cast<double>(report.dsp_used),
                            static_cast<double>(report.dsp_used - device.dsp_count)});
  }
  for (const auto& [name, used] : report.bram_blocks_used) {
    std::int64_t available = 0;
    for (const auto& r : device.bram_blocks) {
      if (r.type.name == name) available += r.count;
    }
    if (used > available) {
      v.violations.push_back({"bram:" + name, static_cast<double>(available),
                              static_cast<double>(used), static_cast<double>(used - available)});
    }
  }
  v.feasible = v.violations.empty();
  return v;
}

}  // namespace cosearch
