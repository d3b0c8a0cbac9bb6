#include "cosearch/codesign_search.hpp"

#include "cosearch/errors.hpp"

namespace cosearch {

namespace {

__extension__ using i128 = __int128;

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Packed MAC demand per DSP-using kind: sum of ceil(macs / pack_factor).
std::map<IpKind, std::int64_t> kind_demand(const DnnArch& arch, const DeviceSpec& device) {
  std::map<IpKind, std::int64_t> demand;
  for (const auto& l : arch.layers) {
    if (!uses_dsp(l.ip.kind)) continue;
    demand[l.ip.kind] += ceil_div(l.macs, pack_factor(device, l.ip.precision()).macs_per_dsp);
  }
  return demand;
}

}  // namespace

AccelConfig proportional_config(const DnnArch& arch, const DeviceSpec& device,
                                std::int64_t budget, const ImplementationOptions& opts) {
  const auto demand = kind_demand(arch, device);
  const auto kinds = static_cast<std::int64_t>(demand.size());
  if (budget < kinds) {
    throw ConfigurationError("DSP budget " + std::to_string(budget) + " below the " +
                             std::to_string(kinds) + " engines the network needs");
  }
  i128 total = 0;
  for (const auto& [k, d] : demand) total += d;

  AccelConfig cfg;
  cfg.tile_height = opts.tile_height;
  cfg.tile_width = opts.tile_width;
  cfg.double_buffer = opts.double_buffer;
  cfg.layer_overhead_cycles = opts.layer_overhead_cycles;
  const i128 spare = budget - kinds;
  for (const auto& [k, d] : demand) {
    const i128 share = total == 0 ? spare / kinds : spare * d / total;
    cfg.dsp_alloc[k] = 1 + static_cast<std::int64_t>(share);
  }
  return cfg;
}

FitResult fit_implementation(const DnnArch& arch, const DeviceSpec& device, double target_fps,
                             const ImplementationOptions& opts) {
  auto evaluate = [&](std::int64_t budget) {
    FitResult r;
    r.cfg = proportional_config(arch, device, budget, opts);
    r.report = estimate(arch, r.cfg, device);
    r.verdict = check_feasible(r.report, device, target_fps);
    return r;
  };

  const auto kinds = static_cast<std::int64_t>(kind_demand(arch, device).size());
  if (kinds > device.dsp_count) {
    FitResult r;
    r.verdict.feasible = false;
    r.verdict.violations.push_back({"dsp", static_cast<double>(device.dsp_count),
                                    static_cast<double>(kinds),
                                    static_cast<double>(kinds - device.dsp_count)});
    return r;
  }

  FitResult best = evaluate(device.dsp_count);
  if (!best.verdict.feasible) return best;

  std::int64_t lo = kinds;
  std::int64_t hi = device.dsp_count;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    FitResult r = evaluate(mid);
    if (r.verdict.feasible) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid + 1;
    }
  }
  return best;
}

}  // namespace cosearch
