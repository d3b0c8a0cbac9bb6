#include "cosearch/gpu_occupancy.hpp"

#include <algorithm>
#include <limits>

#include "cosearch/errors.hpp"

namespace cosearch {

namespace {

constexpr std::int64_t kUnlimited = std::numeric_limits<std::int64_t>::max();

std::int64_t round_up(std::int64_t v, std::int64_t unit) { return (v + unit - 1) / unit * unit; }

}  // namespace

void GpuArchParams::validate() const {
  const std::pair<const char*, std::int64_t> fields[] = {
      {"max_blocks_per_sm", max_blocks_per_sm},   {"max_warps_per_sm", max_warps_per_sm},
      {"shared_mem_per_sm", shared_mem_per_sm},   {"shared_mem_alloc_unit", shared_mem_alloc_unit},
      {"max_regs_per_sm", max_regs_per_sm},       {"reg_alloc_unit", reg_alloc_unit},
      {"warp_size", warp_size},                   {"max_threads_per_sm", max_threads_per_sm},
  };
  for (const auto& [name, v] : fields) {
    if (v <= 0) throw InvariantViolation(name, "must be > 0");
  }
  if (max_threads_per_sm != max_warps_per_sm * warp_size) {
    throw InvariantViolation("max_threads_per_sm", "must equal max_warps_per_sm * warp_size");
  }
}

void GpuKernelParams::validate() const {
  if (warps_per_block < 1) throw InvariantViolation("warps_per_block", "must be >= 1");
  if (shared_mem_per_block < 0) throw InvariantViolation("shared_mem_per_block", "must be >= 0");
  if (regs_per_thread < 0) throw InvariantViolation("regs_per_thread", "must be >= 0");
}

std::string_view to_string(LimitingFactor f) {
  switch (f) {
    case LimitingFactor::blocks: return "blocks";
    case LimitingFactor::warps: return "warps";
    case LimitingFactor::shared_mem: return "shared_mem";
    case LimitingFactor::registers: return "registers";
  }
  return "?";
}

LimitingFactor limiting_factor_from_string(std::string_view s) {
  for (auto f : {LimitingFactor::blocks, LimitingFactor::warps, LimitingFactor::shared_mem,
                 LimitingFactor::registers}) {
    if (to_string(f) == s) return f;
  }
  throw InputError("unknown limiting factor '" + std::string(s) + "'");
}

OccupancyReport occupancy(const GpuArchParams& arch, const GpuKernelParams& kernel) {
  arch.validate();
  kernel.validate();
  if (kernel.warps_per_block > arch.max_warps_per_sm) {
    throw ZeroOccupancy("zero occupancy: " + std::to_string(kernel.warps_per_block) +
                        " warps per block exceed the SM limit of " +
                        std::to_string(arch.max_warps_per_sm));
  }

  OccupancyReport r;
  r.limit_blocks = arch.max_blocks_per_sm;
  r.limit_warps = arch.max_warps_per_sm / kernel.warps_per_block;
  r.limit_shared_mem =
      kernel.shared_mem_per_block == 0
          ? kUnlimited
          : arch.shared_mem_per_sm / round_up(kernel.shared_mem_per_block, arch.shared_mem_alloc_unit);
  const std::int64_t regs_per_warp =
      round_up(kernel.regs_per_thread * arch.warp_size, arch.reg_alloc_unit);
  r.limit_registers = kernel.regs_per_thread == 0
                          ? kUnlimited
                          : arch.max_regs_per_sm / (regs_per_warp * kernel.warps_per_block);

  const std::pair<LimitingFactor, std::int64_t> limits[] = {
      {LimitingFactor::blocks, r.limit_blocks},
      {LimitingFactor::warps, r.limit_warps},
      {LimitingFactor::shared_mem, r.limit_shared_mem},
      {LimitingFactor::registers, r.limit_registers},
  };
  r.blocks_per_sm = kUnlimited;
  for (const auto& [factor, limit] : limits) {
    if (limit < r.blocks_per_sm) {
      r.blocks_per_sm = limit;
      r.limiting_factor = factor;
    }
  }
  if (r.blocks_per_sm == 0) {
    throw ZeroOccupancy("zero occupancy: one block exceeds the SM's " +
                        std::string(to_string(r.limiting_factor)) + " budget");
  }
  r.active_warps = r.blocks_per_sm * kernel.warps_per_block;
  r.utilization = static_cast<double>(r.active_warps) / static_cast<double>(arch.max_warps_per_sm);
  return r;
}

void OccupancyReport::check_invariants(const GpuArchParams& arch) const {
  if (blocks_per_sm < 0 || blocks_per_sm > arch.max_blocks_per_sm) {
    throw InvariantViolation("blocks_per_sm", "outside [0, max_blocks_per_sm]");
  }
  if (active_warps > arch.max_warps_per_sm) {
    throw InvariantViolation("active_warps", "exceeds max_warps_per_sm");
  }
  if (utilization != static_cast<double>(active_warps) / static_cast<double>(arch.max_warps_per_sm)) {
    throw InvariantViolation("utilization", "differs from active_warps / max_warps_per_sm");
  }
  if (utilization < 0.0 || utilization > 1.0) throw InvariantViolation("utilization", "outside [0, 1]");
}

// Compute-capability defaults from the vendor occupancy tables.
std::vector<std::string> builtin_gpu_names() { return {"pascal", "volta", "turing"}; }

GpuArchParams builtin_gpu(std::string_view name) {
  if (name == "pascal") return {32, 64, 98304, 256, 65536, 256, 32, 2048};
  if (name == "volta") return {32, 64, 98304, 256, 65536, 256, 32, 2048};
  if (name == "turing") return {16, 32, 65536, 256, 65536, 256, 32, 1024};
  throw InputError("unknown built-in GPU '" + std::string(name) + "'");
}

}  // namespace cosearch
