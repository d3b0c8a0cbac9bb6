#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cosearch {

struct GpuArchParams {
  std::int64_t max_blocks_per_sm = 0;
  std::int64_t max_warps_per_sm = 0;
  std::int64_t shared_mem_per_sm = 0;  // bytes
  std::int64_t shared_mem_alloc_unit = 0;
  std::int64_t max_regs_per_sm = 0;
  std::int64_t reg_alloc_unit = 0;
  std::int64_t warp_size = 0;
  std::int64_t max_threads_per_sm = 0;

  void validate() const;
  bool operator==(const GpuArchParams&) const = default;
};

struct GpuKernelParams {
  std::int64_t warps_per_block = 0;
  std::int64_t shared_mem_per_block = 0;  // bytes
  std::int64_t regs_per_thread = 0;

  void validate() const;
  bool operator==(const GpuKernelParams&) const = default;
};

/// Tie order when several limits coincide: blocks < warps < shared_mem < registers.
enum class LimitingFactor { blocks, warps, shared_mem, registers };

std::string_view to_string(LimitingFactor f);
LimitingFactor limiting_factor_from_string(std::string_view s);

struct OccupancyReport {
  std::int64_t blocks_per_sm = 0;
  LimitingFactor limiting_factor = LimitingFactor::blocks;
  std::int64_t active_warps = 0;
  double utilization = 0.0;  // active_warps / max_warps_per_sm

  // Individual limits; INT64_MAX when the resource is unused.
  std::int64_t limit_blocks = 0;
  std::int64_t limit_warps = 0;
  std::int64_t limit_shared_mem = 0;
  std::int64_t limit_registers = 0;

  void check_invariants(const GpuArchParams& arch) const;
  bool operator==(const OccupancyReport&) const = default;
};

/// Resident thread blocks per SM. Registers are granted per warp, rounded up
/// to reg_alloc_unit; shared memory per block, rounded up to its unit. Throws
/// ZeroOccupancy when not even one block fits.
OccupancyReport occupancy(const GpuArchParams& arch, const GpuKernelParams& kernel);

std::vector<std::string> builtin_gpu_names();
GpuArchParams builtin_gpu(std::string_view name);

}  // namespace cosearch
