#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cosearch {

/// One vendor-native multiplier configuration, e.g. "Three 9 x 9" is {9, 9, 3}.
struct NativeMul {
  int bits_a = 0;
  int bits_b = 0;
  int count = 0;

  bool operator==(const NativeMul&) const = default;
};

enum class PackingStyle {
  /// A single wide x narrow multiplier; two products can share the narrow
  /// operand when the wide port has room for both multiplicands plus guard bits.
  shared_multiplier,
  /// Several independent fixed-size multipliers per slice (Intel variable
  /// precision blocks).
  native_parallel,
};

struct DspMode {
  int wide_operand_bits = 0;
  int narrow_operand_bits = 0;
  int accumulator_bits = 0;
  std::vector<NativeMul> native_parallel_muls;
  /// Unset means inferred: one native mode with count 1 is a shared-multiplier
  /// slice, anything else is native-parallel.
  std::optional<PackingStyle> packing;

  PackingStyle style() const;
  void validate() const;

  bool operator==(const DspMode&) const = default;
};

struct BramBlockType {
  std::string name;
  std::int64_t capacity_bits = 0;
  std::vector<int> supported_widths;  // ascending

  void validate() const;

  bool operator==(const BramBlockType&) const = default;
};

struct BramResource {
  BramBlockType type;
  std::int64_t count = 0;

  bool operator==(const BramResource&) const = default;
};

struct DeviceSpec {
  std::string name;
  std::int64_t dsp_count = 0;
  DspMode dsp_mode;
  std::vector<BramResource> bram_blocks;  // first entry is the primary buffer type
  std::int64_t logic_cells = 0;
  double clock_hz = 0.0;
  double ext_bandwidth_bits_per_cycle = 0.0;

  std::int64_t total_bram_bits() const;
  const BramResource& primary_bram() const;
  void validate() const;

  bool operator==(const DeviceSpec&) const = default;
};

/// Precision pair, ordered <activation, weight>.
struct PackQuery {
  int act_bits = 0;
  int weight_bits = 0;

  void validate() const;

  bool operator==(const PackQuery&) const = default;
};

enum class PackScheme { shared_multiplier_pack, native_parallel, single };

struct PackResult {
  int macs_per_dsp = 0;
  PackScheme scheme = PackScheme::single;

  bool operator==(const PackResult&) const = default;
};

enum class BramMode { capacity, width_aligned };

PackResult pack_factor(const DspMode& mode, PackQuery q);
PackResult pack_factor(const DeviceSpec& device, PackQuery q);

/// dsp_count * macs_per_dsp * clock_hz / 1e9.
double peak_gmacs(const DeviceSpec& device, PackQuery q);

/// Blocks needed to hold `total_bits` as one contiguous buffer.
std::int64_t bram_blocks(std::int64_t total_bits, const BramBlockType& block);

/// Blocks needed when every element is stored at the smallest supported port
/// width that holds it. Elements wider than the widest port take several words.
std::int64_t bram_blocks_width_aligned(std::int64_t elements, int element_bits,
                                       const BramBlockType& block);

/// Smallest supported width >= element_bits, or a multiple of the widest one.
int aligned_width(int element_bits, const BramBlockType& block);

// Built-in catalogs.
const std::vector<BramBlockType>& builtin_block_types();
const BramBlockType& builtin_block_type(std::string_view name);

std::vector<std::string> builtin_dsp_mode_names();
DspMode builtin_dsp_mode(std::string_view name);

std::vector<std::string> builtin_device_names();
DeviceSpec builtin_device(std::string_view name);

/// Parses and validates a device-spec JSON document.
DeviceSpec load_device(std::string_view text);
std::string dump_device(const DeviceSpec& device);

std::string_view to_string(PackScheme s);
std::string_view to_string(PackingStyle s);

}  // namespace cosearch
