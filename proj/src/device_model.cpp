#include "cosearch/device_model.hpp"

#include <algorithm>
#include <limits>

#include "cosearch/errors.hpp"
#include "cosearch/json_io.hpp"

namespace cosearch {

namespace {

bool fits(int a, int w, const NativeMul& m) {
  return (a <= m.bits_a && w <= m.bits_b) || (a <= m.bits_b && w <= m.bits_a);
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

PackingStyle DspMode::style() const {
  if (packing) return *packing;
  if (native_parallel_muls.size() <= 1 &&
      (native_parallel_muls.empty() || native_parallel_muls.front().count == 1)) {
    return PackingStyle::shared_multiplier;
  }
  return PackingStyle::native_parallel;
}

void DspMode::validate() const {
  if (wide_operand_bits <= 0) throw InvariantViolation("dsp.mode.wide", "must be > 0");
  if (narrow_operand_bits <= 0) throw InvariantViolation("dsp.mode.narrow", "must be > 0");
  if (accumulator_bits <= 0) throw InvariantViolation("dsp.mode.accumulator", "must be > 0");
  int largest = wide_operand_bits + narrow_operand_bits;
  for (const auto& m : native_parallel_muls) {
    if (m.bits_a <= 0 || m.bits_b <= 0 || m.count <= 0) {
      throw InvariantViolation("dsp.mode.native_modes", "all entries must be > 0");
    }
    largest = std::max(largest, m.bits_a + m.bits_b);
  }
  if (accumulator_bits < largest) {
    throw InvariantViolation("dsp.mode.accumulator",
                             "narrower than the largest single product (" +
                                 std::to_string(largest) + " bits)");
  }
  if (style() == PackingStyle::native_parallel && native_parallel_muls.empty()) {
    throw InvariantViolation("dsp.mode.native_modes", "native-parallel slice lists no modes");
  }
}

void BramBlockType::validate() const {
  if (name.empty()) throw InvariantViolation("bram.name", "must not be empty");
  if (capacity_bits <= 0) throw InvariantViolation("bram.capacity_bits", "must be > 0");
  if (supported_widths.empty()) throw InvariantViolation("bram.widths", "must not be empty");
  for (int w : supported_widths) {
    if (w <= 0 || capacity_bits / w < 1) {
      throw InvariantViolation("bram.widths",
                               "width " + std::to_string(w) + " leaves no addressable depth");
    }
  }
  if (!std::is_sorted(supported_widths.begin(), supported_widths.end())) {
    throw InvariantViolation("bram.widths", "must be ascending");
  }
}

std::int64_t DeviceSpec::total_bram_bits() const {
  std::int64_t bits = 0;
  for (const auto& r : bram_blocks) bits += r.type.capacity_bits * r.count;
  return bits;
}

const BramResource& DeviceSpec::primary_bram() const {
  if (bram_blocks.empty()) throw ConfigurationError("device '" + name + "' has no block RAM");
  return bram_blocks.front();
}

void DeviceSpec::validate() const {
  if (name.empty()) throw InvariantViolation("name", "must not be empty");
  if (dsp_count < 0) throw InvariantViolation("dsp.count", "must be >= 0");
  if (logic_cells < 0) throw InvariantViolation("logic_cells", "must be >= 0");
  if (!(clock_hz > 0.0)) throw InvariantViolation("clock_hz", "must be > 0");
  if (!(ext_bandwidth_bits_per_cycle >= 0.0)) {
    throw InvariantViolation("ext_bandwidth_bits_per_cycle", "must be >= 0");
  }
  dsp_mode.validate();
  for (const auto& r : bram_blocks) {
    r.type.validate();
    if (r.count < 0) throw InvariantViolation("bram.count", "must be >= 0");
  }
}

void PackQuery::validate() const {
  if (act_bits < 1 || act_bits > 32) throw InvariantViolation("act_bits", "must be in [1, 32]");
  if (weight_bits < 1 || weight_bits > 32) {
    throw InvariantViolation("weight_bits", "must be in [1, 32]");
  }
}

PackResult pack_factor(const DspMode& mode, PackQuery q) {
  q.validate();
  const int a = q.act_bits;
  const int w = q.weight_bits;

  if (mode.style() == PackingStyle::shared_multiplier) {
    // Two activations share the wide port separated by weight_bits guard bits;
    // the weight sits alone on the narrow port.
    if (2 * a + w <= mode.wide_operand_bits && w <= mode.narrow_operand_bits) {
      return {2, PackScheme::shared_multiplier_pack};
    }
    NativeMul single{mode.wide_operand_bits, mode.narrow_operand_bits, 1};
    if (fits(a, w, single)) return {1, PackScheme::single};
  } else {
    const NativeMul* best = nullptr;
    for (const auto& m : mode.native_parallel_muls) {
      if (!fits(a, w, m)) continue;
      if (best == nullptr) {
        best = &m;
        continue;
      }
      auto area = [](const NativeMul& x) { return std::int64_t{x.bits_a} * x.bits_b; };
      if (area(m) < area(*best) || (area(m) == area(*best) && m.count > best->count)) best = &m;
    }
    if (best != nullptr) {
      return {best->count, best->count > 1 ? PackScheme::native_parallel : PackScheme::single};
    }
  }
  throw PrecisionUnsupported("precision <" + std::to_string(a) + "-bit, " + std::to_string(w) +
                             "-bit> fits no multiplier mode of this DSP");
}

PackResult pack_factor(const DeviceSpec& device, PackQuery q) {
  return pack_factor(device.dsp_mode, q);
}

double peak_gmacs(const DeviceSpec& device, PackQuery q) {
  const PackResult p = pack_factor(device, q);
  return static_cast<double>(device.dsp_count) * p.macs_per_dsp * device.clock_hz / 1e9;
}

std::int64_t bram_blocks(std::int64_t total_bits, const BramBlockType& block) {
  if (total_bits < 0) throw InvariantViolation("total_bits", "must be >= 0");
  if (block.capacity_bits <= 0) throw InvariantViolation("capacity_bits", "must be > 0");
  return ceil_div(total_bits, block.capacity_bits);
}

int aligned_width(int element_bits, const BramBlockType& block) {
  if (element_bits <= 0) throw InvariantViolation("element_bits", "must be > 0");
  for (int w : block.supported_widths) {
    if (w >= element_bits) return w;
  }
  const int widest = block.supported_widths.back();
  return static_cast<int>(ceil_div(element_bits, widest)) * widest;
}

std::int64_t bram_blocks_width_aligned(std::int64_t elements, int element_bits,
                                       const BramBlockType& block) {
  if (elements < 0) throw InvariantViolation("elements", "must be >= 0");
  if (elements == 0) return 0;
  return bram_blocks(elements * aligned_width(element_bits, block), block);
}

// Block types from the vendor data-width table; M10K is the Arria V primitive.
const std::vector<BramBlockType>& builtin_block_types() {
  static const std::vector<BramBlockType> types = {
      {"RAMB18E1", 18 * 1024, {1, 2, 4, 9, 18}},
      {"RAMB36E1", 36 * 1024, {1, 2, 4, 9, 18, 36}},
      {"MLAB", 640, {8, 9, 10, 16, 18, 20}},
      {"M9K", 9 * 1024, {1, 2, 4, 8, 9, 16, 18, 32, 36}},
      {"M10K", 10 * 1024, {1, 2, 4, 5, 8, 10, 16, 20, 32, 40}},
      {"M20K", 20 * 1024, {8, 10, 16, 20, 32, 40}},
      {"M144K", 144 * 1024, {8, 9, 16, 18, 32, 36, 64, 72}},
  };
  return types;
}

const BramBlockType& builtin_block_type(std::string_view name) {
  for (const auto& t : builtin_block_types()) {
    if (t.name == name) return t;
  }
  throw InputError("unknown block type '" + std::string(name) + "'");
}

std::vector<std::string> builtin_dsp_mode_names() {
  return {"DSP48E1", "DSP48E2", "StratixV", "ArriaV", "Stratix10", "Arria10"};
}

DspMode builtin_dsp_mode(std::string_view name) {
  if (name == "DSP48E1") return {25, 18, 48, {{25, 18, 1}}, std::nullopt};
  if (name == "DSP48E2") return {27, 18, 48, {{27, 18, 1}}, std::nullopt};
  if (name == "StratixV") {
    return {27, 27, 64, {{9, 9, 3}, {18, 18, 2}, {18, 36, 1}, {27, 27, 1}}, std::nullopt};
  }
  if (name == "ArriaV") return {27, 27, 64, {{9, 9, 3}, {18, 18, 2}, {27, 27, 1}}, std::nullopt};
  if (name == "Stratix10" || name == "Arria10") {
    return {27, 27, 64, {{18, 19, 2}, {27, 27, 1}}, std::nullopt};
  }
  throw InputError("unknown DSP mode '" + std::string(name) + "'");
}

std::vector<std::string> builtin_device_names() { return {"ultra96", "zcu102", "5agxa1"}; }

DeviceSpec builtin_device(std::string_view name) {
  if (name == "ultra96") {
    return {"ultra96", 360, builtin_dsp_mode("DSP48E2"),
            {{builtin_block_type("RAMB18E1"), 432}}, 154350, 250e6, 128.0};
  }
  if (name == "zcu102") {
    return {"zcu102", 2520, builtin_dsp_mode("DSP48E2"),
            {{builtin_block_type("RAMB18E1"), 1824}}, 599550, 200e6, 512.0};
  }
  if (name == "5agxa1") {
    return {"5agxa1", 240, builtin_dsp_mode("ArriaV"),
            {{builtin_block_type("M10K"), 800}}, 75000, 250e6, 128.0};
  }
  throw InputError("unknown built-in device '" + std::string(name) + "'");
}

DeviceSpec load_device(std::string_view text) {
  return device_from_json(parse_json(text));
}

std::string dump_device(const DeviceSpec& device) {
  Json j;
  to_json(j, device);
  return j.dump(2);
}

std::string_view to_string(PackScheme s) {
  switch (s) {
    case PackScheme::shared_multiplier_pack: return "shared_multiplier_pack";
    case PackScheme::native_parallel: return "native_parallel";
    case PackScheme::single: return "single";
  }
  return "?";
}

std::string_view to_string(PackingStyle s) {
  return s == PackingStyle::shared_multiplier ? "shared" : "native";
}

}  // namespace cosearch
