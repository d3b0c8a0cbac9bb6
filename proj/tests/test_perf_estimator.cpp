#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cosearch/errors.hpp"
#include "cosearch/perf_estimator.hpp"
#include "properties.hpp"

using namespace cosearch;

namespace {

const Bundle& bundle(const char* id) { return find_bundle(builtin_bundles(), id); }

}  // namespace

TEST_CASE("single 1x1 layer, 1 MAC per cycle") {
  Bundle b{"one", {{IpKind::conv_1x1, 1, 1, 16, 16}}};  // too wide to pack on DSP48E2
  ArchFrame f;
  const DnnArch a = build_dnn(b, 1, {10}, {}, {1, 1, 10}, f);
  REQUIRE(dnn_total_macs(a) == 100);
  AccelConfig c;
  c.dsp_alloc[IpKind::conv_1x1] = 1;
  const EstimateReport r = estimate(a, c, builtin_device("ultra96"));
  CHECK(r.per_layer[0].compute_cycles == 100);
  CHECK(r.total_cycles >= 100);
  CHECK_NOTHROW(r.check_invariants());
}

TEST_CASE("Bundle-4 network against the per-layer hand oracle") {
  const DnnArch a = build_dnn(bundle("bundle4"), 2, {8, 8}, {}, {16, 16, 3});
  const AccelConfig c = props::full_alloc(8);
  const DeviceSpec u = builtin_device("ultra96");
  REQUIRE(pack_factor(u, {8, 10}).macs_per_dsp == 2);
  const EstimateReport r = estimate(a, c, u);

  // 8 DSPs x 2 MACs per kind.
  const std::int64_t hand[] = {110592 / 16, 36864 / 16, 32768 / 16, 18432 / 16, 16384 / 16,
                               16384 / 16};
  REQUIRE(r.per_layer.size() == std::size(hand));
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < r.per_layer.size(); ++i) {
    CHECK(r.per_layer[i].compute_cycles == hand[i]);
    CHECK_FALSE(r.per_layer[i].weights_spilled);
    CHECK_FALSE(r.per_layer[i].activations_spilled);
    CHECK(r.per_layer[i].memory_cycles <= r.per_layer[i].compute_cycles);
    sum += hand[i];
  }
  CHECK(sum == 14464);
  CHECK(r.total_cycles == sum);
  CHECK(r.dsp_used == 24);
  CHECK(r.latency_s == Catch::Approx(14464 / 250e6).epsilon(1e-15));
  CHECK(r.fps * r.latency_s == Catch::Approx(1.0).epsilon(1e-12));
  // Off-chip: input image, each weight set once, network output.
  const std::int64_t weights = (9 * 3 * 16 + 9 * 16 + 16 * 8 + 9 * 8 + 8 * 8 + 8 * 8) * 10;
  CHECK(r.offchip_bits_moved == 16 * 16 * 3 * 8 + weights + 16 * 16 * 8 * 8);
}

TEST_CASE("configuration errors") {
  const DnnArch a = build_dnn(bundle("bundle4"), 1, {8}, {}, {8, 8, 3});
  const DeviceSpec u = builtin_device("ultra96");
  AccelConfig c = props::full_alloc(8);
  c.dsp_alloc.erase(IpKind::dw_conv_kxk);
  CHECK_THROWS_AS(estimate(a, c, u), ConfigurationError);
  c = props::full_alloc(200);
  CHECK_THROWS_AS(estimate(a, c, u), ConfigurationError);
  // Allocations for kinds the network lacks are ignored.
  c = props::full_alloc(8);
  const DnnArch only3 = build_dnn(bundle("bundle1"), 1, {8}, {}, {8, 8, 3});
  const EstimateReport r = estimate(only3, c, u);
  CHECK(r.dsp_used == 16);  // conv_kxk body/stem + conv_1x1 head
  const DnnArch wide = build_dnn(with_precision(bundle("bundle1"), {28, 28}), 1, {8}, {}, {8, 8, 3});
  CHECK_THROWS_AS(estimate(wide, c, u), PrecisionUnsupported);
}

TEST_CASE("feasibility verdicts") {
  const DeviceSpec z = builtin_device("zcu102");
  EstimateReport r;
  r.fps = 31;
  r.dsp_used = 100;
  r.bram_blocks_used["RAMB18E1"] = 10;
  CHECK(check_feasible(r, z, 30).feasible);

  r.dsp_used = 2521;
  Verdict v = check_feasible(r, z, 30);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].constraint == "dsp");
  CHECK(v.violations[0].margin == 1.0);

  r.dsp_used = 0;
  r.fps = 0;
  v = check_feasible(r, z, 15);
  REQUIRE_FALSE(v.feasible);
  CHECK(v.violations[0].constraint == "fps");

  r.fps = 100;
  r.bram_blocks_used["RAMB18E1"] = 1825;
  v = check_feasible(r, z, 15);
  REQUIRE_FALSE(v.feasible);
  CHECK(v.violations[0].constraint == "bram:RAMB18E1");
}

TEST_CASE("tile buffer crossing a block boundary") {
  // One 1x1 layer on a 1-bit, 1-channel feature map: tile bits = tile width.
  Bundle b{"line", {{IpKind::conv_1x1, 1, 1, 1, 8}}};
  ArchFrame f;
  DeviceSpec d = builtin_device("ultra96");
  d.bram_blocks[0].type = {"B64", 64, {1, 2, 4, 8, 16, 32, 64}};
  d.bram_blocks[0].count = 3;  // weights + one input + one output block
  d.ext_bandwidth_bits_per_cycle = 1;
  const DnnArch a = build_dnn(b, 1, {1}, {}, {1, 1000, 1}, f);

  AccelConfig c;
  c.dsp_alloc[IpKind::conv_1x1] = 1;
  c.tile_height = 1;
  for (int tw = 1; tw <= 200; ++tw) {
    c.tile_width = tw;
    const EstimateReport r = estimate(a, c, d);
    const std::int64_t blocks = r.per_layer[0].bram_blocks;
    if (tw <= 64) {
      CHECK(blocks == 3);
      CHECK_FALSE(r.per_layer[0].activations_spilled);
    } else {
      CHECK(r.per_layer[0].activations_spilled);
    }
  }

  // Same sweep with unlimited blocks: the count steps by 2 (input and output tile).
  d.bram_blocks[0].count = 1 << 20;
  c.tile_width = 64;
  const EstimateReport r64 = estimate(a, c, d);
  c.tile_width = 65;
  const EstimateReport r65 = estimate(a, c, d);
  CHECK(r65.per_layer[0].bram_blocks == r64.per_layer[0].bram_blocks + 2);

  // Constrained supply: one bit over the block and the layer streams its tiles.
  d.bram_blocks[0].count = 3;
  c.tile_width = 64;
  const EstimateReport s64 = estimate(a, c, d);
  c.tile_width = 65;
  const EstimateReport s65 = estimate(a, c, d);
  CHECK(s65.per_layer[0].memory_cycles > s64.per_layer[0].memory_cycles);
  CHECK(s65.total_cycles > s64.total_cycles);
}

TEST_CASE("latency model properties on random architectures") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 200; ++t) {
    INFO("trial " << t);
    CHECK(props::channel_monotonicity(rng).empty());
    CHECK(props::reps_monotonicity(rng).empty());
    CHECK(props::dsp_scaling(rng).empty());
    CHECK(props::double_buffer_dominance(rng).empty());
    CHECK(props::block_boundary(rng).empty());
  }
}

TEST_CASE("report invariants hold on random outputs") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const DnnArch a = oracle::random_small_arch(rng);
    const DeviceSpec d = props::random_device(rng);
    const EstimateReport r = estimate(a, props::random_config(rng), d);
    CHECK_NOTHROW(r.check_invariants());
    CHECK(r.latency_s == static_cast<double>(r.total_cycles) / d.clock_hz);
  }
}
