#include <catch_amalgamated.hpp>

#include <random>

#include "cosearch/bundle_catalog.hpp"
#include "cosearch/errors.hpp"
#include "oracles.hpp"

using namespace cosearch;

namespace {

const Bundle& bundle(const char* id) { return find_bundle(builtin_bundles(), id); }

}  // namespace

TEST_CASE("layer MACs examples") {
  CHECK(layer_macs({IpKind::conv_kxk, 3, 1}, {16, 16, 8}, 16) == 294912);
  CHECK(layer_macs({IpKind::dw_conv_kxk, 3, 1}, {16, 16, 8}, 8) == 18432);
  CHECK(layer_macs({IpKind::conv_1x1, 1, 1}, {1, 1, 1}, 1) == 1);
  CHECK(layer_macs({IpKind::pool, 2, 2}, {8, 8, 4}, 4) == 0);
  CHECK_THROWS_AS(layer_macs({IpKind::dw_conv_kxk, 3, 1}, {16, 16, 8}, 16), ShapeError);
  CHECK_THROWS_AS(layer_macs({IpKind::conv_kxk, 3, 1}, {0, 16, 8}, 16), ShapeError);
}

TEST_CASE("layer MACs match the loop-nest counter") {
  for (IpKind kind : {IpKind::conv_kxk, IpKind::dw_conv_kxk, IpKind::conv_1x1}) {
    for (int k : {1, 3, 5}) {
      if (kind == IpKind::conv_1x1 && k != 1) continue;
      for (int s : {1, 2}) {
        for (int h = 1; h <= 8; ++h) {
          for (int w = 1; w <= 8; w += 3) {
            for (int c = 1; c <= 8; c += 3) {
              for (int co = 1; co <= 8; co += 2) {
                const IpTemplate ip{kind, k, s};
                const std::int64_t cout = kind == IpKind::dw_conv_kxk ? c : co;
                const Shape in{h, w, c};
                CHECK(layer_macs(ip, in, cout) == oracle::loop_macs(ip, in, cout));
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("output shapes") {
  CHECK(layer_output_shape({IpKind::conv_kxk, 3, 2}, {7, 8, 3}, 5) == Shape{4, 4, 5});
  CHECK(layer_output_shape({IpKind::pool, 2, 2}, {7, 8, 3}, 3) == Shape{3, 4, 3});
  CHECK(layer_output_shape({IpKind::pool, 2, 2}, {1, 8, 3}, 3) == Shape{0, 4, 3});
  for (int h = 1; h <= 20; ++h) {
    CHECK(layer_output_shape({IpKind::pool, 2, 2}, {h, h, 1}, 1).h == oracle::out_positions(h, 2, 2, true));
    CHECK(layer_output_shape({IpKind::conv_kxk, 3, 2}, {h, h, 1}, 1).h ==
          oracle::out_positions(h, 3, 2, false));
  }
}

TEST_CASE("build_dnn examples") {
  const DnnArch big = build_dnn(bundle("bundle4"), 14,
                                {32, 64, 96, 128, 192, 256, 384, 512, 640, 768, 896, 1008, 512, 256},
                                {1, 3, 5, 7}, {160, 320, 3});
  CHECK(max_channels(big) == 1008);
  CHECK(big.layers.size() == 1 + 14 * 2 + 4 + 1);

  const DnnArch small = build_dnn(bundle("bundle1"), 1, {8}, {}, {8, 8, 3});
  CHECK(small.layers.size() == 3);
  CHECK(small.layers.back().out == Shape{8, 8, 8});

  // 4x4 -> 2x2 -> 1x1 -> collapse on the third halving.
  try {
    build_dnn(bundle("bundle1"), 4, {8, 8, 8, 8}, {1, 2, 3}, {4, 4, 3});
    FAIL("expected collapse");
  } catch (const ConfigurationError& e) {
    CHECK(std::string(e.what()).find("collapse") != std::string::npos);
    CHECK(std::string(e.what()).find("replication 3") != std::string::npos);
  }

  CHECK_THROWS_AS(build_dnn(bundle("bundle1"), 2, {8}, {}, {8, 8, 3}), ConfigurationError);
  CHECK_THROWS_AS(build_dnn(bundle("bundle1"), 2, {8, 8}, {2}, {8, 8, 3}), ConfigurationError);
  CHECK_THROWS_AS(build_dnn(bundle("bundle1"), 2, {8, 8}, {0, 0}, {8, 8, 3}), ConfigurationError);
  CHECK_THROWS_AS(build_dnn(bundle("bundle1"), 0, {}, {}, {8, 8, 3}), ConfigurationError);
  CHECK_THROWS_AS(build_dnn(bundle("bundle1"), 1, {0}, {}, {8, 8, 3}), ConfigurationError);
}

TEST_CASE("total MACs of a small Bundle-4 network") {
  const DnnArch a = build_dnn(bundle("bundle4"), 2, {8, 8}, {}, {16, 16, 3});
  const std::int64_t hand = 16 * 16 * 9 * 3 * 16  // stem 3x3, 3 -> 16
                            + 9 * 16 * 256 + 16 * 8 * 256  // rep 0
                            + 9 * 8 * 256 + 8 * 8 * 256    // rep 1
                            + 8 * 8 * 256;                 // head 1x1, 8 -> 8
  CHECK(dnn_total_macs(a) == hand);
  CHECK(hand == 231424);
}

TEST_CASE("degenerate stem-only network") {
  ArchFrame f;
  f.stem = {{IpKind::conv_1x1, 1, 1}};
  f.stem_channels = 4;
  f.head = {};
  Bundle pool_only{"pool", {{IpKind::pool, 2, 2}}};
  const DnnArch a = build_dnn(pool_only, 1, {1}, {}, {8, 8, 3}, f);
  CHECK(dnn_total_macs(a) == layer_macs({IpKind::conv_1x1, 1, 1}, {8, 8, 3}, 4));
}

TEST_CASE("doubling channels quadruples interior conv MACs") {
  const int n = 8;
  const DnnArch a = build_dnn(bundle("bundle1"), n, std::vector<int>(n, 16), {}, {12, 12, 3});
  const DnnArch b = build_dnn(bundle("bundle1"), n, std::vector<int>(n, 32), {}, {12, 12, 3});
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].section == Section::body && a.layers[i].replication > 0) {
      CHECK(b.layers[i].macs == 4 * a.layers[i].macs);
    }
  }
}

TEST_CASE("shape chain and MAC monotonicity in n") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 300; ++t) {
    const DnnArch a = oracle::random_small_arch(rng);
    for (std::size_t i = 0; i + 1 < a.layers.size(); ++i) {
      CHECK(a.layers[i].out == a.layers[i + 1].in);
    }
    auto ch = a.channels;
    ch.push_back(std::uniform_int_distribution<int>(1, 64)(rng));
    const DnnArch b = build_dnn(a.bundle, a.reps + 1, ch, a.downsample_after, a.input_shape);
    CHECK(dnn_total_macs(b) > dnn_total_macs(a));
  }
}

TEST_CASE("catalog round trip and encoding") {
  CHECK(load_catalog(dump_catalog(builtin_bundles())) == builtin_bundles());
  CHECK(builtin_bundles().size() == 5);
  const DnnArch a = build_dnn(bundle("bundle3"), 2, {8, 16}, {1}, {32, 32, 3});
  CHECK(a.encode() == "bundle3|n=2|c=8,16|d=1|in=32x32x3");
  CHECK(rebuild(a) == a);
  CHECK_THROWS_AS(load_catalog(R"([{"id": "x", "ips": [{"kind": "conv_1x1", "kernel": 3}]}])"),
                  InvariantViolation);
  CHECK_THROWS_AS(load_catalog(R"([{"id": "x", "ips": [{"kind": "conv_7x7"}]}])"), ParseError);
  CHECK_THROWS_AS(find_bundle(builtin_bundles(), "bundle9"), InputError);
}
