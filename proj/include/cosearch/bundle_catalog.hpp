#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cosearch/device_model.hpp"

namespace cosearch {

enum class IpKind { conv_kxk, dw_conv_kxk, conv_1x1, pool };

inline constexpr IpKind kAllIpKinds[] = {IpKind::conv_kxk, IpKind::dw_conv_kxk,
                                         IpKind::conv_1x1, IpKind::pool};

std::string_view to_string(IpKind k);
IpKind ip_kind_from_string(std::string_view s);

/// Pool layers carry no multiplier; every other kind needs DSPs.
inline bool uses_dsp(IpKind k) { return k != IpKind::pool; }

struct IpTemplate {
  IpKind kind = IpKind::conv_kxk;
  int kernel = 3;
  int stride = 1;
  int act_bits = 8;
  int weight_bits = 10;

  PackQuery precision() const { return {act_bits, weight_bits}; }
  void validate() const;

  bool operator==(const IpTemplate&) const = default;
};

struct Bundle {
  std::string id;
  std::vector<IpTemplate> ips;

  void validate() const;
  bool has_macs() const;

  bool operator==(const Bundle&) const = default;
};

struct Shape {
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t c = 0;

  std::int64_t elements() const { return h * w * c; }
  bool operator==(const Shape&) const = default;
};

/// Where a layer sits in the network.
enum class Section { stem, body, downsample, head };

struct Layer {
  IpTemplate ip;
  Shape in;
  Shape out;
  Section section = Section::body;
  int replication = -1;  // body/downsample only
  std::int64_t macs = 0;

  bool operator==(const Layer&) const = default;
};

/// Fixed front-end and back-end around the replicated Bundle. Non-depthwise
/// convolutions in the stem emit stem_channels, those in the head emit
/// head_channels.
struct ArchFrame {
  std::vector<IpTemplate> stem;
  int stem_channels = 16;
  std::vector<IpTemplate> head;
  int head_channels = 8;

  /// conv_3x3 stride-1 stem and conv_1x1 head at the bundle's first precision.
  static ArchFrame defaults_for(const Bundle& bundle);

  bool operator==(const ArchFrame&) const = default;
};

struct DnnArch {
  Bundle bundle;
  int reps = 0;
  std::vector<int> channels;          // output channels per replication
  std::vector<int> downsample_after;  // ascending replication indices, 0-based
  Shape input_shape;
  ArchFrame frame;
  std::vector<Layer> layers;  // resolved by build_dnn

  /// Canonical text encoding, used as fingerprint and final tie-break.
  std::string encode() const;

  bool operator==(const DnnArch&) const = default;
};

/// Multiply-accumulates of one layer; out_channels is ignored for pools and
/// must equal in.c for depthwise layers.
std::int64_t layer_macs(const IpTemplate& ip, const Shape& in, std::int64_t out_channels);

/// Output shape of one layer. Convolutions use same padding (ceil(H / stride));
/// pools are unpadded (floor((H - k) / s) + 1, 0 when H < k).
Shape layer_output_shape(const IpTemplate& ip, const Shape& in, std::int64_t out_channels);

/// Down-sampling inserts a 2x2 stride-2 pool after each listed replication.
DnnArch build_dnn(const Bundle& bundle, int reps, std::vector<int> channels,
                  std::vector<int> downsample_after, Shape input_shape);
DnnArch build_dnn(const Bundle& bundle, int reps, std::vector<int> channels,
                  std::vector<int> downsample_after, Shape input_shape, ArchFrame frame);

/// Rebuilds the resolved layer list of an arch whose fields were edited.
DnnArch rebuild(const DnnArch& arch);

std::int64_t dnn_total_macs(const DnnArch& arch);
int max_channels(const DnnArch& arch);

/// Returns a copy of the bundle with every IP at the given precision.
Bundle with_precision(Bundle bundle, PackQuery q);

/// Bundles 1-5: conv3x3, conv5x5, conv3x3+conv5x5, dw3x3+conv1x1, dw5x5+conv1x1.
const std::vector<Bundle>& builtin_bundles();
const Bundle& find_bundle(const std::vector<Bundle>& catalog, std::string_view id);

std::vector<Bundle> load_catalog(std::string_view text);
std::string dump_catalog(const std::vector<Bundle>& catalog);

}  // namespace cosearch
