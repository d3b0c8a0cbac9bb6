#include "cosearch/bundle_catalog.hpp"

#include <algorithm>
#include <sstream>

#include "cosearch/errors.hpp"
#include "cosearch/json_io.hpp"

namespace cosearch {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

IpTemplate downsample_pool(const Bundle& bundle) {
  IpTemplate p{IpKind::pool, 2, 2, 8, 8};
  if (!bundle.ips.empty()) {
    p.act_bits = bundle.ips.front().act_bits;
    p.weight_bits = bundle.ips.front().weight_bits;
  }
  return p;
}

void append_layer(std::vector<Layer>& layers, const IpTemplate& ip, Shape& cur,
                  std::int64_t conv_channels, Section section, int replication) {
  const std::int64_t out_c = ip.kind == IpKind::dw_conv_kxk || ip.kind == IpKind::pool
                                 ? cur.c
                                 : conv_channels;
  Shape out = layer_output_shape(ip, cur, out_c);
  if (out.h < 1 || out.w < 1) {
    std::ostringstream msg;
    msg << "spatial collapse: " << to_string(ip.kind) << " (k=" << ip.kernel
        << ", s=" << ip.stride << ") maps " << cur.h << "x" << cur.w << " to " << out.h << "x"
        << out.w;
    if (replication >= 0) msg << " after replication " << replication;
    throw ConfigurationError(msg.str());
  }
  layers.push_back({ip, cur, out, section, replication, layer_macs(ip, cur, out_c)});
  cur = out;
}

}  // namespace

std::string_view to_string(IpKind k) {
  switch (k) {
    case IpKind::conv_kxk: return "conv_kxk";
    case IpKind::dw_conv_kxk: return "dw_conv_kxk";
    case IpKind::conv_1x1: return "conv_1x1";
    case IpKind::pool: return "pool";
  }
  return "?";
}

IpKind ip_kind_from_string(std::string_view s) {
  for (IpKind k : kAllIpKinds) {
    if (to_string(k) == s) return k;
  }
  throw InputError("unknown IP kind '" + std::string(s) + "'");
}

void IpTemplate::validate() const {
  if (kernel < 1) throw InvariantViolation("kernel", "must be >= 1");
  if (stride < 1) throw InvariantViolation("stride", "must be >= 1");
  if (kind == IpKind::conv_1x1 && kernel != 1) {
    throw InvariantViolation("kernel", "conv_1x1 requires kernel 1");
  }
  precision().validate();
}

void Bundle::validate() const {
  if (id.empty()) throw InvariantViolation("id", "must not be empty");
  if (ips.empty()) throw InvariantViolation("ips", "bundle '" + id + "' has no IPs");
  for (const auto& ip : ips) ip.validate();
}

bool Bundle::has_macs() const {
  return std::any_of(ips.begin(), ips.end(), [](const IpTemplate& ip) { return uses_dsp(ip.kind); });
}

ArchFrame ArchFrame::defaults_for(const Bundle& bundle) {
  ArchFrame f;
  IpTemplate stem{IpKind::conv_kxk, 3, 1, 8, 10};
  IpTemplate head{IpKind::conv_1x1, 1, 1, 8, 10};
  if (!bundle.ips.empty()) {
    stem.act_bits = head.act_bits = bundle.ips.front().act_bits;
    stem.weight_bits = head.weight_bits = bundle.ips.front().weight_bits;
  }
  f.stem = {stem};
  f.head = {head};
  return f;
}

Shape layer_output_shape(const IpTemplate& ip, const Shape& in, std::int64_t out_channels) {
  switch (ip.kind) {
    case IpKind::pool: {
      auto dim = [&](std::int64_t x) {
        return x < ip.kernel ? std::int64_t{0} : (x - ip.kernel) / ip.stride + 1;
      };
      return {dim(in.h), dim(in.w), in.c};
    }
    case IpKind::dw_conv_kxk:
      return {ceil_div(in.h, ip.stride), ceil_div(in.w, ip.stride), in.c};
    case IpKind::conv_kxk:
    case IpKind::conv_1x1:
      return {ceil_div(in.h, ip.stride), ceil_div(in.w, ip.stride), out_channels};
  }
  return in;
}

std::int64_t layer_macs(const IpTemplate& ip, const Shape& in, std::int64_t out_channels) {
  if (in.h < 1 || in.w < 1 || in.c < 1) throw ShapeError("input shape must be positive");
  if (ip.kind == IpKind::pool) return 0;
  if (out_channels < 1) throw ShapeError("output channels must be positive");
  if (ip.kind == IpKind::dw_conv_kxk && out_channels != in.c) {
    throw ShapeError("depthwise layer needs out_channels == in_channels (" +
                     std::to_string(out_channels) + " != " + std::to_string(in.c) + ")");
  }
  const Shape out = layer_output_shape(ip, in, out_channels);
  const std::int64_t spatial = out.h * out.w;
  const std::int64_t k2 = std::int64_t{ip.kernel} * ip.kernel;
  switch (ip.kind) {
    case IpKind::conv_kxk: return k2 * in.c * out_channels * spatial;
    case IpKind::dw_conv_kxk: return k2 * in.c * spatial;
    case IpKind::conv_1x1: return in.c * out_channels * spatial;
    case IpKind::pool: break;
  }
  return 0;
}

DnnArch build_dnn(const Bundle& bundle, int reps, std::vector<int> channels,
                  std::vector<int> downsample_after, Shape input_shape) {
  ArchFrame frame = ArchFrame::defaults_for(bundle);
  return build_dnn(bundle, reps, std::move(channels), std::move(downsample_after), input_shape,
                   std::move(frame));
}

DnnArch build_dnn(const Bundle& bundle, int reps, std::vector<int> channels,
                  std::vector<int> downsample_after, Shape input_shape, ArchFrame frame) {
  bundle.validate();
  if (reps < 1) throw ConfigurationError("replication count must be >= 1");
  if (channels.size() != static_cast<std::size_t>(reps)) {
    throw ConfigurationError("channel vector has " + std::to_string(channels.size()) +
                             " entries for " + std::to_string(reps) + " replications");
  }
  for (int c : channels) {
    if (c < 1) throw ConfigurationError("channel counts must be >= 1");
  }
  if (input_shape.h < 1 || input_shape.w < 1 || input_shape.c < 1) {
    throw ConfigurationError("input shape must be positive");
  }
  if (frame.stem_channels < 1 || frame.head_channels < 1) {
    throw ConfigurationError("stem/head channels must be >= 1");
  }
  for (const auto& ip : frame.stem) ip.validate();
  for (const auto& ip : frame.head) ip.validate();

  std::sort(downsample_after.begin(), downsample_after.end());
  if (std::adjacent_find(downsample_after.begin(), downsample_after.end()) !=
      downsample_after.end()) {
    throw ConfigurationError("duplicate down-sampling position");
  }
  for (int idx : downsample_after) {
    if (idx < 0 || idx >= reps) {
      throw ConfigurationError("down-sampling position " + std::to_string(idx) +
                               " outside [0, " + std::to_string(reps - 1) + "]");
    }
  }

  DnnArch arch;
  arch.bundle = bundle;
  arch.reps = reps;
  arch.channels = std::move(channels);
  arch.downsample_after = std::move(downsample_after);
  arch.input_shape = input_shape;
  arch.frame = std::move(frame);

  Shape cur = input_shape;
  for (const auto& ip : arch.frame.stem) {
    append_layer(arch.layers, ip, cur, arch.frame.stem_channels, Section::stem, -1);
  }
  const IpTemplate pool = downsample_pool(bundle);
  auto ds = arch.downsample_after.begin();
  for (int r = 0; r < reps; ++r) {
    for (const auto& ip : bundle.ips) {
      append_layer(arch.layers, ip, cur, arch.channels[r], Section::body, r);
    }
    if (ds != arch.downsample_after.end() && *ds == r) {
      append_layer(arch.layers, pool, cur, cur.c, Section::downsample, r);
      ++ds;
    }
  }
  for (const auto& ip : arch.frame.head) {
    append_layer(arch.layers, ip, cur, arch.frame.head_channels, Section::head, -1);
  }
  return arch;
}

DnnArch rebuild(const DnnArch& arch) {
  return build_dnn(arch.bundle, arch.reps, arch.channels, arch.downsample_after,
                   arch.input_shape, arch.frame);
}

std::int64_t dnn_total_macs(const DnnArch& arch) {
  std::int64_t total = 0;
  for (const auto& l : arch.layers) total += l.macs;
  return total;
}

int max_channels(const DnnArch& arch) {
  return arch.channels.empty() ? 0 : *std::max_element(arch.channels.begin(), arch.channels.end());
}

std::string DnnArch::encode() const {
  std::ostringstream s;
  s << bundle.id << "|n=" << reps << "|c=";
  for (std::size_t i = 0; i < channels.size(); ++i) s << (i ? "," : "") << channels[i];
  s << "|d=";
  for (std::size_t i = 0; i < downsample_after.size(); ++i) {
    s << (i ? "," : "") << downsample_after[i];
  }
  s << "|in=" << input_shape.h << "x" << input_shape.w << "x" << input_shape.c;
  return s.str();
}

Bundle with_precision(Bundle bundle, PackQuery q) {
  q.validate();
  for (auto& ip : bundle.ips) {
    ip.act_bits = q.act_bits;
    ip.weight_bits = q.weight_bits;
  }
  return bundle;
}

const std::vector<Bundle>& builtin_bundles() {
  static const std::vector<Bundle> catalog = {
      {"bundle1", {{IpKind::conv_kxk, 3, 1, 8, 10}}},
      {"bundle2", {{IpKind::conv_kxk, 5, 1, 8, 10}}},
      {"bundle3", {{IpKind::conv_kxk, 3, 1, 8, 10}, {IpKind::conv_kxk, 5, 1, 8, 10}}},
      {"bundle4", {{IpKind::dw_conv_kxk, 3, 1, 8, 10}, {IpKind::conv_1x1, 1, 1, 8, 10}}},
      {"bundle5", {{IpKind::dw_conv_kxk, 5, 1, 8, 10}, {IpKind::conv_1x1, 1, 1, 8, 10}}},
  };
  return catalog;
}

const Bundle& find_bundle(const std::vector<Bundle>& catalog, std::string_view id) {
  for (const auto& b : catalog) {
    if (b.id == id) return b;
  }
  throw InputError("bundle '" + std::string(id) + "' not in catalog");
}

std::vector<Bundle> load_catalog(std::string_view text) {
  return catalog_from_json(parse_json(text));
}

std::string dump_catalog(const std::vector<Bundle>& catalog) {
  Json j = Json::array();
  for (const auto& b : catalog) {
    Json jb;
    to_json(jb, b);
    j.push_back(std::move(jb));
  }
  return j.dump(2);
}

}  // namespace cosearch
