#include "cosearch/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cosearch {

namespace {

constexpr std::int64_t kUnlimited = std::numeric_limits<std::int64_t>::max();

// JSON has no infinity; fps of a zero-cycle network is written as null.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or_inf(const Json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("expected an object", 0, path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field", 0, join_path(path, key));
  if (it->is_null()) return std::numeric_limits<double>::infinity();
  return get_as<double>(*it, join_path(path, key));
}

const Json& require_node(const Json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("expected an object", 0, path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field", 0, join_path(path, key));
  return *it;
}

template <class T>
std::vector<T> require_list(const Json& obj, std::string_view key, const std::string& path) {
  const Json& node = require_node(obj, key, path);
  const std::string field = join_path(path, key);
  if (!node.is_array()) throw ParseError("expected an array", 0, field);
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(get_as<T>(node[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Shape shape_from_json(const Json& obj, std::string_view key, const std::string& path) {
  auto dims = require_list<std::int64_t>(obj, key, path);
  if (dims.size() != 3) throw ParseError("expected [H, W, C]", 0, join_path(path, key));
  return {dims[0], dims[1], dims[2]};
}

Bounds bounds_from_json(const Json& obj, std::string_view key, const std::string& path,
                        Bounds fallback) {
  if (!obj.contains(key)) return fallback;
  auto v = require_list<int>(obj, key, path);
  if (v.size() != 2) throw ParseError("expected [min, max]", 0, join_path(path, key));
  return {v[0], v[1]};
}

Json shape_to_json(const Shape& s) { return Json::array({s.h, s.w, s.c}); }

std::string_view to_string(Section s) {
  switch (s) {
    case Section::stem: return "stem";
    case Section::body: return "body";
    case Section::downsample: return "downsample";
    case Section::head: return "head";
  }
  return "?";
}

PackScheme pack_scheme_from_string(std::string_view s, const std::string& field) {
  for (auto p : {PackScheme::shared_multiplier_pack, PackScheme::native_parallel, PackScheme::single}) {
    if (to_string(p) == s) return p;
  }
  throw ParseError("unknown pack scheme '" + std::string(s) + "'", 0, field);
}

template <class Fn>
auto rethrow_as_parse(const std::string& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(e.what(), 0, field);
  }
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ParseError(e.what(), line);
  }
}

// ---------------------------------------------------------------------------
// Device model

void to_json(Json& j, const DspMode& m) {
  j = Json{{"wide", m.wide_operand_bits},
           {"narrow", m.narrow_operand_bits},
           {"accumulator", m.accumulator_bits}};
  Json modes = Json::array();
  for (const auto& n : m.native_parallel_muls) modes.push_back({n.bits_a, n.bits_b, n.count});
  j["native_modes"] = modes;
  if (m.packing) j["packing"] = to_string(*m.packing);
}

void to_json(Json& j, const BramResource& r) {
  j = Json{{"name", r.type.name},
           {"capacity_bits", r.type.capacity_bits},
           {"widths", r.type.supported_widths},
           {"count", r.count}};
}

void to_json(Json& j, const DeviceSpec& d) {
  j = Json{{"name", d.name}, {"clock_hz", d.clock_hz}};
  Json dsp{{"count", d.dsp_count}};
  to_json(dsp["mode"], d.dsp_mode);
  j["dsp"] = dsp;
  Json bram = Json::array();
  for (const auto& r : d.bram_blocks) {
    Json e;
    to_json(e, r);
    bram.push_back(std::move(e));
  }
  j["bram"] = bram;
  j["logic_cells"] = d.logic_cells;
  j["ext_bandwidth_bits_per_cycle"] = d.ext_bandwidth_bits_per_cycle;
}

void to_json(Json& j, const PackResult& p) {
  j = Json{{"macs_per_dsp", p.macs_per_dsp}, {"scheme", to_string(p.scheme)}};
}

PackResult pack_result_from_json(const Json& j, const std::string& path) {
  PackResult p;
  p.macs_per_dsp = require<int>(j, "macs_per_dsp", path);
  p.scheme = pack_scheme_from_string(require<std::string>(j, "scheme", path),
                                     join_path(path, "scheme"));
  if (p.macs_per_dsp < 1) throw InvariantViolation("macs_per_dsp", "must be >= 1");
  if ((p.scheme == PackScheme::single) != (p.macs_per_dsp == 1)) {
    throw InvariantViolation("scheme", "inconsistent with macs_per_dsp");
  }
  return p;
}

DeviceSpec device_from_json(const Json& j) {
  DeviceSpec d;
  d.name = require<std::string>(j, "name", "");
  d.clock_hz = require<double>(j, "clock_hz", "");
  const Json& dsp = require_node(j, "dsp", "");
  d.dsp_count = require<std::int64_t>(dsp, "count", "dsp");
  const Json& mode = require_node(dsp, "mode", "dsp");
  d.dsp_mode.wide_operand_bits = require<int>(mode, "wide", "dsp.mode");
  d.dsp_mode.narrow_operand_bits = require<int>(mode, "narrow", "dsp.mode");
  d.dsp_mode.accumulator_bits = require<int>(mode, "accumulator", "dsp.mode");
  if (mode.contains("native_modes")) {
    const Json& modes = mode["native_modes"];
    if (!modes.is_array()) throw ParseError("expected an array", 0, "dsp.mode.native_modes");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const std::string field = "dsp.mode.native_modes[" + std::to_string(i) + "]";
      const Json& m = modes[i];
      if (!m.is_array() || m.size() != 3) throw ParseError("expected [a, b, count]", 0, field);
      d.dsp_mode.native_parallel_muls.push_back(
          {get_as<int>(m[0], field), get_as<int>(m[1], field), get_as<int>(m[2], field)});
    }
  }
  if (mode.contains("packing")) {
    const auto p = require<std::string>(mode, "packing", "dsp.mode");
    if (p == "shared") {
      d.dsp_mode.packing = PackingStyle::shared_multiplier;
    } else if (p == "native") {
      d.dsp_mode.packing = PackingStyle::native_parallel;
    } else {
      throw ParseError("expected 'shared' or 'native'", 0, "dsp.mode.packing");
    }
  }
  const Json& bram = require_node(j, "bram", "");
  if (!bram.is_array()) throw ParseError("expected an array", 0, "bram");
  for (std::size_t i = 0; i < bram.size(); ++i) {
    const std::string path = "bram[" + std::to_string(i) + "]";
    BramResource r;
    r.type.name = require<std::string>(bram[i], "name", path);
    r.count = require<std::int64_t>(bram[i], "count", path);
    // Capacity and widths may be omitted for the built-in block types.
    if (bram[i].contains("capacity_bits") || bram[i].contains("widths")) {
      r.type.capacity_bits = require<std::int64_t>(bram[i], "capacity_bits", path);
      r.type.supported_widths = require_list<int>(bram[i], "widths", path);
    } else {
      const auto& builtin =
          rethrow_as_parse(join_path(path, "name"), [&]() -> const BramBlockType& {
            return builtin_block_type(r.type.name);
          });
      r.type.capacity_bits = builtin.capacity_bits;
      r.type.supported_widths = builtin.supported_widths;
    }
    d.bram_blocks.push_back(std::move(r));
  }
  d.logic_cells = require<std::int64_t>(j, "logic_cells", "");
  d.ext_bandwidth_bits_per_cycle = require<double>(j, "ext_bandwidth_bits_per_cycle", "");
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// Bundles and architectures

void to_json(Json& j, const IpTemplate& ip) {
  j = Json{{"kind", to_string(ip.kind)},
           {"kernel", ip.kernel},
           {"stride", ip.stride},
           {"act_bits", ip.act_bits},
           {"weight_bits", ip.weight_bits}};
}

void to_json(Json& j, const Bundle& b) {
  j = Json{{"id", b.id}, {"ips", Json::array()}};
  for (const auto& ip : b.ips) {
    Json e;
    to_json(e, ip);
    j["ips"].push_back(std::move(e));
  }
}

void to_json(Json& j, const ArchFrame& f) {
  j = Json{{"stem", Json::array()},
           {"stem_channels", f.stem_channels},
           {"head", Json::array()},
           {"head_channels", f.head_channels}};
  for (const auto& ip : f.stem) {
    Json e;
    to_json(e, ip);
    j["stem"].push_back(std::move(e));
  }
  for (const auto& ip : f.head) {
    Json e;
    to_json(e, ip);
    j["head"].push_back(std::move(e));
  }
}

IpTemplate ip_from_json(const Json& j, const std::string& path) {
  IpTemplate ip;
  ip.kind = rethrow_as_parse(join_path(path, "kind"), [&] {
    return ip_kind_from_string(require<std::string>(j, "kind", path));
  });
  ip.kernel = field_or<int>(j, "kernel", path, ip.kind == IpKind::conv_1x1 ? 1 : 3);
  ip.stride = field_or<int>(j, "stride", path, 1);
  ip.act_bits = field_or<int>(j, "act_bits", path, 8);
  ip.weight_bits = field_or<int>(j, "weight_bits", path, 10);
  ip.validate();
  return ip;
}

Bundle bundle_from_json(const Json& j, const std::string& path) {
  Bundle b;
  b.id = require<std::string>(j, "id", path);
  const Json& ips = require_node(j, "ips", path);
  if (!ips.is_array()) throw ParseError("expected an array", 0, join_path(path, "ips"));
  for (std::size_t i = 0; i < ips.size(); ++i) {
    b.ips.push_back(ip_from_json(ips[i], join_path(path, "ips") + "[" + std::to_string(i) + "]"));
  }
  b.validate();
  return b;
}

std::vector<Bundle> catalog_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("bundle catalog must be a JSON array");
  std::vector<Bundle> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Bundle b = bundle_from_json(j[i], "[" + std::to_string(i) + "]");
    for (const auto& prev : out) {
      if (prev.id == b.id) throw InvariantViolation("id", "duplicate bundle id '" + b.id + "'");
    }
    out.push_back(std::move(b));
  }
  return out;
}

Json arch_to_json(const DnnArch& arch, bool with_layers) {
  Json j;
  to_json(j["bundle"], arch.bundle);
  j["reps"] = arch.reps;
  j["channels"] = arch.channels;
  j["downsample_after"] = arch.downsample_after;
  j["input_shape"] = shape_to_json(arch.input_shape);
  to_json(j["frame"], arch.frame);
  j["fingerprint"] = arch.encode();
  j["total_macs"] = dnn_total_macs(arch);
  j["max_channels"] = max_channels(arch);
  if (with_layers) {
    Json layers = Json::array();
    for (const auto& l : arch.layers) {
      Json e{{"section", to_string(l.section)},
             {"replication", l.replication},
             {"kind", to_string(l.ip.kind)},
             {"kernel", l.ip.kernel},
             {"stride", l.ip.stride},
             {"in", shape_to_json(l.in)},
             {"out", shape_to_json(l.out)},
             {"macs", l.macs}};
      layers.push_back(std::move(e));
    }
    j["layers"] = layers;
  }
  return j;
}

DnnArch arch_from_json(const Json& j, const std::vector<Bundle>& catalog, const std::string& path) {
  const Json& bnode = require_node(j, "bundle", path);
  Bundle bundle;
  if (bnode.is_string()) {
    bundle = rethrow_as_parse(join_path(path, "bundle"),
                              [&] { return find_bundle(catalog, bnode.get<std::string>()); });
  } else {
    bundle = bundle_from_json(bnode, join_path(path, "bundle"));
  }
  const int reps = require<int>(j, "reps", path);
  auto channels = require_list<int>(j, "channels", path);
  std::vector<int> ds;
  if (j.contains("downsample_after")) ds = require_list<int>(j, "downsample_after", path);
  const Shape input = shape_from_json(j, "input_shape", path);

  ArchFrame frame = ArchFrame::defaults_for(bundle);
  if (j.contains("frame")) {
    const Json& f = j["frame"];
    const std::string fpath = join_path(path, "frame");
    frame.stem_channels = field_or<int>(f, "stem_channels", fpath, frame.stem_channels);
    frame.head_channels = field_or<int>(f, "head_channels", fpath, frame.head_channels);
    if (f.contains("stem")) {
      frame.stem.clear();
      for (std::size_t i = 0; i < f["stem"].size(); ++i) {
        frame.stem.push_back(ip_from_json(f["stem"][i], fpath + ".stem[" + std::to_string(i) + "]"));
      }
    }
    if (f.contains("head")) {
      frame.head.clear();
      for (std::size_t i = 0; i < f["head"].size(); ++i) {
        frame.head.push_back(ip_from_json(f["head"][i], fpath + ".head[" + std::to_string(i) + "]"));
      }
    }
  }
  return build_dnn(bundle, reps, std::move(channels), std::move(ds), input, std::move(frame));
}

// ---------------------------------------------------------------------------
// Estimator

void to_json(Json& j, const AccelConfig& c) {
  Json alloc = Json::object();
  for (const auto& [kind, n] : c.dsp_alloc) alloc[std::string(to_string(kind))] = n;
  j = Json{{"dsp_alloc", alloc},
           {"tile_height", c.tile_height},
           {"tile_width", c.tile_width},
           {"double_buffer", c.double_buffer},
           {"layer_overhead_cycles", c.layer_overhead_cycles}};
}

AccelConfig accel_config_from_json(const Json& j, const std::string& path) {
  AccelConfig c;
  const Json& alloc = require_node(j, "dsp_alloc", path);
  if (!alloc.is_object()) throw ParseError("expected an object", 0, join_path(path, "dsp_alloc"));
  for (const auto& [key, value] : alloc.items()) {
    const std::string field = join_path(path, "dsp_alloc." + key);
    const IpKind kind = rethrow_as_parse(field, [&] { return ip_kind_from_string(key); });
    c.dsp_alloc[kind] = get_as<std::int64_t>(value, field);
  }
  c.tile_height = field_or<int>(j, "tile_height", path, c.tile_height);
  c.tile_width = field_or<int>(j, "tile_width", path, c.tile_width);
  c.double_buffer = field_or<bool>(j, "double_buffer", path, c.double_buffer);
  c.layer_overhead_cycles =
      field_or<std::int64_t>(j, "layer_overhead_cycles", path, c.layer_overhead_cycles);
  if (c.tile_height < 1 || c.tile_width < 1) throw InvariantViolation("tile", "must be >= 1");
  return c;
}

Json report_to_json(const EstimateReport& r, bool with_layers) {
  Json j{{"total_cycles", r.total_cycles},
         {"clock_hz", r.clock_hz},
         {"latency_s", r.latency_s},
         {"fps", finite_or_null(r.fps)},
         {"dsp_used", r.dsp_used},
         {"bram_blocks_used", Json::object()},
         {"offchip_bits_moved", r.offchip_bits_moved}};
  for (const auto& [name, n] : r.bram_blocks_used) j["bram_blocks_used"][name] = n;
  if (with_layers) {
    Json layers = Json::array();
    for (const auto& l : r.per_layer) {
      layers.push_back({{"compute_cycles", l.compute_cycles},
                        {"memory_cycles", l.memory_cycles},
                        {"cycles", l.cycles},
                        {"tiles", l.tiles},
                        {"in_tile_bits", l.in_tile_bits},
                        {"out_tile_bits", l.out_tile_bits},
                        {"weight_bits", l.weight_bits},
                        {"bram_blocks", l.bram_blocks},
                        {"offchip_bits", l.offchip_bits},
                        {"weights_spilled", l.weights_spilled},
                        {"activations_spilled", l.activations_spilled}});
    }
    j["per_layer"] = layers;
  }
  return j;
}

EstimateReport report_from_json(const Json& j, const std::string& path) {
  EstimateReport r;
  r.total_cycles = require<std::int64_t>(j, "total_cycles", path);
  r.clock_hz = require<double>(j, "clock_hz", path);
  r.latency_s = require<double>(j, "latency_s", path);
  r.fps = number_or_inf(j, "fps", path);
  r.dsp_used = require<std::int64_t>(j, "dsp_used", path);
  r.offchip_bits_moved = require<std::int64_t>(j, "offchip_bits_moved", path);
  const Json& bram = require_node(j, "bram_blocks_used", path);
  for (const auto& [key, value] : bram.items()) {
    r.bram_blocks_used[key] = get_as<std::int64_t>(value, join_path(path, "bram_blocks_used." + key));
  }
  if (j.contains("per_layer")) {
    const Json& layers = j["per_layer"];
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string lp = join_path(path, "per_layer") + "[" + std::to_string(i) + "]";
      const Json& e = layers[i];
      LayerEstimate l;
      l.compute_cycles = require<std::int64_t>(e, "compute_cycles", lp);
      l.memory_cycles = require<std::int64_t>(e, "memory_cycles", lp);
      l.cycles = require<std::int64_t>(e, "cycles", lp);
      l.tiles = require<std::int64_t>(e, "tiles", lp);
      l.in_tile_bits = require<std::int64_t>(e, "in_tile_bits", lp);
      l.out_tile_bits = require<std::int64_t>(e, "out_tile_bits", lp);
      l.weight_bits = require<std::int64_t>(e, "weight_bits", lp);
      l.bram_blocks = require<std::int64_t>(e, "bram_blocks", lp);
      l.offchip_bits = require<std::int64_t>(e, "offchip_bits", lp);
      l.weights_spilled = require<bool>(e, "weights_spilled", lp);
      l.activations_spilled = require<bool>(e, "activations_spilled", lp);
      r.per_layer.push_back(l);
    }
  }
  r.check_invariants();
  return r;
}

void to_json(Json& j, const Violation& v) {
  j = Json{{"constraint", v.constraint},
           {"required", finite_or_null(v.required)},
           {"actual", finite_or_null(v.actual)},
           {"margin", finite_or_null(v.margin)}};
}

Json verdict_to_json(const Verdict& v) {
  Json j{{"feasible", v.feasible}, {"violations", Json::array()}};
  for (const auto& x : v.violations) {
    Json e;
    to_json(e, x);
    j["violations"].push_back(std::move(e));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Search

ImplementationOptions impl_options_from_json(const Json& j, const std::string& path,
                                             ImplementationOptions base) {
  base.tile_height = field_or<int>(j, "tile_height", path, base.tile_height);
  base.tile_width = field_or<int>(j, "tile_width", path, base.tile_width);
  base.double_buffer = field_or<bool>(j, "double_buffer", path, base.double_buffer);
  base.layer_overhead_cycles =
      field_or<std::int64_t>(j, "layer_overhead_cycles", path, base.layer_overhead_cycles);
  if (base.tile_height < 1 || base.tile_width < 1) {
    throw InvariantViolation(join_path(path, "tile"), "must be >= 1");
  }
  return base;
}

SearchConfig search_config_from_json(const Json& j, const DeviceResolver& resolve_device,
                                     const std::vector<Bundle>& catalog) {
  SearchConfig c;
  const Json& dev = require_node(j, "device", "");
  c.device = dev.is_string() ? resolve_device(dev.get<std::string>()) : device_from_json(dev);

  std::vector<Bundle> local = catalog;
  if (j.contains("catalog")) {
    for (auto& b : catalog_from_json(j["catalog"])) {
      auto it = std::find_if(local.begin(), local.end(), [&](const Bundle& x) { return x.id == b.id; });
      if (it != local.end()) {
        *it = std::move(b);
      } else {
        local.push_back(std::move(b));
      }
    }
  }
  if (j.contains("bundles")) {
    for (const auto& id : require_list<std::string>(j, "bundles", "")) {
      c.bundles.push_back(rethrow_as_parse("bundles", [&] { return find_bundle(local, id); }));
    }
  } else {
    c.bundles = local;
  }

  c.target_fps = require<double>(j, "target_fps", "");
  c.input_shape = shape_from_json(j, "input_shape", "");
  c.seed = field_or<std::uint64_t>(j, "seed", "", c.seed);
  c.max_iters = field_or<int>(j, "max_iters", "", c.max_iters);
  c.proposals_per_iter = field_or<int>(j, "proposals_per_iter", "", c.proposals_per_iter);
  c.max_channel_moves = field_or<int>(j, "max_channel_moves", "", c.max_channel_moves);
  c.channel_bounds = bounds_from_json(j, "channel_bounds", "", c.channel_bounds);
  c.reps_bounds = bounds_from_json(j, "reps_bounds", "", c.reps_bounds);
  c.downsample_bounds = bounds_from_json(j, "downsample_bounds", "", c.downsample_bounds);
  c.objective = rethrow_as_parse("objective", [&] {
    return objective_from_string(field_or<std::string>(j, "objective", "", "proxy_score"));
  });
  c.group_selection = rethrow_as_parse("group_selection", [&] {
    return group_selection_from_string(field_or<std::string>(j, "group_selection", "", "uniform"));
  });
  if (j.contains("impl")) c.impl = impl_options_from_json(j["impl"], "impl", c.impl);
  if (j.contains("precision")) {
    auto p = require_list<int>(j, "precision", "");
    if (p.size() != 2) throw ParseError("expected [act_bits, weight_bits]", 0, "precision");
    c.precision = PackQuery{p[0], p[1]};
  }
  if (j.contains("initial")) c.initial = arch_from_json(j["initial"], local, "initial");
  c.validate();
  return c;
}

BundleTemplate bundle_template_from_json(const Json& j) {
  BundleTemplate t;
  t.reps = field_or<int>(j, "reps", "", t.reps);
  t.channels = field_or<int>(j, "channels", "", t.channels);
  if (j.contains("input_shape")) t.input_shape = shape_from_json(j, "input_shape", "");
  if (j.contains("downsample_after")) t.downsample_after = require_list<int>(j, "downsample_after", "");
  t.target_fps = field_or<double>(j, "target_fps", "", t.target_fps);
  t.dsp_weight = field_or<double>(j, "dsp_weight", "", t.dsp_weight);
  t.bram_weight = field_or<double>(j, "bram_weight", "", t.bram_weight);
  if (j.contains("impl")) t.impl = impl_options_from_json(j["impl"], "impl", t.impl);
  if (j.contains("precision")) {
    auto p = require_list<int>(j, "precision", "");
    if (p.size() != 2) throw ParseError("expected [act_bits, weight_bits]", 0, "precision");
    t.precision = PackQuery{p[0], p[1]};
  }
  return t;
}

Json candidate_to_json(const Candidate& c) {
  Json j;
  j["arch"] = arch_to_json(c.arch);
  to_json(j["config"], c.cfg);
  j["report"] = report_to_json(c.report, false);
  j["score"] = c.score;
  return j;
}

Candidate candidate_from_json(const Json& j, const std::string& path) {
  Candidate c;
  c.arch = arch_from_json(require_node(j, "arch", path), builtin_bundles(), join_path(path, "arch"));
  c.cfg = accel_config_from_json(require_node(j, "config", path), join_path(path, "config"));
  c.report = report_from_json(require_node(j, "report", path), join_path(path, "report"));
  c.score = require<double>(j, "score", path);
  if (!(c.score >= 0.0 && c.score <= 1.0)) throw InvariantViolation("score", "must be in [0, 1]");
  return c;
}

Json search_result_to_json(const SearchResult& r) {
  Json j;
  j["seed"] = r.seed;
  j["best"] = candidate_to_json(r.best);
  j["feasible_count"] = r.feasible_count;
  Json trace = Json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"bundle", t.bundle},
                     {"iter", t.iter},
                     {"group", to_string(t.group)},
                     {"accepted", t.accepted},
                     {"score", t.score},
                     {"fps", finite_or_null(t.fps)},
                     {"dsp", t.dsp}});
  }
  j["trace"] = trace;
  return j;
}

SearchResult search_result_from_json(const Json& j) {
  SearchResult r;
  r.seed = require<std::uint64_t>(j, "seed", "");
  r.best = candidate_from_json(require_node(j, "best", ""), "best");
  r.feasible_count = require<std::int64_t>(j, "feasible_count", "");
  const Json& trace = require_node(j, "trace", "");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::string p = "trace[" + std::to_string(i) + "]";
    TraceEntry t;
    t.bundle = require<std::string>(trace[i], "bundle", p);
    t.iter = require<int>(trace[i], "iter", p);
    t.group = rethrow_as_parse(join_path(p, "group"), [&] {
      return coordinate_group_from_string(require<std::string>(trace[i], "group", p));
    });
    t.accepted = require<bool>(trace[i], "accepted", p);
    t.score = require<double>(trace[i], "score", p);
    t.fps = number_or_inf(trace[i], "fps", p);
    t.dsp = require<std::int64_t>(trace[i], "dsp", p);
    r.trace.push_back(std::move(t));
  }
  return r;
}

Json bundle_selection_to_json(const BundleSelection& s) {
  auto point = [](const BundlePoint& p) {
    Json e{{"bundle", p.bundle_id}, {"cost", p.cost}, {"score", p.score}};
    to_json(e["config"], p.cfg);
    e["report"] = report_to_json(p.report, false);
    return e;
  };
  Json j{{"selected", Json::array()}, {"evaluated", Json::array()}, {"diagnostics", s.diagnostics}};
  for (const auto& p : s.selected) j["selected"].push_back(point(p));
  for (const auto& p : s.evaluated) j["evaluated"].push_back(point(p));
  return j;
}

// ---------------------------------------------------------------------------
// GPU

void to_json(Json& j, const GpuArchParams& a) {
  j = Json{{"max_blocks_per_sm", a.max_blocks_per_sm},
           {"max_warps_per_sm", a.max_warps_per_sm},
           {"shared_mem_per_sm", a.shared_mem_per_sm},
           {"shared_mem_alloc_unit", a.shared_mem_alloc_unit},
           {"max_regs_per_sm", a.max_regs_per_sm},
           {"reg_alloc_unit", a.reg_alloc_unit},
           {"warp_size", a.warp_size},
           {"max_threads_per_sm", a.max_threads_per_sm}};
}

void to_json(Json& j, const GpuKernelParams& k) {
  j = Json{{"warps_per_block", k.warps_per_block},
           {"shared_mem_per_block", k.shared_mem_per_block},
           {"regs_per_thread", k.regs_per_thread}};
}

GpuArchParams gpu_arch_from_json(const Json& j, const std::string& path) {
  GpuArchParams a;
  a.max_blocks_per_sm = require<std::int64_t>(j, "max_blocks_per_sm", path);
  a.max_warps_per_sm = require<std::int64_t>(j, "max_warps_per_sm", path);
  a.shared_mem_per_sm = require<std::int64_t>(j, "shared_mem_per_sm", path);
  a.shared_mem_alloc_unit = require<std::int64_t>(j, "shared_mem_alloc_unit", path);
  a.max_regs_per_sm = require<std::int64_t>(j, "max_regs_per_sm", path);
  a.reg_alloc_unit = require<std::int64_t>(j, "reg_alloc_unit", path);
  a.warp_size = require<std::int64_t>(j, "warp_size", path);
  a.max_threads_per_sm =
      field_or<std::int64_t>(j, "max_threads_per_sm", path, a.max_warps_per_sm * a.warp_size);
  a.validate();
  return a;
}

GpuKernelParams gpu_kernel_from_json(const Json& j, const std::string& path) {
  GpuKernelParams k;
  k.warps_per_block = require<std::int64_t>(j, "warps_per_block", path);
  k.shared_mem_per_block = field_or<std::int64_t>(j, "shared_mem_per_block", path, 0);
  k.regs_per_thread = field_or<std::int64_t>(j, "regs_per_thread", path, 0);
  k.validate();
  return k;
}

Json occupancy_to_json(const OccupancyReport& r) {
  auto limit = [](std::int64_t v) { return v == kUnlimited ? Json(nullptr) : Json(v); };
  return Json{{"blocks_per_sm", r.blocks_per_sm},
              {"limiting_factor", to_string(r.limiting_factor)},
              {"active_warps", r.active_warps},
              {"utilization", r.utilization},
              {"limits",
               {{"blocks", limit(r.limit_blocks)},
                {"warps", limit(r.limit_warps)},
                {"shared_mem", limit(r.limit_shared_mem)},
                {"registers", limit(r.limit_registers)}}}};
}

OccupancyReport occupancy_from_json(const Json& j, const std::string& path) {
  OccupancyReport r;
  r.blocks_per_sm = require<std::int64_t>(j, "blocks_per_sm", path);
  r.limiting_factor = rethrow_as_parse(join_path(path, "limiting_factor"), [&] {
    return limiting_factor_from_string(require<std::string>(j, "limiting_factor", path));
  });
  r.active_warps = require<std::int64_t>(j, "active_warps", path);
  r.utilization = require<double>(j, "utilization", path);
  const Json& limits = require_node(j, "limits", path);
  const std::string lp = join_path(path, "limits");
  auto limit = [&](std::string_view key) {
    return field_or<std::int64_t>(limits, key, lp, kUnlimited);
  };
  r.limit_blocks = limit("blocks");
  r.limit_warps = limit("warps");
  r.limit_shared_mem = limit("shared_mem");
  r.limit_registers = limit("registers");
  if (r.blocks_per_sm < 1) throw InvariantViolation("blocks_per_sm", "must be >= 1");
  if (r.utilization < 0.0 || r.utilization > 1.0) {
    throw InvariantViolation("utilization", "outside [0, 1]");
  }
  return r;
}

}  // namespace cosearch
