#include "cosearch/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "cosearch/codesign_search.hpp"
#include "cosearch/errors.hpp"
#include "cosearch/gpu_occupancy.hpp"
#include "cosearch/json_io.hpp"
#include "cosearch/perf_estimator.hpp"
#include "cosearch/quality_proxy.hpp"

namespace cosearch {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Context {
  std::string command;
  std::string format = "table";
  std::string output;
  std::optional<std::uint64_t> seed;
  bool no_timestamp = false;
  bool verbose = false;
  std::vector<std::string> inputs;

  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  std::string read_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    inputs.push_back(path);
    return ss.str();
  }

  Json read_json(const std::string& path) {
    try {
      return parse_json(read_input(path));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()) + " in '" + path + "'");
    }
  }

  DeviceSpec device(const std::string& ref) {
    if (fs::is_regular_file(ref)) return load_device(read_input(ref));
    if (const char* dir = std::getenv(kDeviceDirEnv); dir != nullptr && *dir != '\0') {
      const fs::path p = fs::path(dir) / (ref + ".json");
      if (fs::is_regular_file(p)) return load_device(read_input(p.string()));
    }
    for (const auto& n : builtin_device_names()) {
      if (n == ref) return builtin_device(ref);
    }
    throw InputError("unknown device '" + ref + "': not a file, not in $" +
                     std::string(kDeviceDirEnv) + ", not built in");
  }

  std::vector<Bundle> catalog(const std::string& path) {
    if (path.empty()) return builtin_bundles();
    return catalog_from_json(read_json(path));
  }

  Json manifest() const {
    Json m{{"command", command},
           {"inputs", inputs},
           {"seed", seed.value_or(1)},
           {"output", output.empty() ? Json(nullptr) : Json(output)},
           {"format", format}};
    if (!no_timestamp) m["timestamp"] = utc_timestamp();
    return m;
  }

  void write(const std::string& text) {
    if (output.empty()) {
      *out << text;
      return;
    }
    std::ofstream f(output, std::ios::binary);
    if (!f) throw InputError("cannot write '" + output + "'");
    f << text;
  }

  // JSON output wraps the result with the manifest; table output is free-form.
  void emit(const Json& result, const std::string& table, const std::string& csv = {}) {
    if (format == "json") {
      Json doc{{"manifest", manifest()}, {"result", result}};
      write(doc.dump(2) + "\n");
    } else if (format == "csv") {
      if (csv.empty()) throw InputError("--format csv is only available for search traces");
      write(csv);
    } else {
      write(table);
    }
  }

  void note(const std::string& msg) const {
    if (verbose) *err << msg << "\n";
  }
};

struct ProxyHolder {
  SaturatingComputeProxy base;
  std::optional<TableProxy> table;

  const QualityProxy& get() const {
    if (table) return *table;
    return base;
  }
};

std::unique_ptr<ProxyHolder> make_proxy(Context& ctx, const std::string& scores, double kappa) {
  auto holder = std::make_unique<ProxyHolder>(ProxyHolder{SaturatingComputeProxy(kappa), {}});
  if (!scores.empty()) {
    holder->table = TableProxy::load(ctx.read_input(scores));
    holder->table->set_fallback(&holder->base);
  }
  return holder;
}

std::string report_table(const EstimateReport& r, const Verdict& v) {
  std::ostringstream t;
  t << "total cycles   " << r.total_cycles << "\n"
    << "latency        " << num(r.latency_s * 1e3) << " ms\n"
    << "fps            " << num(r.fps) << "\n"
    << "dsp used       " << r.dsp_used << "\n";
  for (const auto& [name, n] : r.bram_blocks_used) t << pad("bram " + name, 15) << n << "\n";
  t << "off-chip bits  " << r.offchip_bits_moved << "\n";
  t << "feasible       " << (v.feasible ? "yes" : "no") << "\n";
  for (const auto& x : v.violations) {
    t << "  violates " << x.constraint << ": required " << num(x.required) << ", actual "
      << num(x.actual) << "\n";
  }
  return t.str();
}

std::string layers_table(const DnnArch& arch, const EstimateReport& r) {
  std::ostringstream t;
  t << pad("#", 4) << pad("kind", 12) << pad("in", 16) << pad("out", 16) << pad("macs", 14)
    << pad("compute", 12) << pad("memory", 12) << "cycles\n";
  for (std::size_t i = 0; i < arch.layers.size() && i < r.per_layer.size(); ++i) {
    const Layer& l = arch.layers[i];
    const LayerEstimate& e = r.per_layer[i];
    auto shape = [](const Shape& s) {
      return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
    };
    t << pad(std::to_string(i), 4) << pad(std::string(to_string(l.ip.kind)), 12)
      << pad(shape(l.in), 16) << pad(shape(l.out), 16) << pad(std::to_string(l.macs), 14)
      << pad(std::to_string(e.compute_cycles), 12) << pad(std::to_string(e.memory_cycles), 12)
      << e.cycles << "\n";
  }
  return t.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;

  CLI::App app{"Accelerator and network co-design toolkit", "cosearch"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--format", ctx.format, "Output format")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  app.add_option("--output,-o", ctx.output, "Write the report to this file");
  app.add_option("--seed", ctx.seed, "Random seed (randomized commands)");
  app.add_flag("--no-timestamp", ctx.no_timestamp, "Omit the timestamp from JSON manifests");
  app.add_flag("--verbose,-v", ctx.verbose, "Diagnostics on stderr");

  std::function<void()> action;

  // pack / peak
  std::string device_ref;
  int act_bits = 0;
  int weight_bits = 0;
  std::optional<double> freq;

  auto* pack = app.add_subcommand("pack", "MACs per DSP slice for a precision pair");
  pack->add_option("--device", device_ref, "Built-in name, spec file, or name in $" +
                                               std::string(kDeviceDirEnv))
      ->required();
  pack->add_option("--act", act_bits, "Activation bits")->required();
  pack->add_option("--weight", weight_bits, "Weight bits")->required();
  pack->callback([&] {
    action = [&] {
      const DeviceSpec d = ctx.device(device_ref);
      const PackResult p = pack_factor(d, {act_bits, weight_bits});
      Json j{{"device", d.name}, {"act_bits", act_bits}, {"weight_bits", weight_bits}};
      to_json(j["pack"], p);
      ctx.emit(j, std::to_string(p.macs_per_dsp) + " MACs/DSP (" +
                      std::string(to_string(p.scheme)) + ")\n");
    };
  });

  auto* peak = app.add_subcommand("peak", "Peak GMACs of a device at a precision pair");
  peak->add_option("--device", device_ref, "Device")->required();
  peak->add_option("--act", act_bits, "Activation bits")->required();
  peak->add_option("--weight", weight_bits, "Weight bits")->required();
  peak->add_option("--freq", freq, "Clock in Hz (defaults to the device clock)");
  peak->callback([&] {
    action = [&] {
      DeviceSpec d = ctx.device(device_ref);
      if (freq) {
        if (!(*freq > 0.0)) throw InvariantViolation("freq", "must be > 0");
        d.clock_hz = *freq;
      }
      const PackQuery q{act_bits, weight_bits};
      const double g = peak_gmacs(d, q);
      Json j{{"device", d.name},
             {"act_bits", act_bits},
             {"weight_bits", weight_bits},
             {"clock_hz", d.clock_hz},
             {"macs_per_dsp", pack_factor(d, q).macs_per_dsp},
             {"gmacs", g}};
      ctx.emit(j, num(g) + " GMACs\n");
    };
  });

  // bram
  std::optional<std::int64_t> bits;
  std::optional<std::int64_t> elements;
  std::optional<int> element_width;
  std::string block_name;
  std::string bram_mode = "capacity";
  auto* bram = app.add_subcommand("bram", "Block RAM count for a buffer");
  bram->add_option("--bits", bits, "Buffer size in bits");
  bram->add_option("--elements", elements, "Element count (with --width)");
  bram->add_option("--width", element_width, "Element width in bits");
  bram->add_option("--block", block_name, "Block type")->required();
  bram->add_option("--mode", bram_mode, "capacity or width_aligned")
      ->check(CLI::IsMember({"capacity", "width_aligned"}));
  bram->callback([&] {
    action = [&] {
      const BramBlockType& block = builtin_block_type(block_name);
      std::int64_t blocks = 0;
      Json j{{"block", block.name}, {"mode", bram_mode}};
      if (bram_mode == "width_aligned") {
        if (!elements || !element_width) {
          throw InputError("--mode width_aligned needs --elements and --width");
        }
        blocks = bram_blocks_width_aligned(*elements, *element_width, block);
        j["elements"] = *elements;
        j["element_bits"] = *element_width;
        j["aligned_width"] = aligned_width(*element_width, block);
      } else {
        std::int64_t total = 0;
        if (bits) {
          total = *bits;
        } else if (elements && element_width) {
          total = *elements * *element_width;
        } else {
          throw InputError("bram needs --bits or --elements with --width");
        }
        blocks = bram_blocks(total, block);
        j["bits"] = total;
      }
      j["blocks"] = blocks;
      ctx.emit(j, std::to_string(blocks) + "\n");
    };
  });

  // estimate
  std::string arch_path;
  std::string config_path;
  std::string catalog_path;
  double target_fps = 0.0;
  bool with_layers = false;
  auto* est = app.add_subcommand("estimate", "Latency and resource report for one design");
  est->add_option("--arch", arch_path, "Architecture JSON")->required();
  est->add_option("--device", device_ref, "Device")->required();
  est->add_option("--config", config_path, "Accelerator config JSON (fitted when omitted)");
  est->add_option("--catalog", catalog_path, "Bundle catalog JSON");
  est->add_option("--target-fps", target_fps, "Throughput target for the verdict");
  est->add_flag("--layers", with_layers, "Per-layer breakdown");
  est->callback([&] {
    action = [&] {
      const DeviceSpec d = ctx.device(device_ref);
      const auto cat = ctx.catalog(catalog_path);
      const DnnArch arch = arch_from_json(ctx.read_json(arch_path), cat);
      if (target_fps < 0.0) throw InvariantViolation("target-fps", "must be >= 0");
      AccelConfig cfg;
      if (!config_path.empty()) {
        cfg = accel_config_from_json(ctx.read_json(config_path));
      } else if (target_fps > 0.0) {
        cfg = fit_implementation(arch, d, target_fps, {}).cfg;
      } else {
        cfg = proportional_config(arch, d, d.dsp_count, {});
      }
      const EstimateReport r = estimate(arch, cfg, d);
      const Verdict v = check_feasible(r, d, target_fps);
      Json j;
      j["arch"] = arch_to_json(arch);
      to_json(j["config"], cfg);
      j["report"] = report_to_json(r, with_layers);
      j["verdict"] = verdict_to_json(v);
      std::string table = "arch           " + arch.encode() + "\n" + report_table(r, v);
      if (with_layers) table += "\n" + layers_table(arch, r);
      ctx.emit(j, table);
    };
  });

  // bundles
  std::string proxy_scores;
  double kappa = kDefaultKappa;
  std::string template_path;
  auto* bundles = app.add_subcommand("bundles", "Pareto selection of candidate Bundles");
  bundles->add_option("--device", device_ref, "Device")->required();
  bundles->add_option("--catalog", catalog_path, "Bundle catalog JSON (built-ins when omitted)");
  bundles->add_option("--proxy-scores", proxy_scores, "Score table JSON");
  bundles->add_option("--kappa", kappa, "Saturation constant of the compute proxy");
  bundles->add_option("--template", template_path, "Template network JSON");
  bundles->callback([&] {
    action = [&] {
      const DeviceSpec d = ctx.device(device_ref);
      const auto cat = ctx.catalog(catalog_path);
      const auto proxy = make_proxy(ctx, proxy_scores, kappa);
      const BundleTemplate tmpl =
          template_path.empty() ? BundleTemplate{} : bundle_template_from_json(ctx.read_json(template_path));
      const BundleSelection sel = select_bundles(cat, proxy->get(), d, tmpl);
      for (const auto& msg : sel.diagnostics) ctx.note(msg);
      std::ostringstream t;
      t << pad("bundle", 12) << pad("cost", 14) << pad("score", 14) << pad("fps", 14)
        << "pareto\n";
      for (const auto& p : sel.evaluated) {
        const bool on = std::any_of(sel.selected.begin(), sel.selected.end(),
                                    [&](const BundlePoint& s) { return s.bundle_id == p.bundle_id; });
        t << pad(p.bundle_id, 12) << pad(num(p.cost), 14) << pad(num(p.score), 14)
          << pad(num(p.report.fps), 14) << (on ? "*" : "") << "\n";
      }
      for (const auto& msg : sel.diagnostics) t << "# " << msg << "\n";
      ctx.emit(bundle_selection_to_json(sel), t.str());
    };
  });

  // search
  std::string trace_path;
  int workers = 1;
  auto* search = app.add_subcommand("search", "Stochastic coordinate descent co-design search");
  search->add_option("--config", config_path, "Search config JSON")->required();
  search->add_option("--catalog", catalog_path, "Bundle catalog JSON");
  search->add_option("--proxy-scores", proxy_scores, "Score table JSON");
  search->add_option("--kappa", kappa, "Saturation constant of the compute proxy");
  search->add_option("--trace", trace_path, "Write the search trace CSV here");
  search->add_option("--workers", workers, "Evaluation threads")->check(CLI::PositiveNumber);
  search->callback([&] {
    action = [&] {
      const auto cat = ctx.catalog(catalog_path);
      SearchConfig cfg = search_config_from_json(
          ctx.read_json(config_path), [&](const std::string& ref) { return ctx.device(ref); }, cat);
      if (ctx.seed) {
        cfg.seed = *ctx.seed;
      } else {
        ctx.seed = cfg.seed;
      }
      const auto proxy = make_proxy(ctx, proxy_scores, kappa);
      const SearchResult res = scd_search(cfg, proxy->get(), workers);
      const std::string csv = trace_csv(res);
      if (!trace_path.empty()) {
        std::ofstream f(trace_path, std::ios::binary);
        if (!f) throw InputError("cannot write '" + trace_path + "'");
        f << csv;
      }
      ctx.note("feasible evaluations: " + std::to_string(res.feasible_count));
      const Candidate& b = res.best;
      std::ostringstream t;
      t << "seed           " << res.seed << "\n"
        << "bundle         " << b.arch.bundle.id << "\n"
        << "arch           " << b.arch.encode() << "\n"
        << "score          " << num(b.score) << "\n"
        << report_table(b.report, check_feasible(b.report, cfg.device, cfg.target_fps));
      ctx.emit(search_result_to_json(res), t.str(), csv);
    };
  });

  // occupancy
  std::string gpu_ref;
  std::string kernel_path;
  std::optional<std::int64_t> warps;
  std::int64_t smem = 0;
  std::int64_t regs = 0;
  auto* occ = app.add_subcommand("occupancy", "Resident thread blocks per SM");
  occ->add_option("--arch", gpu_ref, "GPU name (pascal, volta, turing) or params JSON")->required();
  occ->add_option("--kernel", kernel_path, "Kernel params JSON");
  occ->add_option("--warps", warps, "Warps per block");
  occ->add_option("--smem", smem, "Shared memory per block, bytes");
  occ->add_option("--regs", regs, "Registers per thread");
  occ->callback([&] {
    action = [&] {
      GpuArchParams a;
      if (fs::is_regular_file(gpu_ref)) {
        a = gpu_arch_from_json(ctx.read_json(gpu_ref));
      } else {
        a = builtin_gpu(gpu_ref);
      }
      GpuKernelParams k;
      if (!kernel_path.empty()) {
        k = gpu_kernel_from_json(ctx.read_json(kernel_path));
      } else if (warps) {
        k = {*warps, smem, regs};
      } else {
        throw InputError("occupancy needs --kernel or --warps");
      }
      const OccupancyReport r = occupancy(a, k);
      Json j;
      to_json(j["arch"], a);
      to_json(j["kernel"], k);
      j["report"] = occupancy_to_json(r);
      std::ostringstream t;
      t << "blocks/SM      " << r.blocks_per_sm << "\n"
        << "limited by     " << to_string(r.limiting_factor) << "\n"
        << "active warps   " << r.active_warps << "\n"
        << "utilization    " << num(r.utilization) << "\n";
      ctx.emit(j, t.str());
    };
  });

  // device dump / catalog dump: raw JSON documents, loadable as inputs.
  std::string dump_name;
  auto* device = app.add_subcommand("device", "Device specs");
  device->require_subcommand(1);
  auto* device_dump = device->add_subcommand("dump", "Print device spec JSON");
  device_dump->add_option("name", dump_name, "Device (all built-ins when omitted)");
  device_dump->callback([&] {
    action = [&] {
      if (!dump_name.empty()) {
        ctx.write(dump_device(ctx.device(dump_name)) + "\n");
        return;
      }
      Json all = Json::array();
      for (const auto& n : builtin_device_names()) {
        Json e;
        to_json(e, builtin_device(n));
        all.push_back(std::move(e));
      }
      ctx.write(all.dump(2) + "\n");
    };
  });

  auto* catalog = app.add_subcommand("catalog", "Bundle catalogs");
  catalog->require_subcommand(1);
  auto* catalog_dump = catalog->add_subcommand("dump", "Print the built-in Bundle catalog JSON");
  catalog_dump->callback([&] { action = [&] { ctx.write(dump_catalog(builtin_bundles()) + "\n"); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (const auto* sub : app.get_subcommands()) {
    ctx.command = sub->get_name();
    for (const auto* nested : sub->get_subcommands()) ctx.command += " " + nested->get_name();
  }

  try {
    if (action) action();
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"cosearch"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cosearch
