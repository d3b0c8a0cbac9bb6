#pragma once

// Reference computations and fixtures shared by the unit and acceptance suites.
// The oracles recount from first principles instead of calling the code under test.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "cosearch/bundle_catalog.hpp"
#include "cosearch/codesign_search.hpp"
#include "cosearch/errors.hpp"
#include "cosearch/gpu_occupancy.hpp"
#include "cosearch/parallel_eval.hpp"
#include "cosearch/pareto.hpp"

namespace oracle {

using namespace cosearch;

// Output positions by walking the window over the (same-padded or valid) input.
inline std::int64_t out_positions(std::int64_t in, int kernel, int stride, bool valid) {
  std::int64_t n = 0;
  for (std::int64_t o = 0;; ++o) {
    const std::int64_t start = o * stride;
    if (valid ? start + kernel > in : start >= in) break;
    ++n;
  }
  return n;
}

// Loop-nest MAC counter: one tick per (output pixel, output channel, tap).
inline std::int64_t loop_macs(const IpTemplate& ip, const Shape& in, std::int64_t cout) {
  if (ip.kind == IpKind::pool) return 0;
  const bool dw = ip.kind == IpKind::dw_conv_kxk;
  const std::int64_t ho = out_positions(in.h, ip.kernel, ip.stride, false);
  const std::int64_t wo = out_positions(in.w, ip.kernel, ip.stride, false);
  const std::int64_t oc_n = dw ? in.c : cout;
  std::int64_t n = 0;
  for (std::int64_t y = 0; y < ho; ++y)
    for (std::int64_t x = 0; x < wo; ++x)
      for (std::int64_t oc = 0; oc < oc_n; ++oc)
        for (int ky = 0; ky < ip.kernel; ++ky)
          for (int kx = 0; kx < ip.kernel; ++kx)
            for (std::int64_t ic = 0; ic < in.c; ++ic) {
              if (dw && ic != oc) continue;
              ++n;
            }
  return n;
}

// O(n^2) dominance check with the keep-first duplicate rule.
inline std::vector<std::size_t> pareto_quadratic(const std::vector<CostScore>& pts) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool out = false;
    for (std::size_t j = 0; j < pts.size() && !out; ++j) {
      if (i == j) continue;
      const bool weakly = pts[j].cost <= pts[i].cost && pts[j].score >= pts[i].score;
      const bool strict = pts[j].cost < pts[i].cost || pts[j].score > pts[i].score;
      if (weakly && strict) out = true;
      if (!strict && weakly && j < i) out = true;  // identical, earlier index wins
    }
    if (!out) keep.push_back(i);
  }
  return keep;
}

struct BruteOccupancy {
  std::int64_t blocks = 0;
  LimitingFactor factor = LimitingFactor::blocks;
};

// Largest block count whose summed demand fits every SM budget; the limiting
// factor is the first resource (in tie order) that one more block would break.
inline BruteOccupancy occupancy_search(const GpuArchParams& a, const GpuKernelParams& k) {
  auto up = [](std::int64_t v, std::int64_t unit) { return (v + unit - 1) / unit * unit; };
  const std::int64_t smem = up(k.shared_mem_per_block, a.shared_mem_alloc_unit);
  const std::int64_t regs = up(k.regs_per_thread * a.warp_size, a.reg_alloc_unit) * k.warps_per_block;
  auto fits = [&](std::int64_t b, int which) {
    switch (which) {
      case 0: return b <= a.max_blocks_per_sm;
      case 1: return b * k.warps_per_block <= a.max_warps_per_sm;
      case 2: return b * smem <= a.shared_mem_per_sm;
      default: return b * regs <= a.max_regs_per_sm;
    }
  };
  BruteOccupancy r;
  for (std::int64_t b = 1;; ++b) {
    bool all = true;
    for (int w = 0; w < 4; ++w) all = all && fits(b, w);
    if (!all) {
      r.blocks = b - 1;
      for (int w = 0; w < 4; ++w) {
        if (!fits(b, w)) {
          r.factor = static_cast<LimitingFactor>(w);
          break;
        }
      }
      return r;
    }
  }
}

// Every arch of a small space: reps in bounds, channels drawn from `widths`,
// every down-sampling subset whose size is within bounds.
inline std::vector<DnnArch> enumerate_space(const Bundle& bundle, const SearchConfig& cfg,
                                            const std::vector<int>& widths) {
  std::vector<DnnArch> out;
  for (int n = cfg.reps_bounds.min; n <= cfg.reps_bounds.max; ++n) {
    std::int64_t combos = 1;
    for (int i = 0; i < n; ++i) combos *= static_cast<std::int64_t>(widths.size());
    for (std::int64_t c = 0; c < combos; ++c) {
      std::vector<int> ch(n);
      std::int64_t rest = c;
      for (int i = 0; i < n; ++i) {
        ch[i] = widths[rest % widths.size()];
        rest /= static_cast<std::int64_t>(widths.size());
      }
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> ds;
        for (int i = 0; i < n; ++i) {
          if (mask & (1u << i)) ds.push_back(i);
        }
        const int d = static_cast<int>(ds.size());
        if (d < cfg.downsample_bounds.min || d > cfg.downsample_bounds.max) continue;
        try {
          out.push_back(build_dnn(bundle, n, ch, ds, cfg.input_shape,
                                  cfg.frame ? *cfg.frame : ArchFrame::defaults_for(bundle)));
        } catch (const ConfigurationError&) {
        }
      }
    }
  }
  return out;
}

// Best feasible proxy score over an enumerated space, -1 when none is feasible.
inline double enumeration_optimum(const std::vector<DnnArch>& space, const SearchConfig& cfg,
                                  const QualityProxy& proxy) {
  double best = -1.0;
  for (const auto& a : space) {
    const ProposalEval ev = evaluate_proposal(a, cfg.device, cfg.target_fps, cfg.impl, proxy);
    if (ev.feasible) best = std::max(best, ev.score);
  }
  return best;
}

// Small random architecture over the built-in bundles.
inline DnnArch random_small_arch(std::mt19937_64& rng, int max_reps = 4, int max_ch = 48) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const auto& bundles = builtin_bundles();
  for (;;) {
    const Bundle& b = bundles[pick(0, static_cast<int>(bundles.size()) - 1)];
    const int n = pick(1, max_reps);
    std::vector<int> ch(n);
    for (int& c : ch) c = pick(1, max_ch);
    std::vector<int> ds;
    for (int i = 0; i < n; ++i) {
      if (pick(0, 2) == 0) ds.push_back(i);
    }
    const std::int64_t side = pick(8, 40);
    try {
      return build_dnn(b, n, ch, ds, {side, side + pick(0, 8), pick(1, 4)});
    } catch (const ConfigurationError&) {
    }
  }
}

struct ToySpace {
  SearchConfig cfg;
  std::vector<int> widths;
  std::vector<DnnArch> archs;
};

// A small enumerable search space whose throughput target sits at a quantile
// of the space's full-device frame rates, so the constraint actually binds.
inline ToySpace toy_space(int run, int max_reps = 3, std::vector<int> widths = {8, 16, 24, 32},
                          int max_ds = 3) {
  ToySpace t;
  SearchConfig& c = t.cfg;
  const auto& bundles = builtin_bundles();
  const Bundle& b = bundles[static_cast<std::size_t>(run) % bundles.size()];
  c.bundles = {b};
  c.device = builtin_device(run % 2 == 0 ? "ultra96" : "5agxa1");
  const std::int64_t side = 24 + 8 * (run % 4);
  c.input_shape = {side, side, 3};
  c.reps_bounds = {1, max_reps};
  c.channel_bounds = {widths.front(), widths.back()};
  c.downsample_bounds = {0, max_ds};
  c.seed = 1000 + static_cast<std::uint64_t>(run);
  c.max_iters = 2000;
  t.widths = std::move(widths);
  t.archs = enumerate_space(b, c, t.widths);

  std::vector<double> fps;
  for (const auto& a : t.archs) {
    const AccelConfig full = proportional_config(a, c.device, c.device.dsp_count, c.impl);
    fps.push_back(estimate(a, full, c.device).fps);
  }
  std::sort(fps.begin(), fps.end());
  const double q = 0.2 + 0.1 * (run % 6);
  c.target_fps = fps[static_cast<std::size_t>(q * static_cast<double>(fps.size() - 1))];
  return t;
}

}  // namespace oracle
