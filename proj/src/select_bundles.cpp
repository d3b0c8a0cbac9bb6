#include <algorithm>

#include "cosearch/codesign_search.hpp"
#include "cosearch/errors.hpp"
#include "cosearch/pareto.hpp"

namespace cosearch {

double resource_cost(const EstimateReport& report, const DeviceSpec& device, double dsp_weight,
                     double bram_weight) {
  const double dsp_frac =
      device.dsp_count > 0 ? static_cast<double>(report.dsp_used) / device.dsp_count : 0.0;
  std::int64_t used = 0;
  std::int64_t available = 0;
  for (const auto& [name, n] : report.bram_blocks_used) used += n;
  for (const auto& r : device.bram_blocks) available += r.count;
  const double bram_frac = available > 0 ? static_cast<double>(used) / available : 0.0;
  return dsp_weight * dsp_frac + bram_weight * bram_frac;
}

BundleSelection select_bundles(const std::vector<Bundle>& catalog, const QualityProxy& proxy,
                               const DeviceSpec& device, const BundleTemplate& tmpl) {
  if (catalog.empty()) throw ConfigurationError("bundle catalog is empty");

  BundleSelection sel;
  for (const auto& raw : catalog) {
    const Bundle bundle = tmpl.precision ? with_precision(raw, *tmpl.precision) : raw;
    try {
      const DnnArch arch =
          build_dnn(bundle, tmpl.reps, std::vector<int>(tmpl.reps, tmpl.channels),
                    tmpl.downsample_after, tmpl.input_shape);
      FitResult fit = fit_implementation(arch, device, tmpl.target_fps, tmpl.impl);
      if (!fit.verdict.feasible) {
        const Violation& v = fit.verdict.violations.front();
        sel.diagnostics.push_back(bundle.id + ": excluded, misses " + v.constraint + " (needs " +
                                  std::to_string(v.required) + ", reaches " +
                                  std::to_string(v.actual) + ")");
        continue;
      }
      BundlePoint p;
      p.bundle_id = bundle.id;
      p.cost = resource_cost(fit.report, device, tmpl.dsp_weight, tmpl.bram_weight);
      p.score = proxy.score(arch);
      p.cfg = std::move(fit.cfg);
      p.report = std::move(fit.report);
      sel.evaluated.push_back(std::move(p));
    } catch (const PrecisionUnsupported& e) {
      sel.diagnostics.push_back(bundle.id + ": excluded, " + e.what());
    }
  }

  std::vector<CostScore> pts;
  pts.reserve(sel.evaluated.size());
  for (const auto& p : sel.evaluated) pts.push_back({p.cost, p.score});
  for (std::size_t i : pareto_frontier(pts)) sel.selected.push_back(sel.evaluated[i]);
  std::stable_sort(sel.selected.begin(), sel.selected.end(),
                   [](const BundlePoint& a, const BundlePoint& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.cost < b.cost;
                   });
  return sel;
}

}  // namespace cosearch
