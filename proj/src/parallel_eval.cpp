#include "cosearch/parallel_eval.hpp"

#include <exception>

#include "cosearch/errors.hpp"

namespace cosearch {

namespace {

void check_sizes(std::span<const DnnArch> archs, std::span<const AccelConfig> cfgs) {
  if (archs.size() != cfgs.size()) {
    throw ConfigurationError("estimate_batch: " + std::to_string(archs.size()) + " archs but " +
                             std::to_string(cfgs.size()) + " configs");
  }
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ProposalEval evaluate_proposal(const DnnArch& arch, const DeviceSpec& device, double target_fps,
                               const ImplementationOptions& opts, const QualityProxy& proxy) {
  ProposalEval ev;
  try {
    ev.fit = fit_implementation(arch, device, target_fps, opts);
  } catch (const PrecisionUnsupported& e) {
    ev.unsupported_precision = true;
    ev.error = e.what();
    return ev;
  } catch (const ConfigurationError& e) {
    ev.error = e.what();
    return ev;
  }
  ev.valid = true;
  ev.feasible = ev.fit.verdict.feasible;
  if (ev.feasible) ev.score = proxy.score(arch);
  return ev;
}

std::vector<ProposalEval> evaluate_proposals_serial(std::span<const DnnArch> archs,
                                                    const DeviceSpec& device, double target_fps,
                                                    const ImplementationOptions& opts,
                                                    const QualityProxy& proxy) {
  std::vector<ProposalEval> out;
  out.reserve(archs.size());
  for (const auto& a : archs) out.push_back(evaluate_proposal(a, device, target_fps, opts, proxy));
  return out;
}

std::vector<ProposalEval> evaluate_proposals(std::span<const DnnArch> archs,
                                             const DeviceSpec& device, double target_fps,
                                             const ImplementationOptions& opts,
                                             const QualityProxy& proxy, int workers) {
  if (workers <= 1 || archs.size() < 2) {
    return evaluate_proposals_serial(archs, device, target_fps, opts, proxy);
  }
  std::vector<ProposalEval> out(archs.size());
  std::vector<std::exception_ptr> errors(archs.size());
  const auto n = static_cast<std::int64_t>(archs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = evaluate_proposal(archs[i], device, target_fps, opts, proxy);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

std::vector<EstimateReport> estimate_batch_serial(std::span<const DnnArch> archs,
                                                  std::span<const AccelConfig> cfgs,
                                                  const DeviceSpec& device) {
  check_sizes(archs, cfgs);
  std::vector<EstimateReport> out;
  out.reserve(archs.size());
  for (std::size_t i = 0; i < archs.size(); ++i) out.push_back(estimate(archs[i], cfgs[i], device));
  return out;
}

std::vector<EstimateReport> estimate_batch(std::span<const DnnArch> archs,
                                           std::span<const AccelConfig> cfgs,
                                           const DeviceSpec& device, int workers) {
  check_sizes(archs, cfgs);
  if (workers <= 1) return estimate_batch_serial(archs, cfgs, device);
  std::vector<EstimateReport> out(archs.size());
  std::vector<std::exception_ptr> errors(archs.size());
  const auto n = static_cast<std::int64_t>(archs.size());
#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = estimate(archs[i], cfgs[i], device);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

}  // namespace cosearch
