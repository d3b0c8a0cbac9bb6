#pragma once

#include <span>
#include <string>
#include <vector>

#include "cosearch/codesign_search.hpp"

namespace cosearch {

// Batch kernels used by the search and the property suites. Each has a serial
// reference; the OpenMP versions write results by index, so outputs are
// identical for every worker count.

struct ProposalEval {
  bool valid = false;     // false when the arch cannot be mapped at all
  bool feasible = false;  // meets target fps within device resources
  FitResult fit;
  double score = 0.0;  // only set when feasible
  bool unsupported_precision = false;
  std::string error;
};

ProposalEval evaluate_proposal(const DnnArch& arch, const DeviceSpec& device, double target_fps,
                               const ImplementationOptions& opts, const QualityProxy& proxy);

std::vector<ProposalEval> evaluate_proposals_serial(std::span<const DnnArch> archs,
                                                    const DeviceSpec& device, double target_fps,
                                                    const ImplementationOptions& opts,
                                                    const QualityProxy& proxy);

std::vector<ProposalEval> evaluate_proposals(std::span<const DnnArch> archs,
                                             const DeviceSpec& device, double target_fps,
                                             const ImplementationOptions& opts,
                                             const QualityProxy& proxy, int workers);

std::vector<EstimateReport> estimate_batch_serial(std::span<const DnnArch> archs,
                                                  std::span<const AccelConfig> cfgs,
                                                  const DeviceSpec& device);

std::vector<EstimateReport> estimate_batch(std::span<const DnnArch> archs,
                                           std::span<const AccelConfig> cfgs,
                                           const DeviceSpec& device, int workers);

}  // namespace cosearch
