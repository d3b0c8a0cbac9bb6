#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "cosearch/bundle_catalog.hpp"

namespace cosearch {

/// Cheap deterministic stand-in for trained accuracy. Implementations must be
/// safe to call concurrently.
class QualityProxy {
 public:
  virtual ~QualityProxy() = default;
  virtual double score(const DnnArch& arch) const = 0;
  virtual std::string name() const = 0;
};

inline constexpr double kDefaultKappa = 1e9;

/// 1 - exp(-macs / kappa).
double proxy_accuracy(const DnnArch& arch, double kappa = kDefaultKappa);

class SaturatingComputeProxy final : public QualityProxy {
 public:
  explicit SaturatingComputeProxy(double kappa = kDefaultKappa);

  double score(const DnnArch& arch) const override { return proxy_accuracy(arch, kappa_); }
  std::string name() const override { return "saturating_compute"; }
  double kappa() const { return kappa_; }

 private:
  double kappa_;
};

/// Scores looked up by (bundle id, arch fingerprint). A "*" fingerprint
/// matches every arch of that bundle. Misses go to the fallback, or throw
/// ConfigurationError when there is none.
class TableProxy final : public QualityProxy {
 public:
  void set(std::string bundle_id, std::string fingerprint, double score);
  void set_fallback(const QualityProxy* fallback) { fallback_ = fallback; }

  double score(const DnnArch& arch) const override;
  std::string name() const override { return "table"; }
  std::size_t size() const { return table_.size(); }

  /// [{"bundle": id, "arch": fingerprint or "*", "score": s}, ...]
  static TableProxy load(std::string_view text);

 private:
  std::map<std::pair<std::string, std::string>, double> table_;
  const QualityProxy* fallback_ = nullptr;
};

}  // namespace cosearch
