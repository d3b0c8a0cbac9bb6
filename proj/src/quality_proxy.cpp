#include "cosearch/quality_proxy.hpp"

#include <cmath>

#include "cosearch/errors.hpp"
#include "cosearch/json_io.hpp"

namespace cosearch {

double proxy_accuracy(const DnnArch& arch, double kappa) {
  return -std::expm1(-static_cast<double>(dnn_total_macs(arch)) / kappa);
}

SaturatingComputeProxy::SaturatingComputeProxy(double kappa) : kappa_(kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvariantViolation("kappa", "must be > 0");
}

void TableProxy::set(std::string bundle_id, std::string fingerprint, double score) {
  if (!(score >= 0.0 && score <= 1.0)) throw InvariantViolation("score", "must be in [0, 1]");
  table_[{std::move(bundle_id), std::move(fingerprint)}] = score;
}

double TableProxy::score(const DnnArch& arch) const {
  if (auto it = table_.find({arch.bundle.id, arch.encode()}); it != table_.end()) return it->second;
  if (auto it = table_.find({arch.bundle.id, "*"}); it != table_.end()) return it->second;
  if (fallback_ != nullptr) return fallback_->score(arch);
  throw ConfigurationError("no proxy score for " + arch.encode());
}

TableProxy TableProxy::load(std::string_view text) {
  const Json doc = parse_json(text);
  if (!doc.is_array()) throw ParseError("proxy-scores file must be a JSON array");
  TableProxy t;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "[" + std::to_string(i) + "]";
    const Json& e = doc[i];
    t.set(require<std::string>(e, "bundle", path), field_or<std::string>(e, "arch", path, "*"),
          require<double>(e, "score", path));
  }
  return t;
}

}  // namespace cosearch
