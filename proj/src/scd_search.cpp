#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "cosearch/codesign_search.hpp"
#include "cosearch/errors.hpp"
#include "cosearch/parallel_eval.hpp"

namespace cosearch {

namespace {

using Rng = std::mt19937_64;

constexpr CoordinateGroup kGroups[] = {CoordinateGroup::reps, CoordinateGroup::downsample,
                                       CoordinateGroup::channels};
constexpr double kChannelFactors[] = {0.5, 0.75, 1.25, 2.0};
constexpr double kInsertFactors[] = {0.5, 0.75, 1.0, 1.25, 2.0};
// After this many iterations without an accepted step, proposals may chain one
// more random move from any group; the radius resets on acceptance.
constexpr int kStallWindow = 10;
constexpr int kMaxExtraMoves = 8;
// Once stalled, one proposal in this many is drawn from the whole space.
constexpr int kResampleOdds = 2;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Hardware-friendly widths: nearest multiple of 8 (at least 8), then clamped.
int round_channels(double v, Bounds b) {
  long r = std::lround(v / 8.0) * 8;
  r = std::max(r, 8L);
  return static_cast<int>(std::clamp<long>(r, b.min, b.max));
}

std::optional<DnnArch> mutate_reps(const DnnArch& a, const SearchConfig& cfg, Rng& rng) {
  const int n = a.reps;
  const bool can_add = n < cfg.reps_bounds.max;
  const bool can_remove = n > std::max(cfg.reps_bounds.min, 1);
  if (!can_add && !can_remove) return std::nullopt;
  const bool add = can_add && (!can_remove || uniform(rng, 0, 1) == 0);

  DnnArch m = a;
  m.layers.clear();
  if (add) {
    const int pos = uniform(rng, 0, n);
    const int neighbour = a.channels[std::min(pos, n - 1)];
    const double f = kInsertFactors[uniform(rng, 0, static_cast<int>(std::size(kInsertFactors)) - 1)];
    m.channels.insert(m.channels.begin() + pos, round_channels(neighbour * f, cfg.channel_bounds));
    for (int& d : m.downsample_after) {
      if (d >= pos) ++d;
    }
    m.reps = n + 1;
  } else {
    const int pos = uniform(rng, 0, n - 1);
    m.channels.erase(m.channels.begin() + pos);
    std::set<int> ds;
    bool carried = false;
    for (int d : a.downsample_after) {
      if (d == pos) {
        carried = true;
      } else {
        ds.insert(d > pos ? d - 1 : d);
      }
    }
    // A pool after the removed replication moves to the one before it.
    if (carried) ds.insert(std::max(pos - 1, 0));
    m.downsample_after.assign(ds.begin(), ds.end());
    m.reps = n - 1;
    if (static_cast<int>(m.downsample_after.size()) < cfg.downsample_bounds.min) return std::nullopt;
  }
  return m;
}

std::optional<DnnArch> mutate_downsample(const DnnArch& a, const SearchConfig& cfg, Rng& rng) {
  std::vector<int> free;
  for (int r = 0; r < a.reps; ++r) {
    if (!std::binary_search(a.downsample_after.begin(), a.downsample_after.end(), r)) {
      free.push_back(r);
    }
  }
  const int count = static_cast<int>(a.downsample_after.size());
  enum Op { add, remove, move };
  std::vector<Op> ops;
  if (count < cfg.downsample_bounds.max && !free.empty()) ops.push_back(add);
  if (count > cfg.downsample_bounds.min) ops.push_back(remove);
  if (count > 0 && !free.empty()) ops.push_back(move);
  if (ops.empty()) return std::nullopt;

  DnnArch m = a;
  m.layers.clear();
  auto& ds = m.downsample_after;
  switch (ops[uniform(rng, 0, static_cast<int>(ops.size()) - 1)]) {
    case add:
      ds.push_back(free[uniform(rng, 0, static_cast<int>(free.size()) - 1)]);
      break;
    case remove:
      ds.erase(ds.begin() + uniform(rng, 0, count - 1));
      break;
    case move:
      ds[uniform(rng, 0, count - 1)] = free[uniform(rng, 0, static_cast<int>(free.size()) - 1)];
      break;
  }
  std::sort(ds.begin(), ds.end());
  return m;
}

std::optional<DnnArch> mutate_channels(const DnnArch& a, const SearchConfig& cfg, Rng& rng) {
  DnnArch m = a;
  m.layers.clear();
  const int moves = uniform(rng, 1, std::max(1, std::min(cfg.max_channel_moves, a.reps)));
  std::vector<int> idx(a.reps);
  for (int i = 0; i < a.reps; ++i) idx[i] = i;
  for (int k = 0; k < moves; ++k) {
    std::swap(idx[k], idx[uniform(rng, k, a.reps - 1)]);
    const double f = kChannelFactors[uniform(rng, 0, static_cast<int>(std::size(kChannelFactors)) - 1)];
    m.channels[idx[k]] = round_channels(m.channels[idx[k]] * f, cfg.channel_bounds);
  }
  return m;
}

// Uniform draw over every coordinate group.
DnnArch random_point(const DnnArch& a, const SearchConfig& cfg, Rng& rng) {
  DnnArch m = a;
  m.layers.clear();
  m.reps = uniform(rng, cfg.reps_bounds.min, cfg.reps_bounds.max);
  m.channels.resize(m.reps);
  const int lo = round_channels(cfg.channel_bounds.min, cfg.channel_bounds) / 8;
  const int hi = round_channels(cfg.channel_bounds.max, cfg.channel_bounds) / 8;
  for (int& c : m.channels) c = round_channels(8.0 * uniform(rng, lo, hi), cfg.channel_bounds);
  const int most = std::min(cfg.downsample_bounds.max, m.reps);
  const int count = uniform(rng, std::min(cfg.downsample_bounds.min, most), most);
  std::vector<int> slots(m.reps);
  for (int i = 0; i < m.reps; ++i) slots[i] = i;
  for (int k = 0; k < count; ++k) std::swap(slots[k], slots[uniform(rng, k, m.reps - 1)]);
  m.downsample_after.assign(slots.begin(), slots.begin() + count);
  std::sort(m.downsample_after.begin(), m.downsample_after.end());
  return m;
}

std::optional<DnnArch> mutate(CoordinateGroup g, const DnnArch& a, const SearchConfig& cfg,
                              Rng& rng) {
  switch (g) {
    case CoordinateGroup::reps: return mutate_reps(a, cfg, rng);
    case CoordinateGroup::downsample: return mutate_downsample(a, cfg, rng);
    case CoordinateGroup::channels: return mutate_channels(a, cfg, rng);
  }
  return std::nullopt;
}

Candidate to_candidate(const DnnArch& arch, const ProposalEval& ev) {
  return {arch, ev.fit.cfg, ev.fit.report, ev.score};
}

struct ChainOutcome {
  std::optional<Candidate> best;
  std::vector<TraceEntry> trace;
  std::int64_t feasible_count = 0;
  std::string failure;
  std::string failure_constraint;
  bool precision_failure = false;
};

std::string describe_failure(const std::string& bundle_id, const ProposalEval& ev,
                             const DeviceSpec& device, double target_fps) {
  if (!ev.valid) return bundle_id + ": " + ev.error;
  const Violation& v = ev.fit.verdict.violations.front();
  char buf[256];
  if (v.constraint == "fps") {
    std::snprintf(buf, sizeof buf,
                  "%s: minimal network reaches %.6g fps with all %" PRId64
                  " DSPs of '%s', target %.6g fps",
                  bundle_id.c_str(), v.actual, device.dsp_count, device.name.c_str(), target_fps);
  } else {
    std::snprintf(buf, sizeof buf, "%s: minimal network violates %s (limit %.6g, needs %.6g)",
                  bundle_id.c_str(), v.constraint.c_str(), v.required, v.actual);
  }
  return buf;
}

ChainOutcome run_chain(const Bundle& bundle, std::size_t bundle_index, const SearchConfig& cfg,
                       const QualityProxy& proxy, int workers) {
  ChainOutcome out;
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(bundle_index)};
  Rng rng(seq);

  std::map<std::string, ProposalEval> cache;
  auto eval_one = [&](const DnnArch& arch) -> const ProposalEval& {
    auto key = arch.encode();
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, evaluate_proposal(arch, cfg.device, cfg.target_fps, cfg.impl, proxy))
               .first;
    }
    return it->second;
  };

  std::optional<Candidate> cur;
  if (cfg.initial && cfg.initial->bundle.id == bundle.id) {
    try {
      const ArchFrame frame = cfg.frame ? *cfg.frame : ArchFrame::defaults_for(bundle);
      DnnArch start = build_dnn(bundle, cfg.initial->reps, cfg.initial->channels,
                                cfg.initial->downsample_after, cfg.input_shape, frame);
      const ProposalEval& ev = eval_one(start);
      if (ev.feasible) cur = to_candidate(start, ev);
    } catch (const ConfigurationError&) {
      // fall through to the minimal seed
    }
  }
  if (!cur) {
    DnnArch start;
    try {
      start = minimal_arch(bundle, cfg);
    } catch (const ConfigurationError& e) {
      out.failure = bundle.id + ": " + e.what();
      out.failure_constraint = "shape";
      return out;
    }
    const ProposalEval& ev = eval_one(start);
    if (!ev.feasible) {
      out.failure = describe_failure(bundle.id, ev, cfg.device, cfg.target_fps);
      out.failure_constraint = ev.valid ? ev.fit.verdict.violations.front().constraint : "precision";
      out.precision_failure = ev.unsupported_precision;
      return out;
    }
    cur = to_candidate(start, ev);
  }
  out.feasible_count = 1;

  int stall = 0;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const int radius = std::min(stall / kStallWindow, kMaxExtraMoves);
    const CoordinateGroup group = cfg.group_selection == GroupSelection::uniform
                                      ? kGroups[uniform(rng, 0, 2)]
                                      : kGroups[iter % 3];

    std::vector<DnnArch> proposals;
    std::set<std::string> seen{cur->arch.encode()};
    for (int k = 0; k < cfg.proposals_per_iter; ++k) {
      std::optional<DnnArch> m;
      if (radius > 0 && uniform(rng, 1, kResampleOdds) == 1) {
        m = random_point(cur->arch, cfg, rng);
      } else {
        m = mutate(group, cur->arch, cfg, rng);
        if (!m) continue;
        const int extra = radius > 0 ? uniform(rng, 0, radius) : 0;
        for (int e = 0; e < extra; ++e) {
          if (auto next = mutate(kGroups[uniform(rng, 0, 2)], *m, cfg, rng)) m = std::move(next);
        }
      }
      try {
        DnnArch built = rebuild(*m);
        if (seen.insert(built.encode()).second) proposals.push_back(std::move(built));
      } catch (const ConfigurationError&) {
        // spatial collapse or out-of-range placement: not a proposal
      }
    }

    std::vector<DnnArch> fresh;
    for (const auto& p : proposals) {
      if (!cache.count(p.encode())) fresh.push_back(p);
    }
    auto evals = evaluate_proposals(fresh, cfg.device, cfg.target_fps, cfg.impl, proxy, workers);
    for (std::size_t i = 0; i < fresh.size(); ++i) cache.emplace(fresh[i].encode(), std::move(evals[i]));

    std::optional<Candidate> best;
    for (const auto& p : proposals) {
      const ProposalEval& ev = cache.at(p.encode());
      if (!ev.feasible) continue;
      ++out.feasible_count;
      Candidate c = to_candidate(p, ev);
      if (!best || ranks_above(c, *best)) best = std::move(c);
    }

    bool accepted = false;
    if (best) {
      accepted = cfg.objective == Objective::proxy_score ? best->score > cur->score
                                                         : ranks_above(*best, *cur);
    }
    if (accepted) cur = std::move(best);
    stall = accepted ? 0 : stall + 1;
    out.trace.push_back({bundle.id, iter, group, accepted, cur->score, cur->report.fps,
                         cur->report.dsp_used});
  }
  out.best = std::move(cur);
  return out;
}

}  // namespace

std::string_view to_string(CoordinateGroup g) {
  switch (g) {
    case CoordinateGroup::reps: return "reps";
    case CoordinateGroup::downsample: return "downsample";
    case CoordinateGroup::channels: return "channels";
  }
  return "?";
}

std::string_view to_string(Objective o) {
  return o == Objective::proxy_score ? "proxy_score" : "score_then_fps";
}

std::string_view to_string(GroupSelection g) {
  return g == GroupSelection::uniform ? "uniform" : "round_robin";
}

CoordinateGroup coordinate_group_from_string(std::string_view s) {
  for (CoordinateGroup g : kGroups) {
    if (to_string(g) == s) return g;
  }
  throw InputError("unknown coordinate group '" + std::string(s) + "'");
}

Objective objective_from_string(std::string_view s) {
  if (s == "proxy_score") return Objective::proxy_score;
  if (s == "score_then_fps") return Objective::score_then_fps;
  throw InputError("unknown objective '" + std::string(s) + "'");
}

GroupSelection group_selection_from_string(std::string_view s) {
  if (s == "uniform") return GroupSelection::uniform;
  if (s == "round_robin") return GroupSelection::round_robin;
  throw InputError("unknown group selection '" + std::string(s) + "'");
}

void SearchConfig::validate() const {
  device.validate();
  if (bundles.empty()) throw InvariantViolation("bundles", "must not be empty");
  for (const auto& b : bundles) b.validate();
  if (!(target_fps > 0.0) || !std::isfinite(target_fps)) {
    throw InvariantViolation("target_fps", "must be finite and > 0");
  }
  if (input_shape.h < 1 || input_shape.w < 1 || input_shape.c < 1) {
    throw InvariantViolation("input_shape", "must be positive");
  }
  if (max_iters < 1) throw InvariantViolation("max_iters", "must be >= 1");
  if (proposals_per_iter < 1) throw InvariantViolation("proposals_per_iter", "must be >= 1");
  if (max_channel_moves < 1) throw InvariantViolation("max_channel_moves", "must be >= 1");
  if (channel_bounds.min < 1 || channel_bounds.min > channel_bounds.max) {
    throw InvariantViolation("channel_bounds", "need 1 <= min <= max");
  }
  if (reps_bounds.min < 1 || reps_bounds.min > reps_bounds.max) {
    throw InvariantViolation("reps_bounds", "need 1 <= min <= max");
  }
  if (downsample_bounds.min < 0 || downsample_bounds.min > downsample_bounds.max) {
    throw InvariantViolation("downsample_bounds", "need 0 <= min <= max");
  }
  if (downsample_bounds.min > reps_bounds.max) {
    throw InvariantViolation("downsample_bounds", "min exceeds the largest replication count");
  }
  if (precision) precision->validate();
}

bool ranks_above(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.report.total_cycles != b.report.total_cycles) {
    return a.report.total_cycles < b.report.total_cycles;
  }
  if (a.report.dsp_used != b.report.dsp_used) return a.report.dsp_used < b.report.dsp_used;
  return a.arch.encode() < b.arch.encode();
}

DnnArch minimal_arch(const Bundle& bundle, const SearchConfig& cfg) {
  const int reps = std::max(cfg.reps_bounds.min, cfg.downsample_bounds.min);
  const ArchFrame frame = cfg.frame ? *cfg.frame : ArchFrame::defaults_for(bundle);
  std::optional<ConfigurationError> last;
  for (int d = std::min(cfg.downsample_bounds.max, reps); d >= cfg.downsample_bounds.min; --d) {
    std::vector<int> ds(d);
    for (int i = 0; i < d; ++i) ds[i] = i;
    try {
      return build_dnn(bundle, reps, std::vector<int>(reps, cfg.channel_bounds.min), ds,
                       cfg.input_shape, frame);
    } catch (const ConfigurationError& e) {
      last = e;
    }
  }
  if (last) throw *last;
  throw ConfigurationError("no down-sampling count fits the bounds");
}

SearchResult scd_search(const SearchConfig& cfg, const QualityProxy& proxy, int workers) {
  cfg.validate();

  SearchResult result;
  result.seed = cfg.seed;
  std::optional<Candidate> best;
  std::vector<ChainOutcome> failures;

  for (std::size_t i = 0; i < cfg.bundles.size(); ++i) {
    const Bundle bundle =
        cfg.precision ? with_precision(cfg.bundles[i], *cfg.precision) : cfg.bundles[i];
    ChainOutcome chain = run_chain(bundle, i, cfg, proxy, workers);
    result.feasible_count += chain.feasible_count;
    result.trace.insert(result.trace.end(), chain.trace.begin(), chain.trace.end());
    if (!chain.best) {
      failures.push_back(std::move(chain));
      continue;
    }
    if (!best || ranks_above(*chain.best, *best)) best = std::move(chain.best);
  }

  if (!best) {
    const bool all_precision = std::all_of(failures.begin(), failures.end(),
                                           [](const ChainOutcome& c) { return c.precision_failure; });
    std::string msg;
    for (const auto& f : failures) msg += (msg.empty() ? "" : "; ") + f.failure;
    if (all_precision) throw PrecisionUnsupported(msg);
    throw InfeasibleTarget(failures.front().failure_constraint, msg);
  }
  result.best = std::move(*best);
  return result;
}

std::string trace_csv(const SearchResult& result) {
  std::string out = "bundle,iter,group,accepted,score,fps,dsp\n";
  char buf[256];
  for (const auto& t : result.trace) {
    std::snprintf(buf, sizeof buf, "%s,%d,%s,%d,%.17g,%.17g,%" PRId64 "\n", t.bundle.c_str(),
                  t.iter, std::string(to_string(t.group)).c_str(), t.accepted ? 1 : 0, t.score,
                  t.fps, t.dsp);
    out += buf;
  }
  return out;
}

}  // namespace cosearch
