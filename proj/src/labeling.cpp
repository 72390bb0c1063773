#include "burstcast/labeling.hpp"

#include <cmath>
#include <json.hpp>

#include "burstcast/error.hpp"
#include "burstcast/kernels.hpp"

namespace burstcast {
namespace {

constexpr double kMaxK = 400.0;
constexpr int kBisectSteps = 200;

struct FractionFn {
  std::span<const double> values;
  double mean;
  double stdev;

  double cutoff(double k) const { return mean + k * stdev; }
  std::size_t count(double k) const { return kernels::count_greater(values, cutoff(k)); }
};

// Smallest k in [0, kMaxK] whose count is <= limit (the count is
// non-increasing in k). Returns kMaxK if even that is not enough.
double smallest_k_with_count_at_most(const FractionFn& f, std::size_t limit) {
  if (f.count(0.0) <= limit) return 0.0;
  double lo = 0.0, hi = kMaxK;  // count(lo) > limit, count(hi) <= limit (assumed)
  for (int i = 0; i < kBisectSteps && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f.count(mid) <= limit) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

void check_fraction(double target) {
  if (!(target > 0.0 && target < 1.0)) fail(ErrorKind::InvalidFraction, "target fraction must be in (0, 1)");
}

}  // namespace

BurstThreshold compute_threshold(const BinSeries& s, Channel c, double target_fraction) {
  check_fraction(target_fraction);
  const auto values = s.channel_bytes(c);
  const ChannelStats st = channel_stats(values, c);
  if (!(st.stdev > 0.0)) fail(ErrorKind::ZeroVariance, "channel has zero variance");

  const FractionFn f{values, st.mean, st.stdev};
  const double n = static_cast<double>(values.size());
  const double target_count = target_fraction * n;

  // Boundary of the plateau at or just below the target.
  const auto floor_count = static_cast<std::size_t>(std::floor(target_count));
  const double k_below = smallest_k_with_count_at_most(f, floor_count);
  const std::size_t c_below = f.count(k_below);

  double best_k = k_below;
  std::size_t best_count = c_below;
  if (k_below > 0.0) {
    // The next plateau to the left holds the smallest count above the target.
    double lo = 0.0, hi = k_below;
    for (int i = 0; i < kBisectSteps; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (f.count(mid) > c_below) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const std::size_t c_above = f.count(lo);
    const double k_above = smallest_k_with_count_at_most(f, c_above);
    const double d_above = std::abs(static_cast<double>(c_above) - target_count);
    const double d_below = std::abs(static_cast<double>(c_below) - target_count);
    if (d_above <= d_below) {
      best_k = k_above;
      best_count = c_above;
    }
  }

  BurstThreshold t;
  t.channel = c;
  t.k = best_k;
  t.mean = st.mean;
  t.stdev = st.stdev;
  t.cutoff_bytes = f.cutoff(best_k);
  t.target_fraction = target_fraction;
  t.achieved_fraction = static_cast<double>(best_count) / n;
  return t;
}

BurstThreshold threshold_at_k(const BinSeries& s, Channel c, double k, double target_fraction) {
  check_fraction(target_fraction);
  if (!(k >= 0.0) || !std::isfinite(k)) fail(ErrorKind::InvalidBandConfig, "k must be finite and >= 0");
  const auto values = s.channel_bytes(c);
  const ChannelStats st = channel_stats(values, c);
  if (!(st.stdev > 0.0)) fail(ErrorKind::ZeroVariance, "channel has zero variance");
  BurstThreshold t;
  t.channel = c;
  t.k = k;
  t.mean = st.mean;
  t.stdev = st.stdev;
  t.cutoff_bytes = st.mean + k * st.stdev;
  t.target_fraction = target_fraction;
  t.achieved_fraction =
      static_cast<double>(kernels::count_greater(values, t.cutoff_bytes)) / static_cast<double>(values.size());
  return t;
}

LabeledSeries label_binary(const BinSeries& s, Channel c, const BurstThreshold& t) {
  LabeledSeries out;
  out.channel = c;
  out.mode = LabelMode::Binary;
  out.threshold = t;
  out.levels = 1;
  out.labels.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.labels[i] = s.bins[i].bytes(c) > t.cutoff_bytes ? 1 : 0;
  return out;
}

LabeledSeries label_severity(const BinSeries& s, Channel c, const BurstThreshold& t, double k_max, int levels) {
  if (!(t.k < k_max) || levels < 1)
    fail(ErrorKind::InvalidBandConfig, "severity bands need k < k_max and levels >= 1");
  LabeledSeries out;
  out.channel = c;
  out.mode = LabelMode::Severity;
  out.threshold = t;
  out.levels = levels;
  out.labels.resize(s.size());
  const double band = (k_max - t.k) / levels;
  std::vector<double> edges(static_cast<std::size_t>(levels) + 1);
  edges[0] = t.cutoff_bytes;
  for (int i = 1; i < levels; ++i) edges[static_cast<std::size_t>(i)] = t.mean + (t.k + i * band) * t.stdev;
  edges[static_cast<std::size_t>(levels)] = t.mean + k_max * t.stdev;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.bins[i].bytes(c);
    if (!(x > edges[0])) {
      out.labels[i] = 0;
      continue;
    }
    int cls = 1;
    while (cls < levels && x >= edges[static_cast<std::size_t>(cls)]) ++cls;
    out.labels[i] = cls;
  }
  return out;
}

std::string threshold_json(const BurstThreshold& t, const Provenance& p) {
  nlohmann::ordered_json j;
  j["channel"] = std::string(channel_name(t.channel));
  j["k"] = t.k;
  j["mean"] = t.mean;
  j["stdev"] = t.stdev;
  j["cutoff_bytes"] = t.cutoff_bytes;
  j["target_fraction"] = t.target_fraction;
  j["achieved_fraction"] = t.achieved_fraction;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  return j.dump(2) + "\n";
}

BurstThreshold parse_threshold_json(const std::string& text, Provenance* p) {
  BurstThreshold t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.channel = parse_channel(j.at("channel").get<std::string>());
    t.k = j.at("k").get<double>();
    t.mean = j.at("mean").get<double>();
    t.stdev = j.at("stdev").get<double>();
    t.cutoff_bytes = j.at("cutoff_bytes").get<double>();
    t.target_fraction = j.at("target_fraction").get<double>();
    t.achieved_fraction = j.at("achieved_fraction").get<double>();
    if (p != nullptr) {
      p->config_hash = j.value("config_hash", std::string{});
      p->seed = j.value("seed", std::uint64_t{0});
      p->present = j.contains("config_hash");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("threshold JSON: ") + e.what());
  }
  return t;
}

}  // namespace burstcast
