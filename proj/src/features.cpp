#include "burstcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "burstcast/error.hpp"

namespace burstcast {

EmaConfig EmaConfig::from_window(double window_minutes, double bin_width_minutes) {
  if (!(window_minutes > 0.0) || !(bin_width_minutes > 0.0))
    fail(ErrorKind::InvalidAlpha, "EMA window and bin width must be positive");
  // A window no longer than one bin degenerates to the raw value.
  const double n = std::max(1.0, window_minutes / bin_width_minutes);
  return EmaConfig{window_minutes, 2.0 / (n + 1.0)};
}

std::vector<double> ema(std::span<const double> values, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidAlpha, "EMA alpha must be in (0, 1]");
  std::vector<double> out(values.size());
  if (values.empty()) return out;
  out[0] = values[0];
  for (std::size_t t = 1; t < values.size(); ++t) out[t] = alpha * values[t] + (1.0 - alpha) * out[t - 1];
  return out;
}

std::vector<double> macd(std::span<const double> values, const MacdConfig& cfg) {
  if (!(cfg.short_ema.window_minutes < cfg.long_ema.window_minutes))
    fail(ErrorKind::InvalidMacdConfig, "MACD short window must be shorter than the long window");
  auto s = ema(values, cfg.short_ema.alpha);
  const auto l = ema(values, cfg.long_ema.alpha);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] -= l[i];
  return s;
}

FeatureMatrix build_features(const BinSeries& s, Channel c, int set_id, const FeatureOptions& opt) {
  if (set_id < 1 || set_id > 3) fail(ErrorKind::UnknownFeatureSet, "feature set must be 1, 2 or 3");
  const std::string ch(channel_name(c));
  std::vector<std::vector<double>> cols;
  FeatureMatrix fm;
  auto add = [&](std::string name, std::vector<double> v) {
    fm.names.push_back(std::move(name));
    cols.push_back(std::move(v));
  };

  const auto bytes = s.channel_bytes(c);
  if (set_id == 1 && opt.set1_both_channels) {
    add("read_bytes", s.channel_bytes(Channel::Read));
    add("write_bytes", s.channel_bytes(Channel::Write));
  } else {
    add(ch + "_bytes", bytes);
  }
  if (set_id >= 2) {
    add(ch + "_ops", s.channel_ops(c));
    add(ch + "_time", s.channel_time(c));
  }
  if (set_id == 3) {
    const double bin_minutes = static_cast<double>(s.bin_width) / 60.0;
    const auto e60 = EmaConfig::from_window(60, bin_minutes);
    const auto e130 = EmaConfig::from_window(130, bin_minutes);
    const auto e500 = EmaConfig::from_window(500, bin_minutes);
    const auto e1000 = EmaConfig::from_window(1000, bin_minutes);
    add(ch + "_ema60", ema(bytes, e60.alpha));
    add(ch + "_ema130", ema(bytes, e130.alpha));
    add(ch + "_ema500", ema(bytes, e500.alpha));
    add(ch + "_ema1000", ema(bytes, e1000.alpha));
    add(ch + "_macd60_130", macd(bytes, MacdConfig{e60, e130}));
    add(ch + "_macd500_1000", macd(bytes, MacdConfig{e500, e1000}));
  }

  fm.rows = Matrix(s.size(), cols.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) fm.rows(i, j) = cols[j][i];
  fm.timestamps.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) fm.timestamps[i] = s.timestamp(i);
  return fm;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  Dataset d;
  d.feature_names = feature_names;
  d.X = X.slice_rows(begin, end);
  d.y.assign(y.begin() + static_cast<std::ptrdiff_t>(begin), y.begin() + static_cast<std::ptrdiff_t>(end));
  if (!y_now.empty())
    d.y_now.assign(y_now.begin() + static_cast<std::ptrdiff_t>(begin),
                   y_now.begin() + static_cast<std::ptrdiff_t>(end));
  d.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                      timestamps.begin() + static_cast<std::ptrdiff_t>(end));
  d.horizon_bins = horizon_bins;
  d.bin_width = bin_width;
  return d;
}

Dataset build_dataset(const FeatureMatrix& f, std::span<const int> labels, std::int64_t horizon_bins,
                      std::int64_t bin_width) {
  if (horizon_bins < 1) fail(ErrorKind::InvalidHorizon, "horizon must be >= 1 bin");
  const std::size_t n = f.rows.rows();
  if (labels.size() != n) fail(ErrorKind::ArityMismatch, "label count differs from feature rows");
  const auto h = static_cast<std::size_t>(horizon_bins);
  if (h >= n) fail(ErrorKind::HorizonTooLong, "horizon must be shorter than the series");
  Dataset d;
  d.feature_names = f.names;
  d.X = f.rows.slice_rows(0, n - h);
  d.y.assign(labels.begin() + static_cast<std::ptrdiff_t>(h), labels.end());
  d.y_now.assign(labels.begin(), labels.end() - static_cast<std::ptrdiff_t>(h));
  d.timestamps.assign(f.timestamps.begin(), f.timestamps.end() - static_cast<std::ptrdiff_t>(h));
  d.horizon_bins = horizon_bins;
  d.bin_width = bin_width;
  return d;
}

Split chrono_split(const Dataset& d, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorKind::InvalidFraction, "train fraction must be in (0, 1)");
  const std::size_t n = d.rows();
  const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  const auto purge = static_cast<std::size_t>(d.horizon_bins - 1);
  if (cut <= purge || cut >= n)
    fail(ErrorKind::TooFewRows, "too few rows (" + std::to_string(n) + ") for a non-empty split");
  Split s;
  s.train = d.slice(0, cut - purge);
  s.test = d.slice(cut, n);
  s.purged = purge;
  return s;
}

std::string dataset_csv(const Dataset& d, const Provenance& p) {
  std::ostringstream out;
  write_provenance(out, p);
  for (const auto& name : d.feature_names) out << name << ',';
  out << "label,label_now,timestamp\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.X.cols(); ++j) out << format_double(d.X(i, j)) << ',';
    out << d.y[i] << ',' << (d.y_now.empty() ? 0 : d.y_now[i]) << ',' << d.timestamps[i] << '\n';
  }
  return out.str();
}

}  // namespace burstcast
