#include "burstcast/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "burstcast/error.hpp"
#include "burstcast/kernels.hpp"

namespace burstcast {

BinStats& BinStats::operator+=(const BinStats& o) noexcept {
  read_bytes += o.read_bytes;
  write_bytes += o.write_bytes;
  read_ops += o.read_ops;
  write_ops += o.write_ops;
  read_time += o.read_time;
  write_time += o.write_time;
  return *this;
}

std::vector<double> BinSeries::channel_bytes(Channel c) const {
  std::vector<double> v(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) v[i] = bins[i].bytes(c);
  return v;
}

std::vector<double> BinSeries::channel_ops(Channel c) const {
  std::vector<double> v(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) v[i] = bins[i].ops(c);
  return v;
}

std::vector<double> BinSeries::channel_time(Channel c) const {
  std::vector<double> v(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) v[i] = bins[i].time(c);
  return v;
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t bin_index(double t, std::int64_t width) {
  return static_cast<std::int64_t>(std::floor(t / static_cast<double>(width)));
}

}  // namespace

BinSeries bin_operations(std::span<const IoOperation> ops, std::int64_t bin_width) {
  if (bin_width <= 0) fail(ErrorKind::InvalidBinWidth, "bin width must be positive");
  BinSeries s;
  s.bin_width = bin_width;
  if (ops.empty()) return s;

  // Accumulate in a canonical order so the float sums do not depend on the
  // order of the input stream.
  std::vector<IoOperation> sorted(ops.begin(), ops.end());
  std::sort(sorted.begin(), sorted.end(), [](const IoOperation& a, const IoOperation& b) {
    return std::tie(a.start_abs, a.end_abs, a.channel, a.bytes, a.op_count, a.io_seconds) <
           std::tie(b.start_abs, b.end_abs, b.channel, b.bytes, b.op_count, b.io_seconds);
  });

  std::int64_t lo = bin_index(sorted.front().start_abs, bin_width);
  std::int64_t hi = lo;
  for (const auto& op : sorted) {
    lo = std::min(lo, bin_index(op.start_abs, bin_width));
    hi = std::max(hi, bin_index(std::max(op.start_abs, op.end_abs), bin_width));
  }
  s.origin = lo * bin_width;
  s.bins.assign(static_cast<std::size_t>(hi - lo + 1), BinStats{});

  for (const auto& op : sorted) {
    const std::int64_t first = bin_index(op.start_abs, bin_width);
    const std::int64_t last = bin_index(std::max(op.start_abs, op.end_abs), bin_width);
    const double span = static_cast<double>(last - first + 1);
    const double b = op.bytes / span;
    const double n = op.op_count / span;
    const double t = op.io_seconds / span;
    for (std::int64_t k = first; k <= last; ++k) {
      BinStats& bin = s.bins[static_cast<std::size_t>(k - lo)];
      if (op.channel == Channel::Read) {
        bin.read_bytes += b;
        bin.read_ops += n;
        bin.read_time += t;
      } else {
        bin.write_bytes += b;
        bin.write_ops += n;
        bin.write_time += t;
      }
    }
  }
  return s;
}

BinSeries merge(const BinSeries& a, const BinSeries& b) {
  if (a.bin_width != b.bin_width)
    fail(ErrorKind::WidthMismatch, "cannot merge series with widths " + std::to_string(a.bin_width) +
                                       " and " + std::to_string(b.bin_width));
  if (a.empty()) return b;
  if (b.empty()) return a;
  const std::int64_t w = a.bin_width;
  const std::int64_t lo = std::min(a.origin, b.origin);
  const std::int64_t hi = std::max(a.timestamp(a.size() - 1), b.timestamp(b.size() - 1));
  BinSeries out;
  out.bin_width = w;
  out.origin = lo;
  out.bins.assign(static_cast<std::size_t>((hi - lo) / w + 1), BinStats{});
  for (const BinSeries* src : {&a, &b}) {
    const auto off = static_cast<std::size_t>((src->origin - lo) / w);
    for (std::size_t i = 0; i < src->size(); ++i) out.bins[off + i] += src->bins[i];
  }
  return out;
}

BinSeries rebin(const BinSeries& s, std::int64_t factor) {
  if (factor < 1) fail(ErrorKind::InvalidFactor, "rebin factor must be >= 1");
  if (factor == 1) return s;
  BinSeries out;
  out.bin_width = s.bin_width * factor;
  if (s.empty()) return out;
  out.origin = floor_div(s.origin, out.bin_width) * out.bin_width;
  const auto offset = static_cast<std::size_t>((s.origin - out.origin) / s.bin_width);
  const std::size_t total = offset + s.size();
  const auto f = static_cast<std::size_t>(factor);
  out.bins.assign((total + f - 1) / f, BinStats{});
  for (std::size_t i = 0; i < s.size(); ++i) out.bins[(offset + i) / f] += s.bins[i];
  return out;
}

ChannelStats channel_stats(std::span<const double> values, Channel c) {
  if (values.size() < 2) fail(ErrorKind::TooFewBins, "need at least 2 bins for statistics");
  ChannelStats st;
  st.channel = c;
  st.n = values.size();
  const double n = static_cast<double>(values.size());
  st.mean = kernels::sum(values) / n;
  st.stdev = std::sqrt(kernels::sum_sq_dev(values, st.mean) / n);
  return st;
}

ChannelStats channel_stats(const BinSeries& s, Channel c) {
  const auto v = s.channel_bytes(c);
  return channel_stats(v, c);
}

std::uint64_t DeviationHistogram::total() const noexcept {
  std::uint64_t t = below_cap + above_cap;
  for (auto v : counts) t += v;
  return t;
}

DeviationHistogram deviation_histogram(const BinSeries& s, Channel c, const ChannelStats& stats) {
  if (!(stats.stdev > 0.0)) fail(ErrorKind::ZeroVariance, "deviation histogram needs stdev > 0");
  DeviationHistogram h;
  for (const auto& bin : s.bins) {
    const double z = (bin.bytes(c) - stats.mean) / stats.stdev;
    if (z < -DeviationHistogram::kCap) {
      ++h.below_cap;
    } else if (z >= DeviationHistogram::kCap) {
      ++h.above_cap;
    } else {
      // z·5 avoids the inexact 0.2 divisor.
      auto idx = static_cast<int>(std::floor(z * 5.0)) + DeviationHistogram::kGroups / 2;
      idx = std::clamp(idx, 0, DeviationHistogram::kGroups - 1);
      ++h.counts[static_cast<std::size_t>(idx)];
    }
  }
  return h;
}

std::size_t RunLengths::singles() const noexcept {
  auto it = by_length.find(1);
  return it == by_length.end() ? 0 : it->second;
}

std::size_t RunLengths::total_ones() const noexcept {
  std::size_t t = 0;
  for (auto l : lengths) t += l;
  return t;
}

RunLengths run_lengths(std::span<const int> labels) {
  RunLengths r;
  std::size_t run = 0;
  auto close = [&] {
    if (run > 0) {
      r.lengths.push_back(run);
      ++r.by_length[run];
      run = 0;
    }
  };
  for (int v : labels) {
    if (v != 0) {
      ++run;
    } else {
      close();
    }
  }
  close();
  return r;
}

std::string bin_series_csv(const BinSeries& s, const Provenance& p, const std::vector<ExtraColumn>& extra) {
  for (const auto& col : extra)
    if (col.values.size() != s.size())
      fail(ErrorKind::ArityMismatch, "column '" + col.name + "' length differs from bin count");
  std::ostringstream out;
  write_provenance(out, p);
  out << "timestamp,read_bytes,write_bytes,read_ops,write_ops,read_time,write_time";
  for (const auto& col : extra) out << ',' << col.name;
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    const BinStats& b = s.bins[i];
    out << s.timestamp(i) << ',' << format_double(b.read_bytes) << ',' << format_double(b.write_bytes)
        << ',' << format_double(b.read_ops) << ',' << format_double(b.write_ops) << ','
        << format_double(b.read_time) << ',' << format_double(b.write_time);
    for (const auto& col : extra) out << ',' << col.values[i];
    out << '\n';
  }
  return out.str();
}

LoadedBins load_bin_series_csv(const std::filesystem::path& path, std::int64_t bin_width_hint) {
  const CsvTable t = read_csv(path);
  LoadedBins out;
  out.provenance = t.provenance;
  const std::size_t ts = t.column("timestamp");
  const std::size_t rb = t.column("read_bytes"), wb = t.column("write_bytes");
  const std::size_t ro = t.column("read_ops"), wo = t.column("write_ops");
  const std::size_t rt = t.column("read_time"), wt = t.column("write_time");
  std::vector<std::size_t> extra_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i != ts && i != rb && i != wb && i != ro && i != wo && i != rt && i != wt) {
      extra_cols.push_back(i);
      out.extra[t.header[i]];
    }
  }
  BinSeries& s = out.series;
  s.bin_width = bin_width_hint;
  std::vector<std::int64_t> stamps;
  for (const auto& row : t.rows) {
    stamps.push_back(parse_int(row[ts]));
    BinStats b;
    b.read_bytes = parse_double(row[rb]);
    b.write_bytes = parse_double(row[wb]);
    b.read_ops = parse_double(row[ro]);
    b.write_ops = parse_double(row[wo]);
    b.read_time = parse_double(row[rt]);
    b.write_time = parse_double(row[wt]);
    s.bins.push_back(b);
    for (auto c : extra_cols) out.extra[t.header[c]].push_back(static_cast<int>(parse_int(row[c])));
  }
  if (stamps.size() >= 2) s.bin_width = stamps[1] - stamps[0];
  if (s.bin_width <= 0) fail(ErrorKind::ParseError, "non-increasing timestamps in " + path.string());
  for (std::size_t i = 1; i < stamps.size(); ++i)
    if (stamps[i] - stamps[i - 1] != s.bin_width)
      fail(ErrorKind::ParseError, "bins in " + path.string() + " are not contiguous");
  if (!stamps.empty()) s.origin = stamps.front();
  return out;
}

}  // namespace burstcast
