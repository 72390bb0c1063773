#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "burstcast/error.hpp"
#include "burstcast/rng.hpp"
#include "burstcast/timeseries.hpp"
#include "support.hpp"

using namespace burstcast;
using testsupport::kind_of;

namespace {

IoOperation op(Channel c, double bytes, double start, double end, double ops = 1.0) {
  return IoOperation{c, bytes, ops, start, end, end - start};
}

std::vector<IoOperation> random_ops(Rng& r, std::size_t n) {
  std::vector<IoOperation> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double start = 1509271800.0 + r.uniform(0.0, 86400.0);
    const double len = r.uniform() < 0.3 ? 0.0 : r.exponential(1.0 / 900.0);
    out.push_back(op(r.uniform() < 0.5 ? Channel::Read : Channel::Write, std::floor(r.lognormal(15, 2)), start,
                     start + len, std::floor(r.uniform(0, 100))));
  }
  return out;
}

double total(const BinSeries& s, double (BinStats::*field)) {
  double t = 0.0;
  for (const auto& b : s.bins) t += b.*field;
  return t;
}

BinSeries series_of(std::vector<double> read_bytes, std::int64_t w = 300, std::int64_t origin = 0) {
  BinSeries s;
  s.bin_width = w;
  s.origin = origin;
  for (double v : read_bytes) s.bins.push_back(BinStats{v, 2 * v, 1, 1, 1, 1});
  return s;
}

bool close_rel(double a, double b, double rel) { return std::fabs(a - b) <= rel * std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("an op spanning three bins splits equally") {
  const double mib = 1048576.0;
  const std::vector<IoOperation> ops{op(Channel::Read, 600 * mib, 300.0, 1000.0, 30)};
  const BinSeries s = bin_operations(ops, 300);
  REQUIRE(s.size() == 3);
  CHECK(s.origin == 300);
  for (const auto& b : s.bins) {
    CHECK(b.read_bytes == 200 * mib);
    CHECK(b.read_ops == 10.0);
    CHECK(b.write_bytes == 0.0);
  }
}

TEST_CASE("Listing 1 read op spreads over 206 bins") {
  const double start = 1509271803.0 + 15924.384187, end = 1509271803.0 + 77689.803174;
  const BinSeries s = bin_operations(std::vector<IoOperation>{op(Channel::Read, 5924503, start, end, 8409)}, 300);
  // Independent recomputation of the span and share.
  const auto first = static_cast<long long>(std::floor(start / 300.0));
  const auto last = static_cast<long long>(std::floor(end / 300.0));
  const auto span = last - first + 1;
  CHECK(span == 206);
  REQUIRE(s.size() == static_cast<std::size_t>(span));
  CHECK(s.origin == first * 300);
  const double share = 5924503.0 / static_cast<double>(span);
  CHECK(std::fabs(share - 28759.72) < 0.005);
  for (const auto& b : s.bins) CHECK(b.read_bytes == share);
}

TEST_CASE("zero-length and single-bin ops land whole") {
  const BinSeries s =
      bin_operations(std::vector<IoOperation>{op(Channel::Write, 42, 610, 610, 3), op(Channel::Write, 8, 601, 899)}, 300);
  REQUIRE(s.size() == 1);
  CHECK(s.bins[0].write_bytes == 50.0);
  CHECK(s.bins[0].write_ops == 4.0);
  CHECK(s.bins[0].write_time == 298.0);
}

TEST_CASE("empty stream gives an empty series") {
  CHECK(bin_operations(std::vector<IoOperation>{}, 300).empty());
}

TEST_CASE("gaps between ops are zero-filled") {
  const auto s = bin_operations(std::vector<IoOperation>{op(Channel::Read, 1, 0, 0), op(Channel::Read, 1, 1500, 1500)}, 300);
  REQUIRE(s.size() == 6);
  CHECK(s.bins[2].read_bytes == 0.0);
  CHECK(s.timestamp(5) == 1500);
}

TEST_CASE("binning conserves bytes, ops and time and ignores input order") {
  Rng r(11);
  std::mt19937 gen(5);
  for (int trial = 0; trial < 25; ++trial) {
    auto ops = random_ops(r, 300);
    const BinSeries s = bin_operations(ops, 300);
    double rb = 0, wb = 0, ro = 0, wt = 0;
    for (const auto& o : ops) {
      (o.channel == Channel::Read ? rb : wb) += o.bytes;
      if (o.channel == Channel::Read) ro += o.op_count;
      else wt += o.io_seconds;
    }
    CHECK(close_rel(total(s, &BinStats::read_bytes), rb, 1e-9));
    CHECK(close_rel(total(s, &BinStats::write_bytes), wb, 1e-9));
    CHECK(close_rel(total(s, &BinStats::read_ops), ro, 1e-9));
    CHECK(close_rel(total(s, &BinStats::write_time), wt, 1e-9));
    std::shuffle(ops.begin(), ops.end(), gen);
    CHECK(bin_operations(ops, 300) == s);
  }
}

TEST_CASE("merge") {
  const BinSeries a = series_of({1, 2, 3}, 300, 600);
  const BinSeries b = series_of({10, 20}, 300, 1200);
  const BinSeries ab = merge(a, b);
  CHECK(ab == merge(b, a));
  CHECK(ab.origin == 600);
  REQUIRE(ab.size() == 4);
  CHECK(ab.bins[2].read_bytes == 13.0);
  CHECK(ab.bins[3].read_bytes == 20.0);
  CHECK(merge(a, BinSeries{}) == a);
  CHECK(merge(BinSeries{}, a) == a);
  CHECK(kind_of([&] { merge(a, series_of({1}, 600)); }) == ErrorKind::WidthMismatch);
}

TEST_CASE("merging per-job series equals binning the whole stream") {
  Rng r(12);
  BinSeries merged;
  std::vector<IoOperation> all;
  for (int job = 0; job < 30; ++job) {
    const auto ops = random_ops(r, 20);
    all.insert(all.end(), ops.begin(), ops.end());
    merged = merge(merged, bin_operations(ops, 300));
  }
  const BinSeries single = bin_operations(all, 300);
  REQUIRE(merged.size() == single.size());
  CHECK(merged.origin == single.origin);
  for (std::size_t i = 0; i < single.size(); ++i) {
    CHECK(close_rel(merged.bins[i].read_bytes, single.bins[i].read_bytes, 1e-9));
    CHECK(close_rel(merged.bins[i].write_time, single.bins[i].write_time, 1e-9));
  }
}

TEST_CASE("rebin") {
  const BinSeries s = series_of({1, 2, 3, 4});
  CHECK(rebin(s, 1) == s);
  const BinSeries r2 = rebin(s, 2);
  REQUIRE(r2.size() == 2);
  CHECK(r2.bins[0].read_bytes == 3.0);
  CHECK(r2.bins[1].read_bytes == 7.0);
  CHECK(r2.bin_width == 600);
  // Epoch alignment: a series starting mid-group is padded.
  const BinSeries odd = series_of({1, 2, 3, 4}, 300, 300);
  const BinSeries r2o = rebin(odd, 2);
  CHECK(r2o.origin == 0);
  REQUIRE(r2o.size() == 3);
  CHECK(r2o.bins[0].read_bytes == 1.0);
  CHECK(r2o.bins[2].read_bytes == 4.0);
  for (std::int64_t f : {0, -3}) {
    CHECK(kind_of([&] { rebin(s, f); }) == ErrorKind::InvalidFactor);
  }
}

TEST_CASE("rebin conserves totals and composes") {
  Rng r(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(1 + r.below(200));
    for (auto& x : v) x = std::floor(r.uniform(0, 1000));
    const BinSeries s = series_of(v, 300, 300 * static_cast<std::int64_t>(r.below(50)));
    const std::int64_t a = 1 + static_cast<std::int64_t>(r.below(4)), b = 1 + static_cast<std::int64_t>(r.below(4));
    CHECK(total(rebin(s, a), &BinStats::read_bytes) == total(s, &BinStats::read_bytes));
    CHECK(rebin(s, a * b) == rebin(rebin(s, a), b));
  }
}

TEST_CASE("channel_stats") {
  const ChannelStats c = channel_stats(series_of({5, 5, 5}), Channel::Read);
  CHECK(c.mean == 5.0);
  CHECK(c.stdev == 0.0);
  const double gib = 1073741824.0;
  const ChannelStats two = channel_stats(series_of({0, 2 * gib}), Channel::Read);
  CHECK(two.mean == gib);
  CHECK(two.stdev == gib);
  CHECK(two.n == 2);
  CHECK(kind_of([&] { channel_stats(series_of({1}), Channel::Read); }) == ErrorKind::TooFewBins);
}

TEST_CASE("channel_stats matches a two-pass oracle") {
  Rng r(14);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(2 + r.below(5000));
    for (auto& x : v) x = r.lognormal(20, 1.5);
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    const ChannelStats c = channel_stats(v, Channel::Write);
    CHECK(close_rel(c.mean, mean, 1e-9));
    CHECK(close_rel(c.stdev, sd, 1e-9));
  }
}

TEST_CASE("deviation histogram") {
  BinSeries s = series_of({0, 10, 10, 10, 10, 10, 10, 10, 10, 100});
  const ChannelStats st = channel_stats(s, Channel::Read);
  const DeviationHistogram h = deviation_histogram(s, Channel::Read, st);
  CHECK(h.total() == s.size());

  // Every bin at the mean: a single spike in [0, 0.2σ).
  ChannelStats fake{Channel::Read, 10.0, 3.0, 8};
  const DeviationHistogram spike = deviation_histogram(series_of(std::vector<double>(8, 10.0)), Channel::Read, fake);
  CHECK(spike.counts[50] == 8);
  CHECK(spike.total() == 8);

  ChannelStats wide{Channel::Read, 0.0, 1.0, 4};
  const DeviationHistogram caps = deviation_histogram(series_of({-10.5, -10.0, 9.99, 10.0}), Channel::Read, wide);
  CHECK(caps.below_cap == 1);
  CHECK(caps.counts[0] == 1);
  CHECK(caps.counts[99] == 1);
  CHECK(caps.above_cap == 1);

  CHECK(kind_of([&] { deviation_histogram(s, Channel::Read, ChannelStats{Channel::Read, 1.0, 0.0, 10}); }) == ErrorKind::ZeroVariance);
}

TEST_CASE("Gaussian series puts about 68% within one sigma") {
  Rng r(15);
  std::vector<double> v(10000);
  for (auto& x : v) x = 1e9 + 1e8 * r.normal();
  const BinSeries s = series_of(v);
  const ChannelStats st = channel_stats(s, Channel::Read);
  const DeviationHistogram h = deviation_histogram(s, Channel::Read, st);
  std::uint64_t within = 0;
  for (int i = 45; i < 55; ++i) within += h.counts[static_cast<std::size_t>(i)];
  const double frac = static_cast<double>(within) / 10000.0;
  CHECK(frac == doctest::Approx(0.6827).epsilon(0.03 / 0.6827));
}

TEST_CASE("run lengths") {
  const RunLengths r = run_lengths(std::vector<int>{0, 1, 1, 0, 1});
  CHECK(r.lengths == std::vector<std::size_t>{2, 1});
  CHECK(r.singles() == 1);
  CHECK(r.total_ones() == 3);
  CHECK(r.by_length.at(2) == 1);
  CHECK(run_lengths(std::vector<int>(10, 0)).lengths.empty());
  CHECK(run_lengths(std::vector<int>{1, 1, 1}).lengths == std::vector<std::size_t>{3});
  Rng g(16);
  std::vector<int> labels(1000);
  for (auto& l : labels) l = g.uniform() < 0.3;
  std::size_t ones = 0;
  for (int l : labels) ones += l;
  CHECK(run_lengths(labels).total_ones() == ones);
}

TEST_CASE("bin series CSV round trip") {
  const auto dir = testsupport::scratch("bins_csv");
  BinSeries s = series_of({1.5, 0, 1e12 / 3.0}, 300, 1509271800);
  const Provenance p{"abc123", 9, true};
  write_text_file(dir / "b.csv", bin_series_csv(s, p, {{"read_label", {0, 0, 1}}}));
  const LoadedBins lb = load_bin_series_csv(dir / "b.csv");
  CHECK(lb.series == s);
  CHECK(lb.provenance.config_hash == "abc123");
  CHECK(lb.provenance.seed == 9);
  CHECK(lb.extra.at("read_label") == std::vector<int>{0, 0, 1});
  const std::string text = read_text_file(dir / "b.csv");
  CHECK(text.find("timestamp,read_bytes,write_bytes,read_ops,write_ops,read_time,write_time,read_label") !=
        std::string::npos);
}
