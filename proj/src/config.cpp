#include "burstcast/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "burstcast/csv.hpp"
#include "burstcast/error.hpp"

namespace burstcast {

namespace {

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

std::vector<std::string> parse_value(std::string_view raw, const std::string& where) {
  const std::string_view v = trim(raw);
  if (v.empty()) fail(ErrorKind::InvalidConfig, where + ": missing value");
  if (v.front() != '[') return {unquote(v)};
  if (v.back() != ']') fail(ErrorKind::InvalidConfig, where + ": unterminated list");
  std::vector<std::string> out;
  const std::string_view body = trim(v.substr(1, v.size() - 2));
  if (body.empty()) return out;
  std::string cur;
  bool quoted = false;
  for (char c : body) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(unquote(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(unquote(cur));
  return out;
}

}  // namespace

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap m;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "config line " + std::to_string(lineno);
    const std::string body(trim(strip_comment(line)));
    if (body.empty()) continue;
    if (body.front() == '[' && body.find('=') == std::string::npos) {
      if (body.back() != ']') fail(ErrorKind::InvalidConfig, where + ": bad section header");
      section = std::string(trim(std::string_view(body).substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(ErrorKind::InvalidConfig, where + ": expected key = value");
    const std::string key(trim(std::string_view(body).substr(0, eq)));
    if (key.empty()) fail(ErrorKind::InvalidConfig, where + ": empty key");
    m[section.empty() ? key : section + "." + key] = parse_value(std::string_view(body).substr(eq + 1), where);
  }
  return m;
}

void apply_override(ConfigMap& m, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    fail(ErrorKind::InvalidConfig, "override '" + std::string(assignment) + "' is not key=value");
  const std::string key(trim(assignment.substr(0, eq)));
  m[key] = parse_value(assignment.substr(eq + 1), "override " + key);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

// ---- grids --------------------------------------------------------------

namespace {

std::optional<int> opt_int(const std::string& v) {
  if (v == "none" || v == "null") return std::nullopt;
  return static_cast<int>(parse_int(v));
}

bool set_tree_param(TreeParams& t, const std::string& k, const std::string& v) {
  if (k == "max_depth") t.max_depth = opt_int(v);
  else if (k == "max_leaf_nodes") t.max_leaf_nodes = opt_int(v);
  else if (k == "min_samples_split") t.min_samples_split = static_cast<int>(parse_int(v));
  else if (k == "max_features") t.max_features = opt_int(v);
  else return false;
  return true;
}

void set_param(Hyperparams& hp, const std::string& k, const std::string& v) {
  bool ok = true;
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          if (k == "variance_smoothing") p.variance_smoothing = parse_double(v);
          else ok = false;
        } else if constexpr (std::is_same_v<T, LogisticParams>) {
          if (k == "inverse_penalty" || k == "C") p.inverse_penalty = parse_double(v);
          else if (k == "max_iterations") p.max_iterations = static_cast<int>(parse_int(v));
          else if (k == "tolerance") p.tolerance = parse_double(v);
          else ok = false;
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          ok = set_tree_param(p, k, v);
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          if (k == "n_trees") p.n_trees = static_cast<int>(parse_int(v));
          else ok = set_tree_param(p.tree, k, v);
        } else {
          if (k == "n_estimators") p.n_estimators = static_cast<int>(parse_int(v));
          else if (k == "learning_rate") p.learning_rate = parse_double(v);
          else if (k == "max_depth") p.max_depth = static_cast<int>(parse_int(v));
          else if (k == "min_child_weight") p.min_child_weight = parse_double(v);
          else if (k == "gamma") p.gamma = parse_double(v);
          else if (k == "lambda") p.lambda = parse_double(v);
          else if (k == "alpha") p.alpha = parse_double(v);
          else if (k == "colsample_ratio") p.colsample_ratio = parse_double(v);
          else ok = false;
        }
      },
      hp.params);
  if (!ok)
    fail(ErrorKind::InvalidConfig,
         "unknown " + std::string(family_name(hp.family())) + " hyperparameter '" + k + "'");
}

}  // namespace

std::vector<Hyperparams> FamilyGrid::expand(bool class_weighted) const {
  Hyperparams base = Hyperparams::defaults(family);
  base.class_weighted = class_weighted;
  std::vector<Hyperparams> out{base};
  for (const auto& [k, values] : axes) {
    if (values.empty()) fail(ErrorKind::EmptyGrid, "grid axis '" + k + "' has no values");
    std::vector<Hyperparams> next;
    for (const auto& hp : out)
      for (const auto& v : values) {
        Hyperparams h = hp;
        try {
          set_param(h, k, v);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::ParseError) fail(ErrorKind::InvalidConfig, "grid " + k + ": " + e.what());
          throw;
        }
        next.push_back(std::move(h));
      }
    out = std::move(next);
  }
  for (const auto& hp : out) validate(hp);
  return out;
}

// ---- RunConfig ----------------------------------------------------------

std::filesystem::path RunConfig::resolved_logs_dir() const {
  return logs_dir.empty() ? work_dir / "synth" / "logs" : logs_dir;
}

std::vector<std::int64_t> RunConfig::horizon_bins() const {
  std::vector<std::int64_t> out;
  for (int m : horizons_minutes) out.push_back(static_cast<std::int64_t>(m) * 60 / bin_width);
  return out;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s + "]";
}

template <typename T, typename F>
std::vector<std::string> map_str(const std::vector<T>& v, F f) {
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(f(x));
  return out;
}

}  // namespace

std::string RunConfig::canonical() const {
  std::ostringstream o;
  auto d = [](double v) { return format_double(v); };
  o << "bin_width=" << bin_width << '\n';
  o << "channels=" << join(map_str(channels, [](Channel c) { return std::string(channel_name(c)); })) << '\n';
  o << "target_fraction=" << d(target_fraction) << '\n';
  for (const auto& [c, k] : k_override) o << "k." << channel_name(c) << '=' << d(k) << '\n';
  o << "k_max=" << d(k_max) << "\nlevels=" << levels << "\nlabel_mode=" << label_mode << '\n';
  o << "feature_sets=" << join(map_str(feature_sets, [](int v) { return std::to_string(v); })) << '\n';
  o << "set1_both_channels=" << set1_both_channels << "\nhorizon_mode=" << horizon_mode << '\n';
  o << "horizons=" << join(map_str(horizons_minutes, [](int v) { return std::to_string(v); })) << '\n';
  o << "train_fraction=" << d(train_fraction) << '\n';
  for (const auto& g : families) {
    o << "family=" << family_name(g.family) << '\n';
    for (const auto& [k, v] : g.axes) o << "grid." << family_name(g.family) << '.' << k << '=' << join(v) << '\n';
  }
  o << "class_weighted=" << class_weighted << "\nseed=" << seed << '\n';
  o << "schedule_channel=" << channel_name(schedule_channel) << "\npredict_mode=" << predict_mode
    << "\nsimulate_mode=" << simulate_mode << '\n';
  for (const auto& s : strategies) o << "strategy=" << s.name << ':' << d(s.alpha) << '\n';
  for (const auto& j : jobs) o << "job=" << j.name << ':' << d(j.min_time) << ':' << d(j.max_time) << '\n';
  const SynthConfig& s = synth;
  o << "synth=" << d(s.duration) << ',' << s.start_epoch << ',' << d(s.job_arrival_rate) << ',' << d(s.job_length.mu)
    << ',' << d(s.job_length.sigma) << ',' << d(s.read_baseline.mu) << ',' << d(s.read_baseline.sigma) << ','
    << d(s.write_baseline.mu) << ',' << d(s.write_baseline.sigma) << ',' << d(s.op_size) << ',' << s.ranks_per_job
    << ',' << s.uid << '\n';
  for (const auto& b : s.bursts)
    o << "synth.burst=" << b.start_bin << ':' << b.length_bins << ':' << d(b.magnitude) << ':'
      << channel_name(b.channel) << '\n';
  if (s.periodic) {
    const auto& p = *s.periodic;
    o << "synth.periodic=" << p.period_bins << ',' << p.phase << ',' << d(p.magnitude) << ',' << p.ramp << ','
      << p.ramp_bins << ',' << d(p.ramp_peak) << ','
      << join(map_str(p.channels, [](Channel c) { return std::string(channel_name(c)); })) << '\n';
  }
  return o.str();
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical()); }

RunConfig build_run_config(const ConfigMap& m) {
  RunConfig rc;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const std::vector<std::string>* {
    auto it = m.find(key);
    if (it == m.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };
  auto scalar = [&](const std::string& key) -> std::optional<std::string> {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    if (v->size() != 1) fail(ErrorKind::InvalidConfig, key + " expects a single value");
    return v->front();
  };
  auto wrap = [&](const std::string& key, auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidConfig) throw;
      fail(ErrorKind::InvalidConfig, key + ": " + e.what());
    }
  };
  auto num = [&](const std::string& key, double& out) {
    if (auto v = scalar(key)) wrap(key, [&] { out = parse_double(*v); });
  };
  auto integer = [&](const std::string& key, auto& out) {
    if (auto v = scalar(key)) wrap(key, [&] { out = static_cast<std::decay_t<decltype(out)>>(parse_int(*v)); });
  };
  auto boolean = [&](const std::string& key, bool& out) {
    if (auto v = scalar(key)) {
      if (*v == "true" || *v == "1") out = true;
      else if (*v == "false" || *v == "0") out = false;
      else fail(ErrorKind::InvalidConfig, key + " expects true or false");
    }
  };
  auto text = [&](const std::string& key, std::string& out, std::initializer_list<const char*> allowed) {
    if (auto v = scalar(key)) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return *v == a; }))
        fail(ErrorKind::InvalidConfig, key + " has unsupported value '" + *v + "'");
      out = *v;
    }
  };
  auto channel = [&](const std::string& key, const std::string& v) {
    try {
      return parse_channel(v);
    } catch (const Error&) {
      fail(ErrorKind::InvalidConfig, key + ": unknown channel '" + v + "'");
    }
  };

  if (auto v = scalar("work_dir")) rc.work_dir = *v;
  if (auto v = scalar("logs_dir")) rc.logs_dir = *v;
  boolean("recursive", rc.recursive);
  integer("threads", rc.threads);
  integer("bin_width", rc.bin_width);
  if (rc.bin_width <= 0) fail(ErrorKind::InvalidConfig, "bin_width must be > 0");
  if (const auto* v = get("channels")) {
    rc.channels.clear();
    for (const auto& c : *v) rc.channels.push_back(channel("channels", c));
    if (rc.channels.empty()) fail(ErrorKind::InvalidConfig, "channels is empty");
  }
  num("target_fraction", rc.target_fraction);
  if (!(rc.target_fraction > 0.0 && rc.target_fraction < 1.0))
    fail(ErrorKind::InvalidConfig, "target_fraction must lie in (0, 1)");
  for (Channel c : {Channel::Read, Channel::Write}) {
    double k = 0.0;
    const std::string key = "k." + std::string(channel_name(c));
    if (m.count(key)) {
      num(key, k);
      rc.k_override[c] = k;
    }
  }
  num("k_max", rc.k_max);
  integer("levels", rc.levels);
  text("label_mode", rc.label_mode, {"binary", "severity"});
  if (const auto* v = get("feature_sets")) {
    rc.feature_sets.clear();
    for (const auto& s : *v) wrap("feature_sets", [&] { rc.feature_sets.push_back(static_cast<int>(parse_int(s))); });
  }
  for (int s : rc.feature_sets)
    if (s < 1 || s > 3) fail(ErrorKind::InvalidConfig, "feature set " + std::to_string(s) + " is not 1, 2 or 3");
  boolean("set1_both_channels", rc.set1_both_channels);
  text("horizon_mode", rc.horizon_mode, {"lead", "rebin"});
  if (const auto* v = get("horizons")) {
    for (const auto& s : *v) wrap("horizons", [&] { rc.horizons_minutes.push_back(static_cast<int>(parse_int(s))); });
  } else {
    for (int mnt = 5; mnt <= 120; mnt += 5) rc.horizons_minutes.push_back(mnt);
  }
  for (int mnt : rc.horizons_minutes)
    if (mnt <= 0 || (static_cast<std::int64_t>(mnt) * 60) % rc.bin_width != 0)
      fail(ErrorKind::InvalidConfig, "horizon " + std::to_string(mnt) + " min is not a positive multiple of bin_width");
  num("train_fraction", rc.train_fraction);

  std::vector<std::string> fams{"gbt"};
  if (const auto* v = get("families")) fams = *v;
  for (const auto& f : fams) {
    FamilyGrid g;
    try {
      g.family = parse_family(f);
    } catch (const Error&) {
      fail(ErrorKind::InvalidConfig, "unknown model family '" + f + "'");
    }
    rc.families.push_back(std::move(g));
  }
  boolean("class_weighted", rc.class_weighted);
  for (const auto& [key, values] : m) {
    if (!key.starts_with("grid.")) continue;
    const auto dot = key.find('.', 5);
    if (dot == std::string::npos) fail(ErrorKind::InvalidConfig, key + ": expected grid.<family>.<param>");
    const std::string fam = key.substr(5, dot - 5);
    auto it = std::find_if(rc.families.begin(), rc.families.end(),
                           [&](const FamilyGrid& g) { return family_name(g.family) == fam; });
    if (it == rc.families.end()) fail(ErrorKind::InvalidConfig, key + ": family '" + fam + "' is not in families");
    it->axes[key.substr(dot + 1)] = values;
    used.insert(key);
  }
  for (const auto& g : rc.families) (void)g.expand(rc.class_weighted);

  if (auto v = scalar("seed")) wrap("seed", [&] { rc.seed = parse_uint(*v); });
  if (auto v = scalar("schedule_channel")) rc.schedule_channel = channel("schedule_channel", *v);
  text("predict_mode", rc.predict_mode, {"horizon", "sliding"});
  text("simulate_mode", rc.simulate_mode, {"truth", "predicted"});

  rc.strategies = default_strategies();
  if (const auto* v = get("strategies")) {
    rc.strategies.clear();
    for (const auto& s : *v) {
      const auto parts = split(s, ':');
      if (parts.size() != 2) fail(ErrorKind::InvalidConfig, "strategy '" + s + "' is not name:alpha");
      Strategy st{parts[0], 0.0};
      wrap("strategies", [&] { st.alpha = parse_double(parts[1]); });
      if (!(st.alpha >= 0.0 && st.alpha <= 1.0)) fail(ErrorKind::InvalidAlpha, "strategy " + s + ": alpha outside [0, 1]");
      rc.strategies.push_back(st);
    }
  }
  rc.jobs = paper_jobs();
  if (const auto* v = get("jobs")) {
    rc.jobs.clear();
    for (const auto& s : *v) {
      const auto parts = split(s, ':');
      if (parts.size() != 3) fail(ErrorKind::InvalidConfig, "job '" + s + "' is not name:min:max");
      JobProfile j{parts[0], 0.0, 0.0};
      wrap("jobs", [&] {
        j.min_time = parse_double(parts[1]);
        j.max_time = parse_double(parts[2]);
      });
      validate(j);
      rc.jobs.push_back(j);
    }
  }

  // Default corpus: two weeks with a predictable periodic pattern.
  SynthConfig& s = rc.synth;
  s.duration = 14 * 86400.0;
  s.bin_width = rc.bin_width;
  s.seed = rc.seed;
  PeriodicBursts p;
  p.period_bins = 101;
  num("synth.duration", s.duration);
  integer("synth.start_epoch", s.start_epoch);
  num("synth.arrival_rate", s.job_arrival_rate);
  num("synth.job_length_mu", s.job_length.mu);
  num("synth.job_length_sigma", s.job_length.sigma);
  num("synth.read_mu", s.read_baseline.mu);
  num("synth.read_sigma", s.read_baseline.sigma);
  num("synth.write_mu", s.write_baseline.mu);
  num("synth.write_sigma", s.write_baseline.sigma);
  num("synth.op_size", s.op_size);
  integer("synth.ranks_per_job", s.ranks_per_job);
  integer("synth.uid", s.uid);
  integer("synth.period", p.period_bins);
  integer("synth.phase", p.phase);
  num("synth.magnitude", p.magnitude);
  boolean("synth.ramp", p.ramp);
  integer("synth.ramp_bins", p.ramp_bins);
  num("synth.ramp_peak", p.ramp_peak);
  if (const auto* v = get("synth.periodic_channels")) {
    p.channels.clear();
    for (const auto& c : *v) p.channels.push_back(channel("synth.periodic_channels", c));
  }
  if (p.period_bins > 0) s.periodic = p;
  if (const auto* v = get("synth.bursts")) {
    for (const auto& b : *v) {
      const auto parts = split(b, ':');
      if (parts.size() != 4) fail(ErrorKind::InvalidConfig, "burst '" + b + "' is not start:length:magnitude:channel");
      PlantedBurst pb;
      wrap("synth.bursts", [&] {
        pb.start_bin = parse_int(parts[0]);
        pb.length_bins = parse_int(parts[1]);
        pb.magnitude = parse_double(parts[2]);
      });
      pb.channel = channel("synth.bursts", parts[3]);
      s.bursts.push_back(pb);
    }
  }
  validate(s);

  for (const auto& [key, _] : m)
    if (!used.count(key)) fail(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  ConfigMap m;
  if (!path.empty()) {
    std::string text;
    try {
      text = read_text_file(path);
    } catch (const Error&) {
      fail(ErrorKind::MissingArtifact, "config file " + path.string() + " is not readable");
    }
    m = parse_config_text(text);
  }
  for (const auto& o : overrides) apply_override(m, o);
  return build_run_config(m);
}

}  // namespace burstcast
