#include "gsgd/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <utility>

#include "gsgd/errors.hpp"

namespace gsgd::cli {
namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 10> kNames{{
    {Algorithm::sgd, "sgd"},
    {Algorithm::gsgd, "gsgd"},
    {Algorithm::ssgd, "ssgd"},
    {Algorithm::gssgd, "gssgd"},
    {Algorithm::asgd, "asgd"},
    {Algorithm::gasgd, "gasgd"},
    {Algorithm::srmsprop, "srmsprop"},
    {Algorithm::gsrmsprop, "gsrmsprop"},
    {Algorithm::sadagrad, "sadagrad"},
    {Algorithm::gsadagrad, "gsadagrad"},
}};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) + ": " +
                    std::string(why));
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value, T min_value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    bad(key, value, "expected an integer");
  }
  if (out < min_value) bad(key, value, "must be at least " + std::to_string(min_value));
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    bad(key, value, "expected a real number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad(key, value, "expected true or false");
}

std::string fmt_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (const auto& [algo, text] : kNames) {
    if (text == name) return algo;
  }
  return std::nullopt;
}

std::string_view to_string(Algorithm algo) {
  for (const auto& [a, text] : kNames) {
    if (a == algo) return text;
  }
  return "?";
}

bool is_guided(Algorithm algo) { return to_string(algo).front() == 'g'; }

Algorithm partner(Algorithm algo) {
  const std::string_view name = to_string(algo);
  const std::string other = is_guided(algo) ? std::string(name.substr(1)) : "g" + std::string(name);
  return *parse_algorithm(other);
}

AlgorithmTraits traits(Algorithm algo) {
  using engine::Mode;
  using optim::Rule;
  switch (algo) {
    case Algorithm::sgd:
      return {Mode::sequential, false, Rule::vanilla};
    case Algorithm::gsgd:
      return {Mode::sequential, true, Rule::vanilla};
    case Algorithm::ssgd:
      return {Mode::sync, false, Rule::vanilla};
    case Algorithm::gssgd:
      return {Mode::sync, true, Rule::vanilla};
    case Algorithm::asgd:
      return {Mode::async, false, Rule::vanilla};
    case Algorithm::gasgd:
      return {Mode::async, true, Rule::vanilla};
    case Algorithm::srmsprop:
      return {Mode::sync, false, Rule::rmsprop};
    case Algorithm::gsrmsprop:
      return {Mode::sync, true, Rule::rmsprop};
    case Algorithm::sadagrad:
      return {Mode::sync, false, Rule::adagrad};
    case Algorithm::gsadagrad:
      return {Mode::sync, true, Rule::adagrad};
  }
  throw ConfigError("unknown algorithm");
}

engine::LatencyModel parse_latency(std::string_view text) {
  engine::LatencyModel model;
  std::vector<engine::LatencyRange> ranges;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string_view item =
        trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    const auto colon = item.find(':');
    engine::LatencyRange r;
    if (colon == std::string_view::npos) {
      r.lo = r.hi = parse_integer<std::int64_t>("latency", item, 0);
    } else {
      r.lo = parse_integer<std::int64_t>("latency", trim(item.substr(0, colon)), 0);
      r.hi = parse_integer<std::int64_t>("latency", trim(item.substr(colon + 1)), 0);
      if (r.hi < r.lo) bad("latency", item, "hi must not be below lo");
    }
    ranges.push_back(r);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (ranges.size() == 1) {
    model.all = ranges.front();
  } else {
    model.per_worker = std::move(ranges);
  }
  return model;
}

std::string format_latency(const engine::LatencyModel& latency) {
  auto one = [](const engine::LatencyRange& r) {
    return std::to_string(r.lo) + ":" + std::to_string(r.hi);
  };
  if (latency.per_worker.empty()) return one(latency.all);
  std::string out;
  for (std::size_t i = 0; i < latency.per_worker.size(); ++i) {
    if (i) out += ',';
    out += one(latency.per_worker[i]);
  }
  return out;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "dataset") {
    cfg.dataset = std::string(value);
  } else if (key == "header") {
    cfg.header = parse_bool(key, value);
  } else if (key == "label_column") {
    int v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
      bad(key, value, "expected an integer");
    }
    cfg.label_column = v;
  } else if (key == "stratify") {
    cfg.stratify = parse_bool(key, value);
  } else if (key == "iqr_factor") {
    if (value.empty() || value == "none") {
      cfg.iqr_factor.reset();
    } else {
      const double f = parse_real(key, value);
      if (f < 0.0) bad(key, value, "must be non-negative");
      cfg.iqr_factor = f;
    }
  } else if (key == "algo" || key == "algorithm") {
    auto a = parse_algorithm(value);
    if (!a) {
      bad("algo", value,
          "expected one of sgd, gsgd, ssgd, gssgd, asgd, gasgd, srmsprop, gsrmsprop, sadagrad, gsadagrad");
    }
    cfg.algorithm = *a;
  } else if (key == "runs") {
    cfg.runs = parse_integer<std::size_t>(key, value, 1);
  } else if (key == "epochs") {
    cfg.epochs = parse_integer<std::size_t>(key, value, 1);
  } else if (key == "max_updates") {
    if (value.empty() || value == "none") {
      cfg.max_updates.reset();
    } else {
      cfg.max_updates = parse_integer<std::size_t>(key, value, 1);
    }
  } else if (key == "eta") {
    cfg.eta = parse_real(key, value);
    if (!(cfg.eta > 0.0)) bad(key, value, "must be positive");
  } else if (key == "rho") {
    cfg.rho = parse_integer<std::size_t>(key, value, 1);
  } else if (key == "workers") {
    if (value.empty() || value == "rho") {
      cfg.workers.reset();
    } else {
      cfg.workers = parse_integer<std::size_t>(key, value, 1);
    }
  } else if (key == "batch_size") {
    cfg.batch_size = parse_integer<std::size_t>(key, value, 1);
  } else if (key == "replay_cap") {
    cfg.replay_cap = parse_integer<std::size_t>(key, value, 1);
  } else if (key == "seed") {
    cfg.seed = parse_integer<std::uint64_t>(key, value, 0);
  } else if (key == "scheduler") {
    if (value == "simulated") {
      cfg.scheduler = engine::SchedulerKind::simulated;
    } else if (value == "concurrent") {
      cfg.scheduler = engine::SchedulerKind::concurrent;
    } else {
      bad(key, value, "expected simulated or concurrent");
    }
  } else if (key == "latency") {
    cfg.latency = parse_latency(value);
  } else if (key == "out") {
    cfg.out = std::string(value);
  } else if (key == "rmsprop_init") {
    if (value == "paper") {
      cfg.rmsprop_init = optim::RmspropInit::paper;
    } else if (value == "square") {
      cfg.rmsprop_init = optim::RmspropInit::square;
    } else {
      bad(key, value, "expected paper or square");
    }
  } else if (key == "rank_by") {
    if (value == "verif") {
      cfg.rank_by = guided::RankBy::verification;
    } else if (value == "self") {
      cfg.rank_by = guided::RankBy::self;
    } else {
      bad(key, value, "expected verif or self");
    }
  } else if (key == "test_fraction" || key == "validation_fraction") {
    const double f = parse_real(key, value);
    if (!(f > 0.0 && f < 1.0)) bad(key, value, "must lie in (0, 1)");
    (key == "test_fraction" ? cfg.test_fraction : cfg.validation_fraction) = f;
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

void parse_config(std::istream& in, ExperimentConfig& cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, view.substr(0, eq), view.substr(eq + 1));
  }
}

void load_config_file(const std::filesystem::path& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  parse_config(in, cfg);
}

std::string serialize(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "dataset = " << cfg.dataset << '\n'
     << "header = " << (cfg.header ? "true" : "false") << '\n'
     << "label_column = " << cfg.label_column << '\n'
     << "stratify = " << (cfg.stratify ? "true" : "false") << '\n'
     << "iqr_factor = " << (cfg.iqr_factor ? fmt_real(*cfg.iqr_factor) : "none") << '\n'
     << "algo = " << to_string(cfg.algorithm) << '\n'
     << "runs = " << cfg.runs << '\n'
     << "epochs = " << cfg.epochs << '\n'
     << "max_updates = " << (cfg.max_updates ? std::to_string(*cfg.max_updates) : "none") << '\n'
     << "eta = " << fmt_real(cfg.eta) << '\n'
     << "rho = " << cfg.rho << '\n'
     << "workers = " << (cfg.workers ? std::to_string(*cfg.workers) : "rho") << '\n'
     << "batch_size = " << cfg.batch_size << '\n'
     << "replay_cap = " << cfg.replay_cap << '\n'
     << "seed = " << cfg.seed << '\n'
     << "scheduler = " << engine::to_string(cfg.scheduler) << '\n'
     << "latency = " << format_latency(cfg.latency) << '\n'
     << "out = " << cfg.out << '\n'
     << "rmsprop_init = " << optim::to_string(cfg.rmsprop_init) << '\n'
     << "rank_by = " << (cfg.rank_by == guided::RankBy::verification ? "verif" : "self") << '\n'
     << "test_fraction = " << fmt_real(cfg.test_fraction) << '\n'
     << "validation_fraction = " << fmt_real(cfg.validation_fraction) << '\n';
  return os.str();
}

engine::EngineConfig engine_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  const AlgorithmTraits t = traits(cfg.algorithm);
  engine::EngineConfig e;
  e.mode = t.mode;
  e.guided = t.guided;
  e.rule = t.rule;
  e.rmsprop_init = cfg.rmsprop_init;
  e.workers = cfg.worker_count();
  e.epochs = cfg.epochs;
  e.max_updates = cfg.max_updates;
  e.eta = cfg.eta;
  e.guided_cfg.rho = cfg.rho;
  // The cap can never exceed the window it selects from.
  e.guided_cfg.replay_cap = std::min(cfg.replay_cap, cfg.rho);
  e.guided_cfg.rank_by = cfg.rank_by;
  e.batch_size = cfg.batch_size;
  e.seed = seed;
  e.scheduler = cfg.scheduler;
  e.latency = cfg.latency;
  return e;
}

data::SplitSpec split_spec(const ExperimentConfig& cfg, std::uint64_t seed) {
  return {cfg.test_fraction, cfg.validation_fraction, seed, cfg.stratify};
}

CsvSchema csv_schema(const ExperimentConfig& cfg) {
  CsvSchema s;
  s.has_header = cfg.header;
  s.label_column = cfg.label_column;
  return s;
}

}  // namespace gsgd::cli
