#include "unlearn/config.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace unlearn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// strips an unquoted # comment
std::string strip_comment(const std::string& s) {
  bool in_quote = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_quote = !in_quote;
    if (s[i] == '#' && !in_quote) return s.substr(0, i);
  }
  return s;
}

bool parse_number(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size() && std::isfinite(out);
}

Config::Value parse_scalar(const std::string& tok, const std::string& file, int line) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return tok.substr(1, tok.size() - 2);
  if (tok == "true") return true;
  if (tok == "false") return false;
  double num = 0.0;
  if (parse_number(tok, num)) return num;
  if (tok.empty()) throw ConfigError(file, line, "missing value");
  // bare word string (e.g. loss = erm); anything fancier must be quoted
  for (char c : tok) {
    if (std::isalnum(static_cast<unsigned char>(c)) == 0 && c != '_' && c != '-' && c != '.' &&
        c != '/')
      throw ConfigError(file, line, "malformed value '" + tok + "' (quote strings)");
  }
  return tok;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& filename) {
  Config cfg;
  cfg.filename_ = filename;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(filename, lineno, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(filename, lineno, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(filename, lineno, "expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(filename, lineno, "empty key");
    const std::string full_key = section.empty() ? key : section + "." + key;
    if (cfg.entries_.count(full_key))
      throw ConfigError(filename, lineno, "duplicate key '" + full_key + "'");

    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']')
        throw ConfigError(filename, lineno, "unterminated array for '" + full_key + "'");
      const std::string body = trim(value.substr(1, value.size() - 2));
      std::vector<double> nums;
      std::vector<std::string> strs;
      bool numeric = true;
      if (!body.empty()) {
        std::size_t start = 0;
        while (start <= body.size()) {
          std::size_t pos = body.find(',', start);
          const std::string tok =
              trim(pos == std::string::npos ? body.substr(start) : body.substr(start, pos - start));
          if (tok.empty()) throw ConfigError(filename, lineno, "empty array element");
          double num = 0.0;
          if (numeric && parse_number(tok, num)) {
            nums.push_back(num);
          } else {
            numeric = false;
          }
          if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
            strs.push_back(tok.substr(1, tok.size() - 2));
          else
            strs.push_back(tok);
          if (pos == std::string::npos) break;
          start = pos + 1;
        }
      }
      if (numeric)
        cfg.entries_[full_key] = {Value(nums), lineno};
      else
        cfg.entries_[full_key] = {Value(strs), lineno};
      continue;
    }
    cfg.entries_[full_key] = {parse_scalar(value, filename, lineno), lineno};
  }
  return cfg;
}

void Config::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(filename_, line_of(key), "key '" + key + "': " + what);
}

int Config::line_of(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (const double* v = std::get_if<double>(&it->second.first)) return *v;
  fail(key, "expected a number");
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (const double* v = std::get_if<double>(&it->second.first)) {
    if (*v != std::floor(*v)) fail(key, "expected an integer");
    return static_cast<std::int64_t>(*v);
  }
  fail(key, "expected an integer");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (const bool* v = std::get_if<bool>(&it->second.first)) return *v;
  fail(key, "expected true or false");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (const std::string* v = std::get_if<std::string>(&it->second.first)) return *v;
  fail(key, "expected a string");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return {};
  if (const auto* v = std::get_if<std::vector<double>>(&it->second.first)) return *v;
  if (const double* v = std::get_if<double>(&it->second.first)) return {*v};
  fail(key, "expected an array of numbers");
}

void Config::require_known_keys(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(filename_, value.second, "unknown key '" + key + "'");
  }
}

std::string to_string(LossMode mode) {
  switch (mode) {
    case LossMode::synthetic_quadratic: return "synthetic_quadratic";
    case LossMode::synthetic_experimental: return "synthetic_experimental";
    case LossMode::erm: return "erm";
  }
  return "?";
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_spaced: need 0 < lo <= hi");
  if (count == 0) throw std::invalid_argument("log_spaced: count must be >= 1");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                static_cast<double>(count - 1));
  }
  return out;
}

SweepConfig SweepConfig::from_file(const std::string& path) {
  return from_config(Config::parse_file(path));
}

SweepConfig SweepConfig::from_config(const Config& cfg) {
  static const std::vector<std::string> known = {
      "problem.mu", "problem.lipschitz", "problem.dim", "problem.rf",
      "sweep.loss", "sweep.seed", "sweep.n_reps", "sweep.sensitivity", "sweep.finetune_rule",
      "sweep.threads",
      "grids.e_min", "grids.e_max", "grids.e_count", "grids.e_values",
      "grids.kdp_min", "grids.kdp_max", "grids.kdp_count", "grids.kdp_values",
      "grids.horizon_min", "grids.horizon_max", "grids.horizon_count", "grids.horizon_values",
      "erm.dataset", "erm.batch_size", "erm.l2_weight", "erm.rule", "erm.step0",
      "erm.decay_factor", "erm.decay_every_epochs", "erm.eval_every", "erm.max_steps",
      "erm.opt_tol", "erm.opt_max_iters",
      "output.csv",
  };
  cfg.require_known_keys(known);

  auto bad = [&](const std::string& key, const std::string& what) -> void {
    throw ConfigError(cfg.filename(), cfg.line_of(key), "key '" + key + "': " + what);
  };

  SweepConfig sc;
  sc.mu = cfg.get_double("problem.mu", sc.mu);
  sc.lipschitz = cfg.get_double("problem.lipschitz", sc.lipschitz);
  const std::int64_t dim = cfg.get_int("problem.dim", static_cast<std::int64_t>(sc.dim));
  if (dim < 1) bad("problem.dim", "must be >= 1");
  sc.dim = static_cast<std::size_t>(dim);
  sc.rf = cfg.get_double("problem.rf", sc.rf);
  if (!(sc.rf >= 0.0) || !(sc.rf < 1.0)) bad("problem.rf", "must be in [0, 1)");

  const std::string loss = cfg.get_string("sweep.loss", "synthetic_experimental");
  if (loss == "synthetic_quadratic")
    sc.loss_mode = LossMode::synthetic_quadratic;
  else if (loss == "synthetic_experimental")
    sc.loss_mode = LossMode::synthetic_experimental;
  else if (loss == "erm")
    sc.loss_mode = LossMode::erm;
  else
    bad("sweep.loss", "must be synthetic_quadratic, synthetic_experimental, or erm");

  const std::int64_t seed = cfg.get_int("sweep.seed", static_cast<std::int64_t>(sc.seed));
  sc.seed = static_cast<std::uint64_t>(seed);
  const std::int64_t reps = cfg.get_int("sweep.n_reps", static_cast<std::int64_t>(sc.n_reps));
  if (reps < 1) bad("sweep.n_reps", "must be >= 1");
  sc.n_reps = static_cast<std::uint64_t>(reps);

  const std::string sens = cfg.get_string("sweep.sensitivity", "measured");
  if (sens == "measured")
    sc.sensitivity_mode = SensitivityMode::measured;
  else if (sens == "theoretical")
    sc.sensitivity_mode = SensitivityMode::theoretical;
  else
    bad("sweep.sensitivity", "must be measured or theoretical");

  const std::string ft = cfg.get_string("sweep.finetune_rule", "decaying");
  if (ft == "decaying")
    sc.finetune_rule = FinetuneRuleKind::decaying;
  else if (ft == "constant")
    sc.finetune_rule = FinetuneRuleKind::constant_tuned;
  else if (ft == "scratch_schedule")
    sc.finetune_rule = FinetuneRuleKind::scratch_schedule;
  else
    bad("sweep.finetune_rule", "must be decaying, constant, or scratch_schedule");

  sc.threads = static_cast<int>(cfg.get_int("sweep.threads", 0));

  auto grid = [&](const std::string& base, double def_lo, double def_hi,
                  std::int64_t def_count) {
    std::vector<double> values = cfg.get_double_list("grids." + base + "_values");
    if (values.empty()) {
      const double lo = cfg.get_double("grids." + base + "_min", def_lo);
      const double hi = cfg.get_double("grids." + base + "_max", def_hi);
      const std::int64_t count = cfg.get_int("grids." + base + "_count", def_count);
      if (count < 1) bad("grids." + base + "_count", "must be >= 1");
      if (!(lo > 0.0) || !(hi >= lo)) bad("grids." + base + "_min", "need 0 < min <= max");
      values = log_spaced(lo, hi, static_cast<std::size_t>(count));
    }
    if (std::adjacent_find(values.begin(), values.end(),
                           [](double a, double b) { return a >= b; }) != values.end())
      bad("grids." + base + "_values", "must be strictly ascending");
    return values;
  };

  sc.e_grid = grid("e", 1e-2, 1e2, 20);
  for (double e : sc.e_grid)
    if (!(e > 0.0)) bad("grids.e_values", "thresholds must be > 0");
  sc.kdp_grid = grid("kdp", 1e-2, 1e2, 10);
  for (double k : sc.kdp_grid)
    if (!(k >= 0.0)) bad("grids.kdp_values", "kdp values must be >= 0");

  const std::vector<double> hvals = grid("horizon", 1.0, 1e6, 13);
  sc.horizons.clear();
  for (double h : hvals) {
    const auto steps = static_cast<std::uint64_t>(std::llround(h));
    if (steps < 1) bad("grids.horizon_values", "horizons must be >= 1");
    sc.horizons.push_back(steps);
  }

  sc.dataset_path = cfg.get_string("erm.dataset", "");
  if (sc.loss_mode == LossMode::erm && sc.dataset_path.empty())
    throw ConfigError(cfg.filename(), 0, "erm.dataset is required when sweep.loss = erm");
  const std::int64_t batch = cfg.get_int("erm.batch_size", 64);
  if (batch < 1) bad("erm.batch_size", "must be >= 1");
  sc.batch_size = static_cast<std::size_t>(batch);
  sc.l2_weight = cfg.get_double("erm.l2_weight", 1.0);
  if (!(sc.l2_weight > 0.0)) bad("erm.l2_weight", "must be > 0");
  sc.erm_rule = cfg.get_string("erm.rule", "geometric");
  if (sc.erm_rule != "geometric" && sc.erm_rule != "decaying" && sc.erm_rule != "constant")
    bad("erm.rule", "must be geometric, decaying, or constant");
  sc.step0 = cfg.get_double("erm.step0", 1e-2);
  sc.decay_factor = cfg.get_double("erm.decay_factor", 0.6);
  sc.decay_every_epochs =
      static_cast<std::uint64_t>(cfg.get_int("erm.decay_every_epochs", 1000));
  sc.eval_every = static_cast<std::uint64_t>(cfg.get_int("erm.eval_every", 10));
  if (sc.eval_every < 1) bad("erm.eval_every", "must be >= 1");
  sc.erm_max_steps = static_cast<std::uint64_t>(cfg.get_int("erm.max_steps", 10000));
  if (sc.erm_max_steps < 1) bad("erm.max_steps", "must be >= 1");
  sc.opt_tol = cfg.get_double("erm.opt_tol", 1e-8);
  sc.opt_max_iters = static_cast<std::uint64_t>(cfg.get_int("erm.opt_max_iters", 1'000'000));

  sc.out_csv = cfg.get_string("output.csv", "results.csv");

  if (!(sc.mu > 0.0)) bad("problem.mu", "must be > 0");
  if (!(sc.lipschitz > 0.0)) bad("problem.lipschitz", "must be > 0");
  if (sc.loss_mode == LossMode::synthetic_experimental && sc.dim % 2 != 0)
    bad("problem.dim", "must be even for synthetic_experimental");

  return sc;
}

}  // namespace unlearn
