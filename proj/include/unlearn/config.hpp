#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "unlearn/core_model.hpp"
#include "unlearn/harness.hpp"

namespace unlearn {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), lineno(line) {}
  int lineno;
};

// Minimal TOML-style config: [section] headers, key = value lines, # comments.
// Values: numbers, booleans, quoted or bare strings, [a, b, c] arrays.
// Keys are stored dotted ("grids.e_count") with their source line so errors
// stay line-precise.
class Config {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>,
                             std::vector<std::string>>;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& filename = "<config>");

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;  // empty when absent

  // throws ConfigError at the offending key's line when any stored key is not
  // in `known`
  void require_known_keys(const std::vector<std::string>& known) const;

  int line_of(const std::string& key) const;
  const std::string& filename() const { return filename_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::string filename_;
  std::map<std::string, std::pair<Value, int>> entries_;
};

enum class LossMode { synthetic_quadratic, synthetic_experimental, erm };

std::string to_string(LossMode mode);

// The file-backed sweep configuration: problem constants, grids, loss mode,
// ERM protocol knobs, and output paths, with defaults matching the synthetic
// experimental protocol (L=25, mu=1, rf=0.01, 50 reps, log grids 1e-2..1e2,
// horizons 1..1e6).
struct SweepConfig {
  double mu = 1.0;
  double lipschitz = 25.0;
  std::size_t dim = 2;
  double rf = 0.01;

  LossMode loss_mode = LossMode::synthetic_experimental;
  std::uint64_t seed = 20250515;
  std::uint64_t n_reps = 50;
  SensitivityMode sensitivity_mode = SensitivityMode::measured;
  FinetuneRuleKind finetune_rule = FinetuneRuleKind::decaying;
  int threads = 0;

  std::vector<double> e_grid;        // ascending
  std::vector<double> kdp_grid;      // ascending
  std::vector<std::uint64_t> horizons;

  // erm mode
  std::string dataset_path;
  std::size_t batch_size = 64;
  double l2_weight = 1.0;
  std::string erm_rule = "geometric";  // geometric | decaying | constant
  double step0 = 1e-2;
  double decay_factor = 0.6;
  std::uint64_t decay_every_epochs = 1000;
  std::uint64_t eval_every = 10;
  std::uint64_t erm_max_steps = 10000;
  double opt_tol = 1e-8;
  std::uint64_t opt_max_iters = 1'000'000;

  std::string out_csv = "results.csv";

  static SweepConfig from_config(const Config& cfg);
  static SweepConfig from_file(const std::string& path);
};

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

}  // namespace unlearn
