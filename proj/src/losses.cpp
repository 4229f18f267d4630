#include "unlearn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "unlearn/kernels.hpp"

namespace unlearn {

namespace {
const kernels::Ops& K() { return kernels::active(); }

void check_dim(std::size_t want, std::size_t got, const char* who) {
  if (want != got)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (" +
                                std::to_string(got) + " vs " + std::to_string(want) + ")");
}
}  // namespace

RademacherMixture make_mixture(double gamma_r, double g_forget, double rf) {
  if (!(std::fabs(gamma_r) <= 1.0))
    throw std::invalid_argument("make_mixture: |gamma_r| must be <= 1");
  if (!(std::fabs(g_forget) <= 1.0))
    throw std::invalid_argument("make_mixture: |g_forget| must be <= 1");
  if (!(rf >= 0.0) || !(rf < 1.0)) throw std::invalid_argument("make_mixture: rf must be in [0, 1)");
  return RademacherMixture{gamma_r, g_forget, rf};
}

RademacherMixture make_hard_mixture(double gamma_r, double rf) {
  if (!(gamma_r >= 0.0) || !(gamma_r <= 1.0))
    throw std::invalid_argument("make_hard_mixture: gamma_r must be in [0, 1]");
  const double g_forget =
      rf > 0.0 ? -std::min(1.0, (1.0 - rf) * gamma_r / rf) : -1.0;
  return make_mixture(gamma_r, g_forget, rf);
}

double sample_g(const RademacherMixture& mix, bool from_retain_only, Rng& rng) {
  if (!from_retain_only && rng.bernoulli(mix.rf)) return mix.g_forget;
  return rng.bernoulli(0.5 * (1.0 + mix.gamma_r)) ? 1.0 : -1.0;
}

// ---------------------------------------------------------------------------
// SyntheticQuadraticLoss

SyntheticQuadraticLoss::SyntheticQuadraticLoss(ProblemSpec spec, RademacherMixture mix)
    : spec_(spec), mix_(mix) {}

void SyntheticQuadraticLoss::stochastic_gradient(std::span<const double> theta, double g_value,
                                                 std::span<double> out) const {
  check_dim(spec_.dim, theta.size(), "SyntheticQuadraticLoss::stochastic_gradient");
  check_dim(spec_.dim, out.size(), "SyntheticQuadraticLoss::stochastic_gradient");
  if (!(std::fabs(g_value) <= 1.0))
    throw std::invalid_argument("stochastic_gradient: |g| must be <= 1");
  K().scaled_copy(theta.size(), spec_.mu, theta.data(), out.data());
  out[0] -= 0.5 * spec_.lipschitz * g_value;
}

std::uint64_t SyntheticQuadraticLoss::sample_gradient(std::span<const double> theta, Rng& rng,
                                                      std::span<double> out) const {
  stochastic_gradient(theta, sample_g(mix_, /*from_retain_only=*/true, rng), out);
  return 1;
}

double SyntheticQuadraticLoss::retain_excess(std::span<const double> theta) const {
  check_dim(spec_.dim, theta.size(), "SyntheticQuadraticLoss::retain_excess");
  const double c = 0.5 * spec_.lipschitz / spec_.mu * mix_.retain_mean();
  const double d0 = theta[0] - c;
  double s = d0 * d0;
  if (theta.size() > 1) s += K().sumsq(theta.size() - 1, theta.data() + 1);
  return 0.5 * spec_.mu * s;
}

ParamVector SyntheticQuadraticLoss::retain_optimum() const {
  ParamVector v(spec_.dim, 0.0);
  v[0] = 0.5 * spec_.lipschitz / spec_.mu * mix_.retain_mean();
  return v;
}

ParamVector SyntheticQuadraticLoss::full_optimum() const {
  ParamVector v(spec_.dim, 0.0);
  v[0] = 0.5 * spec_.lipschitz / spec_.mu * mix_.full_mean();
  return v;
}

double SyntheticQuadraticLoss::opt_distance() const {
  return 0.5 * spec_.lipschitz / spec_.mu * std::fabs(mix_.full_mean() - mix_.retain_mean());
}

// ---------------------------------------------------------------------------
// SyntheticExperimentalLoss

SyntheticExperimentalLoss::SyntheticExperimentalLoss(ProblemSpec spec, RademacherMixture mix)
    : spec_(spec), mix_(mix) {
  if (spec_.dim % 2 != 0 || spec_.dim < 2)
    throw std::invalid_argument("SyntheticExperimentalLoss: dim must be even and >= 2");
}

void SyntheticExperimentalLoss::stochastic_gradient(std::span<const double> theta, double g_value,
                                                    std::span<double> out) const {
  check_dim(spec_.dim, theta.size(), "SyntheticExperimentalLoss::stochastic_gradient");
  check_dim(spec_.dim, out.size(), "SyntheticExperimentalLoss::stochastic_gradient");
  if (!(std::fabs(g_value) <= 1.0))
    throw std::invalid_argument("stochastic_gradient: |g| must be <= 1");
  const std::size_t h = spec_.dim / 2;
  const double q = 0.25 * spec_.lipschitz;
  K().scaled_copy(theta.size(), spec_.mu, theta.data(), out.data());
  for (std::size_t i = 0; i < h; ++i) out[i] -= q * g_value;
  // subgradient of |.| at 0 taken as 0
  for (std::size_t i = h; i < theta.size(); ++i) {
    if (theta[i] > 0.0)
      out[i] += q;
    else if (theta[i] < 0.0)
      out[i] -= q;
  }
}

std::uint64_t SyntheticExperimentalLoss::sample_gradient(std::span<const double> theta, Rng& rng,
                                                         std::span<double> out) const {
  stochastic_gradient(theta, sample_g(mix_, /*from_retain_only=*/true, rng), out);
  return 1;
}

double SyntheticExperimentalLoss::tilted_coordinate_minimum() const {
  // min_x (mu/2) x^2 - (L/4) gamma x = -L^2 gamma^2 / (32 mu)
  const double lg = spec_.lipschitz * mix_.retain_mean();
  return -lg * lg / (32.0 * spec_.mu);
}

double SyntheticExperimentalLoss::retain_excess(std::span<const double> theta) const {
  check_dim(spec_.dim, theta.size(), "SyntheticExperimentalLoss::retain_excess");
  const std::size_t h = spec_.dim / 2;
  const double q = 0.25 * spec_.lipschitz;
  const double value = 0.5 * spec_.mu * K().sumsq(theta.size(), theta.data()) -
                       q * mix_.retain_mean() * K().sum(h, theta.data()) +
                       q * K().asum(theta.size() - h, theta.data() + h);
  return value - static_cast<double>(h) * tilted_coordinate_minimum();
}

ParamVector SyntheticExperimentalLoss::retain_optimum() const {
  ParamVector v(spec_.dim, 0.0);
  const double c = 0.25 * spec_.lipschitz * mix_.retain_mean() / spec_.mu;
  std::fill(v.begin(), v.begin() + spec_.dim / 2, c);
  return v;
}

ParamVector SyntheticExperimentalLoss::full_optimum() const {
  ParamVector v(spec_.dim, 0.0);
  const double c = 0.25 * spec_.lipschitz * mix_.full_mean() / spec_.mu;
  std::fill(v.begin(), v.begin() + spec_.dim / 2, c);
  return v;
}

double SyntheticExperimentalLoss::opt_distance() const {
  const double per = 0.25 * spec_.lipschitz / spec_.mu *
                     std::fabs(mix_.full_mean() - mix_.retain_mean());
  return per * std::sqrt(static_cast<double>(spec_.dim / 2));
}

// ---------------------------------------------------------------------------
// ERM dataset

ErmDataset split_dataset(std::vector<double> features, std::vector<int> labels, std::size_t p,
                         double rf, Rng& rng) {
  if (p < 1) throw std::invalid_argument("split_dataset: p must be >= 1");
  if (labels.empty()) throw std::invalid_argument("split_dataset: empty dataset");
  if (features.size() != labels.size() * p)
    throw std::invalid_argument("split_dataset: features size must be n*p");
  if (!(rf >= 0.0) || !(rf < 1.0)) throw std::invalid_argument("split_dataset: rf must be in [0, 1)");
  const std::size_t n = labels.size();
  const std::size_t k = static_cast<std::size_t>(std::floor(rf * static_cast<double>(n)));
  if (k >= n) throw std::invalid_argument("split_dataset: empty retain set");

  int n_classes = 0;
  for (int y : labels) {
    if (y < 0) throw std::invalid_argument("split_dataset: labels must be >= 0");
    n_classes = std::max(n_classes, y + 1);
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }

  ErmDataset d;
  d.n = n;
  d.p = p;
  d.n_classes = n_classes;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.forget_indices.assign(order.begin(), order.begin() + k);
  d.retain_indices.assign(order.begin() + k, order.end());
  std::sort(d.forget_indices.begin(), d.forget_indices.end());
  std::sort(d.retain_indices.begin(), d.retain_indices.end());
  return d;
}

void write_dataset_csv(const std::string& path, const std::vector<double>& features,
                       const std::vector<int>& labels, std::size_t p) {
  if (p == 0 || labels.empty() || features.size() != labels.size() * p)
    throw std::invalid_argument("write_dataset_csv: inconsistent shapes");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  for (std::size_t j = 0; j < p; ++j) out << "f" << j << ",";
  out << "label\n";
  char buf[64];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", features[i * p + j]);
      out << buf << ",";
    }
    out << labels[i] << "\n";
  }
  if (!out) throw std::runtime_error("write_dataset_csv: write failed for " + path);
}

RawDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_dataset_csv: empty file " + path);

  auto split_fields = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = s.find(',', start);
      if (pos == std::string::npos) {
        out.push_back(s.substr(start));
        break;
      }
      out.push_back(s.substr(start, pos - start));
      start = pos + 1;
    }
    return out;
  };

  const auto header = split_fields(line);
  if (header.size() < 2 || header.back() != "label")
    throw std::runtime_error("load_dataset_csv: header must be f0..f{p-1},label");
  RawDataset d;
  d.p = header.size() - 1;

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != d.p + 1)
      throw std::runtime_error("load_dataset_csv: line " + std::to_string(lineno) +
                               ": expected " + std::to_string(d.p + 1) + " fields");
    for (std::size_t j = 0; j < d.p; ++j) {
      std::size_t used = 0;
      const double v = std::stod(fields[j], &used);
      if (used != fields[j].size() || !std::isfinite(v))
        throw std::runtime_error("load_dataset_csv: line " + std::to_string(lineno) +
                                 ": bad float '" + fields[j] + "'");
      d.features.push_back(v);
    }
    std::size_t used = 0;
    const int y = std::stoi(fields.back(), &used);
    if (used != fields.back().size() || y < 0)
      throw std::runtime_error("load_dataset_csv: line " + std::to_string(lineno) +
                               ": bad label '" + fields.back() + "'");
    d.labels.push_back(y);
    ++d.n;
  }
  if (d.n == 0) throw std::runtime_error("load_dataset_csv: no data rows in " + path);
  return d;
}

// ---------------------------------------------------------------------------
// ErmLoss

ErmLoss::ErmLoss(ErmDataset data, const ErmOptions& opts) : data_(std::move(data)), opts_(opts) {
  classes_ = data_.n_classes;
  if (classes_ < 1) throw std::invalid_argument("ErmLoss: need at least one class");
  if (opts_.batch_size < 1) throw std::invalid_argument("ErmLoss: batch_size must be >= 1");
  if (opts_.eval_every < 1) throw std::invalid_argument("ErmLoss: eval_every must be >= 1");
  if (data_.retain_indices.empty()) throw std::invalid_argument("ErmLoss: empty retain set");
}

double ErmLoss::sample_loss_at(std::uint32_t row, std::span<const double> theta) const {
  const double* x = data_.features.data() + static_cast<std::size_t>(row) * data_.p;
  const int y = data_.labels[row];
  double maxlog = -1e300;
  double logits[64];
  std::vector<double> big;
  double* z = logits;
  if (static_cast<std::size_t>(classes_) > std::size(logits)) {
    big.resize(classes_);
    z = big.data();
  }
  for (int c = 0; c < classes_; ++c) {
    z[c] = K().dot(data_.p, theta.data() + static_cast<std::size_t>(c) * data_.p, x);
    maxlog = std::max(maxlog, z[c]);
  }
  double sum = 0.0;
  for (int c = 0; c < classes_; ++c) sum += std::exp(z[c] - maxlog);
  const double ce = std::log(sum) + maxlog - z[y];
  return ce + 0.5 * opts_.l2_weight * K().sumsq(theta.size(), theta.data());
}

void ErmLoss::sample_gradient_at(std::uint32_t row, std::span<const double> theta,
                                 std::span<double> out) const {
  K().scaled_copy(theta.size(), opts_.l2_weight, theta.data(), out.data());
  const double* x = data_.features.data() + static_cast<std::size_t>(row) * data_.p;
  const int y = data_.labels[row];
  double logits[64];
  std::vector<double> big;
  double* z = logits;
  if (static_cast<std::size_t>(classes_) > std::size(logits)) {
    big.resize(classes_);
    z = big.data();
  }
  double maxlog = -1e300;
  for (int c = 0; c < classes_; ++c) {
    z[c] = K().dot(data_.p, theta.data() + static_cast<std::size_t>(c) * data_.p, x);
    maxlog = std::max(maxlog, z[c]);
  }
  double sum = 0.0;
  for (int c = 0; c < classes_; ++c) {
    z[c] = std::exp(z[c] - maxlog);
    sum += z[c];
  }
  for (int c = 0; c < classes_; ++c) {
    const double coef = z[c] / sum - (c == y ? 1.0 : 0.0);
    K().axpy(data_.p, coef, x, out.data() + static_cast<std::size_t>(c) * data_.p);
  }
}

double ErmLoss::loss_over(std::span<const std::uint32_t> idx, std::span<const double> theta) const {
  check_dim(dim(), theta.size(), "ErmLoss::loss_over");
  // cross-entropy averaged over idx; the L2 term enters once (it is identical
  // in every per-sample loss)
  double acc = 0.0;
  const double reg = 0.5 * opts_.l2_weight * K().sumsq(theta.size(), theta.data());
  for (std::uint32_t row : idx) acc += sample_loss_at(row, theta) - reg;
  return acc / static_cast<double>(idx.size()) + reg;
}

void ErmLoss::gradient_over(std::span<const std::uint32_t> idx, std::span<const double> theta,
                            std::span<double> out) const {
  check_dim(dim(), theta.size(), "ErmLoss::gradient_over");
  check_dim(dim(), out.size(), "ErmLoss::gradient_over");
  std::vector<double> g(dim());
  std::fill(out.begin(), out.end(), 0.0);
  const double w = 1.0 / static_cast<double>(idx.size());
  for (std::uint32_t row : idx) {
    sample_gradient_at(row, theta, g);
    K().axpy(dim(), w, g.data(), out.data());
  }
}

std::uint64_t ErmLoss::sample_gradient(std::span<const double> theta, Rng& rng,
                                       std::span<double> out) const {
  check_dim(dim(), theta.size(), "ErmLoss::sample_gradient");
  check_dim(dim(), out.size(), "ErmLoss::sample_gradient");
  K().scaled_copy(theta.size(), opts_.l2_weight, theta.data(), out.data());
  const double w = 1.0 / static_cast<double>(opts_.batch_size);
  std::vector<double> z(classes_);
  for (std::size_t b = 0; b < opts_.batch_size; ++b) {
    const std::uint32_t row = data_.retain_indices[rng.next_below(data_.retain_indices.size())];
    const double* x = data_.features.data() + static_cast<std::size_t>(row) * data_.p;
    const int y = data_.labels[row];
    double maxlog = -1e300;
    for (int c = 0; c < classes_; ++c) {
      z[c] = K().dot(data_.p, theta.data() + static_cast<std::size_t>(c) * data_.p, x);
      maxlog = std::max(maxlog, z[c]);
    }
    double sum = 0.0;
    for (int c = 0; c < classes_; ++c) {
      z[c] = std::exp(z[c] - maxlog);
      sum += z[c];
    }
    for (int c = 0; c < classes_; ++c) {
      const double coef = w * (z[c] / sum - (c == y ? 1.0 : 0.0));
      K().axpy(data_.p, coef, x, out.data() + static_cast<std::size_t>(c) * data_.p);
    }
  }
  return opts_.batch_size;
}

double ErmLoss::retain_excess(std::span<const double> theta) const {
  const double v = loss_over(data_.retain_indices, theta) - retain_opt_value_;
  if (v < 0.0) {
    std::atomic_ref<std::uint64_t>(clamp_events_).fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return v;
}

std::uint64_t ErmLoss::clamp_events() const {
  return std::atomic_ref<std::uint64_t>(clamp_events_).load(std::memory_order_relaxed);
}

double ErmLoss::opt_distance() const {
  return std::sqrt(K().sqdist(dim(), full_opt_.data(), retain_opt_.data()));
}

double ErmLoss::measure_lipschitz(Rng& rng) const {
  const std::size_t d = static_cast<std::size_t>(classes_) * data_.p;
  // fixed unit-ball probe points, scaled to the current radius each sweep
  std::vector<double> probes(static_cast<std::size_t>(opts_.lipschitz_probes) * d);
  for (int j = 0; j < opts_.lipschitz_probes; ++j) {
    double* pt = probes.data() + static_cast<std::size_t>(j) * d;
    for (std::size_t i = 0; i < d; ++i) pt[i] = rng.next_gaussian();
    const double norm = std::sqrt(K().sumsq(d, pt));
    const double r = std::pow(rng.next_unit_open0(), 1.0 / static_cast<double>(d));
    if (norm > 0.0) K().scal(d, r / norm, pt);
  }

  std::vector<double> theta(d), grad(d);
  double radius = 1.0;
  double lipschitz = 0.0;
  for (int it = 0; it < 64; ++it) {
    double worst = 0.0;
    for (int j = 0; j < opts_.lipschitz_probes; ++j) {
      K().scaled_copy(d, radius, probes.data() + static_cast<std::size_t>(j) * d, theta.data());
      for (std::uint32_t row = 0; row < data_.n; ++row) {
        sample_gradient_at(row, theta, grad);
        worst = std::max(worst, K().sumsq(d, grad.data()));
      }
    }
    lipschitz = opts_.lipschitz_safety * std::sqrt(worst);
    const double next_radius = lipschitz / (2.0 * opts_.l2_weight);
    if (std::fabs(next_radius - radius) <= 1e-9 * std::max(1.0, radius)) break;
    radius = next_radius;
  }
  return lipschitz;
}

ParamVector ErmLoss::minimize(std::span<const std::uint32_t> idx) const {
  const std::size_t d = dim();
  // Fixed-step gradient descent at 1/beta. The softmax cross-entropy Hessian
  // factor is at most 1/2, so beta <= l2 + max ||x||^2 / 2 over the rows; a
  // burned-in line search would stall on f-rounding long before the gradient
  // tolerance is reached.
  double max_x2 = 0.0;
  for (std::uint32_t row : idx) {
    const double* x = data_.features.data() + static_cast<std::size_t>(row) * data_.p;
    max_x2 = std::max(max_x2, K().sumsq(data_.p, x));
  }
  const double step = 1.0 / (opts_.l2_weight + 0.5 * max_x2);
  ParamVector theta(d, 0.0), grad(d);
  for (std::uint64_t it = 0; it < opts_.opt_max_iters; ++it) {
    gradient_over(idx, theta, grad);
    if (std::sqrt(K().sumsq(d, grad.data())) <= opts_.opt_tol) return theta;
    K().axpy(d, -step, grad.data(), theta.data());
  }
  throw std::runtime_error("ErmLoss: optimum not reached within the iteration cap");
}

ErmLoss ErmLoss::build(ErmDataset data, const ErmOptions& opts, Rng& rng) {
  ErmLoss loss(std::move(data), opts);
  const double lipschitz = loss.measure_lipschitz(rng);
  loss.spec_ = make_problem(opts.l2_weight, lipschitz,
                            static_cast<std::size_t>(loss.classes_) * loss.data_.p);
  std::vector<std::uint32_t> all(loss.data_.n);
  std::iota(all.begin(), all.end(), 0u);
  loss.full_opt_ = loss.minimize(all);
  loss.retain_opt_ = loss.minimize(loss.data_.retain_indices);
  loss.retain_opt_value_ = loss.loss_over(loss.data_.retain_indices, loss.retain_opt_);
  return loss;
}

}  // namespace unlearn
