#include "unlearn/blob_data.hpp"

#include <stdexcept>

#include "unlearn/rng.hpp"

namespace unlearn {

BlobData gen_blobs(std::size_t n, std::size_t p, int classes, double spread, std::uint64_t seed) {
  if (n < 1 || p < 1 || classes < 1) throw std::invalid_argument("gen_blobs: n, p, classes >= 1");
  if (!(spread > 0.0)) throw std::invalid_argument("gen_blobs: spread must be > 0");

  Rng rng = Rng::stream(seed, {0xb10b});
  std::vector<double> centers(static_cast<std::size_t>(classes) * p);
  for (double& c : centers) c = 6.0 * spread * rng.next_gaussian();

  BlobData d;
  d.n = n;
  d.p = p;
  d.classes = classes;
  d.features.resize(n * p);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(classes));
    d.labels[i] = y;
    const double* c = centers.data() + static_cast<std::size_t>(y) * p;
    for (std::size_t j = 0; j < p; ++j)
      d.features[i * p + j] = c[j] + spread * rng.next_gaussian();
  }
  return d;
}

}  // namespace unlearn
