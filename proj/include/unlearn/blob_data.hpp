#pragma once

#include <cstdint>
#include <vector>

namespace unlearn {

struct BlobData {
  std::size_t n = 0, p = 0;
  int classes = 0;
  std::vector<double> features;  // n * p row-major
  std::vector<int> labels;       // i mod classes
};

// Gaussian-blob classification data: per-class centers drawn once from
// N(0, (6 spread)^2 I), points = center + spread * N(0, I), labels assigned
// round-robin. Deterministic given the seed.
BlobData gen_blobs(std::size_t n, std::size_t p, int classes, double spread, std::uint64_t seed);

}  // namespace unlearn
