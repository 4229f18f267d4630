#include "unlearn/harness.hpp"

namespace unlearn {

void aggregate_cells(SweepResult& res) {
  const std::size_t H = res.horizons.size();
  const std::size_t K = res.kdp_grid.size();
  const std::size_t R = res.n_reps;
  const std::size_t E = res.thresholds.size();
  res.cells.clear();
  res.cells.reserve(E * K);

  // thresholds are stored descending; cells go out with e ascending
  for (std::size_t ti = E; ti-- > 0;) {
    double scratch_sum = 0.0;
    std::uint64_t scratch_censored = 0;
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t rep = 0; rep < R; ++rep) {
        const RunRecord& rec = res.scratch_at(h, rep);
        const std::uint64_t v = rec.first_passage[ti];
        if (v == RunRecord::kNever) {
          ++scratch_censored;
          scratch_sum += static_cast<double>(rec.budget_accesses);
        } else {
          scratch_sum += static_cast<double>(v);
        }
      }
    }
    const double mean_scratch = scratch_sum / static_cast<double>(H * R);

    for (std::size_t k = 0; k < K; ++k) {
      PhaseCell cell;
      cell.e = res.thresholds[ti];
      cell.kdp = res.kdp_grid[k];
      cell.mean_t_scratch = mean_scratch;
      cell.n_censored_scratch = scratch_censored;

      double unlearn_sum = 0.0;
      for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t rep = 0; rep < R; ++rep) {
          const RunRecord& rec = res.unlearn_at(h, k, rep);
          const std::uint64_t v = rec.first_passage[ti];
          if (v == RunRecord::kNever) {
            ++cell.n_censored_unlearn;
            unlearn_sum += static_cast<double>(rec.budget_accesses);
          } else {
            unlearn_sum += static_cast<double>(v);
          }
        }
      }
      cell.mean_t_unlearn = unlearn_sum / static_cast<double>(H * R);

      if (cell.mean_t_unlearn == 0.0) {
        cell.ratio = 0.0;
      } else if (cell.mean_t_scratch > 0.0) {
        cell.ratio = cell.mean_t_unlearn / cell.mean_t_scratch;
      } else {
        cell.ratio = std::numeric_limits<double>::infinity();
      }
      res.cells.push_back(cell);
    }
  }
}

}  // namespace unlearn
