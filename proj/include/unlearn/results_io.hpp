#pragma once

#include <string>
#include <vector>

#include "unlearn/harness.hpp"

namespace unlearn {

// Provenance columns repeated on every row so any figure can be rebuilt from
// the CSV alone.
struct SweepMeta {
  std::string loss_mode;
  double mu = 0.0;
  double lipschitz = 0.0;
  std::size_t dim = 0;
  double rf = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t n_reps = 0;
};

// Schema (one row per cell):
// loss_mode,mu,L,d,rf,seed,n_reps,e,kdp,t_scratch_mean,t_unlearn_mean,ratio,
// censored_scratch,censored_unlearn
// Numbers carry 17 significant digits so parse(emit(cells)) is exact.
extern const char* const kResultsHeader;

std::string results_csv(const SweepMeta& meta, const std::vector<PhaseCell>& cells);

// temp file + rename
void write_results_csv_atomic(const std::string& path, const SweepMeta& meta,
                              const std::vector<PhaseCell>& cells);

struct ParsedResults {
  SweepMeta meta;  // taken from the first row
  std::vector<PhaseCell> cells;
};

// Throws std::runtime_error naming the missing column / offending line.
ParsedResults parse_results_csv(const std::string& path);
ParsedResults parse_results_csv_text(const std::string& text, const std::string& name = "<csv>");

}  // namespace unlearn
