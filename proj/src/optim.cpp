#include "unlearn/optim.hpp"

namespace unlearn {

ParamVector averaged_iterate(const IterState& state) {
  ParamVector out(state.memory.size());
  averaged_iterate_into(state, out);
  return out;
}

void averaged_iterate_into(const IterState& state, std::span<double> out) {
  if (out.size() != state.memory.size())
    throw std::invalid_argument("averaged_iterate_into: wrong output size");
  kernels::active().scaled_copy(out.size(), 1.0 / state.weight, state.memory.data(), out.data());
}

double tuned_constant_step(const ProblemSpec& spec, double r1, double kdp,
                           std::uint64_t horizon) {
  if (horizon == 0) throw std::invalid_argument("tuned_constant_step: horizon must be >= 1");
  if (r1 < 0.0) throw std::invalid_argument("tuned_constant_step: r1 must be >= 0");
  const double d = static_cast<double>(spec.dim);
  return std::sqrt((1.0 + d * kdp * kdp) * r1 * r1 /
                   (static_cast<double>(horizon) * spec.lipschitz * spec.lipschitz));
}

}  // namespace unlearn
