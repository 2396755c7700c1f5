#include "pintflow/system/all_at_once.hpp"

namespace pintflow {

AllAtOnceOperator::AllAtOnceOperator(const DiscreteOperators& ops, TimeGrid grid, double beta, bool periodic)
    : ops_(&ops), grid_(grid), beta_(beta), periodic_(periodic) {
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (grid.n_t < 3) throw ConfigError("n_t must be >= 3");
}

}  // namespace pintflow
