#pragma once

#include "edlab/experiments.hpp"

namespace edlab::detail {

/// Number of steps covering t_final; validate_ranges guarantees it is exact.
std::size_t step_count(const ExperimentConfig& c);

/// Throws ConfigError naming the key path of the first out-of-range value.
void validate_ranges(const ExperimentConfig& c);

} // namespace edlab::detail
