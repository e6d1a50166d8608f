#pragma once

#include <cstdint>

#include "specsense/array.hpp"

namespace specsense {

enum class Verdict : std::uint8_t { available = 0, busy = 1, none = 2 };

/// K x M per-block verdicts. `none` marks blocks a scheme has no
/// information about.
using DecisionMap = Array2D<Verdict>;

/// K x M flags: SAP k measures channel m itself.
using SensingMask = Array2D<std::uint8_t>;

}  // namespace specsense
