#pragma once

#include <stdexcept>

namespace pathrl {

// Shared across modules: vector/matrix arguments whose sizes do not agree.
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pathrl
