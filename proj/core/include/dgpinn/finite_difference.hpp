#pragma once

#include "dgpinn/tape.hpp"

#include <functional>

namespace dgpinn {

using ScalarFunction = std::function<double(const Vector&)>;

/// Central-difference gradient, one coordinate at a time:
/// (f(x + h e_i) - f(x - h e_i)) / (2h). Requires step > 0.
Vector fd_gradient(const ScalarFunction& f, const Vector& at, double step);

}  // namespace dgpinn
