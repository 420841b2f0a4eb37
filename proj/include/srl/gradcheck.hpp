#pragma once

#include "srl/tape.hpp"

#include <functional>
#include <vector>

namespace srl::num {

/// Max relative error between analytic gradients and central finite
/// differences, |analytic - fd| / (|analytic| + 1e-8), over every component
/// of every listed parameter. The builder must reconstruct the same scalar
/// loss from the current parameter values on a fresh tape each call.
double finite_diff_check(const std::function<Val(Tape&)>& build,
                         const std::vector<Tensor*>& params, double eps);

}  // namespace srl::num
