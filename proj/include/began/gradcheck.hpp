#pragma once

#include <functional>

#include "began/tensor.hpp"

namespace began {

/// Compares the analytic gradient of a scalar-valued function against central
/// finite differences. Returns the max over coordinates of
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// The function is evaluated tape-less for the difference quotients, so f may
/// freely involve network parameters as long as it is deterministic in x.
double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                         double h = 1e-4);

}  // namespace began
