// Least-squares power-law fit d ~ c1 * x^exponent in log-log coordinates;
// shared by the Holder-modulus estimates of the deterministic and the
// stochastic flows.
#pragma once

#include <vector>

namespace heisflow {

struct PowerFit {
    double c1 = 0.0;
    double exponent = 0.0;
};

// Fits log y = log c1 + exponent * log x over the pairs with x, y > 0;
// returns a zero fit when fewer than two usable pairs remain.
PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace heisflow
