#include "heisflow/fit.hpp"

#include <cmath>

namespace heisflow {

PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    if (lx.size() < 2) return {};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    PowerFit f;
    f.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.c1 = std::exp((sy - f.exponent * sx) / n);
    return f;
}

}  // namespace heisflow
