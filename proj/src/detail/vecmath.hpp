#pragma once

#include <cstddef>

namespace kakulab::detail {

// y[k] = log(x[k]).
void log_array(const double* x, double* y, std::size_t n);
// y[k] = exp(g * x[k]).
void exp_scaled_array(double g, const double* x, double* y, std::size_t n);

}  // namespace kakulab::detail
