#pragma once

#include <cstddef>

namespace kflow::detail {

/// y[i] = log(x[i]) for positive finite x. Vectorized where the toolchain allows.
void vector_log(const double* x, double* y, std::size_t n);

}  // namespace kflow::detail
