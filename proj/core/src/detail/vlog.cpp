#include "detail/vlog.hpp"

#include <cmath>

namespace kflow::detail {

#if defined(KFLOW_VECTOR_LOG)
__attribute__((target_clones("avx2", "default")))
#endif
void vector_log(const double* __restrict x, double* __restrict y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::log(x[i]);
}

}  // namespace kflow::detail
