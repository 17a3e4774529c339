#include "hf/common.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hf {

int max_threads() {
  int fallback = 1;
#ifdef _OPENMP
  fallback = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("HF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(v);
  }
  return fallback;
}

}  // namespace hf
