#include "dgpinn/runtime.hpp"

#if __has_include(<malloc.h>)
#include <malloc.h>
#endif

namespace dgpinn {

void tune_allocator() {
#if defined(M_MMAP_THRESHOLD) && defined(M_TRIM_THRESHOLD)
  constexpr int kThreshold = 1 << 30;
  mallopt(M_MMAP_THRESHOLD, kThreshold);
  mallopt(M_TRIM_THRESHOLD, kThreshold);
#endif
}

}  // namespace dgpinn
