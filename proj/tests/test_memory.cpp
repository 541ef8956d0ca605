// Peak heap growth during train() on growing instances, normalized by
// |K| + n*r + r^2. Eigen allocates through malloc, so the malloc family is
// interposed (glibc only) rather than operator new.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "matrust/solver.hpp"
#include "matrust/synthetic.hpp"

#if defined(__GLIBC__)
#include <malloc.h>

extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
void __libc_free(void*);
}

namespace {
std::atomic<long long> live{0};
std::atomic<long long> peak{0};

void grow(void* p) {
  if (!p) return;
  const long long now = live += static_cast<long long>(malloc_usable_size(p));
  long long seen = peak.load();
  while (now > seen && !peak.compare_exchange_weak(seen, now)) {
  }
}
void shrink(void* p) {
  if (p) live -= static_cast<long long>(malloc_usable_size(p));
}
}  // namespace

extern "C" {
void* malloc(std::size_t size) {
  void* p = __libc_malloc(size);
  grow(p);
  return p;
}
void* calloc(std::size_t count, std::size_t size) {
  void* p = __libc_calloc(count, size);
  grow(p);
  return p;
}
void* realloc(void* old, std::size_t size) {
  shrink(old);
  void* p = __libc_realloc(old, size);
  grow(p ? p : (size == 0 ? nullptr : old));
  return p;
}
void free(void* p) {
  shrink(p);
  __libc_free(p);
}
void* memalign(std::size_t align, std::size_t size) {
  void* p = __libc_memalign(align, size);
  grow(p);
  return p;
}
void* aligned_alloc(std::size_t align, std::size_t size) { return memalign(align, size); }
int posix_memalign(void** out, std::size_t align, std::size_t size) {
  void* p = memalign(align, size);
  if (!p) return 12;  // ENOMEM
  *out = p;
  return 0;
}
}

int main() {
  using namespace matrust;
  HyperParams hp;
  hp.r = 10;
  hp.m1 = 3;
  hp.m2 = 5;
  std::vector<double> ratios;
  for (std::size_t n : {1000, 2000, 4000, 8000, 16000}) {
    SyntheticSpec spec;
    spec.n = n;
    spec.num_observations = 10 * n;
    spec.seed = n;
    const auto data = generate_synthetic(spec);

    const long long base = live.load();
    peak.store(base);
    {
      const auto result = train(data.observed, hp);
      (void)result;
    }
    const double extra = static_cast<double>(peak.load() - base);
    const double scale = static_cast<double>(spec.num_observations + n * hp.r + hp.r * hp.r);
    ratios.push_back(extra / scale);
    std::printf("n=%zu |K|=%zu peak_extra=%.0f bytes ratio=%.2f bytes/unit\n", n,
                spec.num_observations, extra, ratios.back());
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  // Linear space: the per-unit footprint must not grow with the instance.
  const bool ok = *hi <= 1.25 * *lo;
  std::printf("%s ratio spread %.3f (limit 1.25)\n", ok ? "PASS" : "FAIL", *hi / *lo);
  return ok ? 0 : 1;
}

#else
int main() {
  std::puts("SKIP allocation accounting needs glibc");
  return 77;
}
#endif
