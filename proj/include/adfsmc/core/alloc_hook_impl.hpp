#pragma once

// Include from exactly one .cpp of an executable to count heap allocations.
// Interposes malloc and friends (glibc only), so operator new, Eigen's
// aligned allocator and the standard containers are all seen.

#include <adfsmc/core/alloc_hook.hpp>

#if defined(__GLIBC__)
#include <cerrno>
#include <cstddef>

extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
void __libc_free(void*);

void* malloc(std::size_t n) noexcept {
  ++adfsmc::instr::tl_heap_allocations;
  return __libc_malloc(n);
}
void* calloc(std::size_t n, std::size_t size) noexcept {
  ++adfsmc::instr::tl_heap_allocations;
  return __libc_calloc(n, size);
}
void* realloc(void* p, std::size_t n) noexcept {
  ++adfsmc::instr::tl_heap_allocations;
  return __libc_realloc(p, n);
}
void* memalign(std::size_t alignment, std::size_t n) noexcept {
  ++adfsmc::instr::tl_heap_allocations;
  return __libc_memalign(alignment, n);
}
void* aligned_alloc(std::size_t alignment, std::size_t n) noexcept {
  ++adfsmc::instr::tl_heap_allocations;
  return __libc_memalign(alignment, n);
}
int posix_memalign(void** out, std::size_t alignment, std::size_t n) noexcept {
  ++adfsmc::instr::tl_heap_allocations;
  void* p = __libc_memalign(alignment, n);
  if (p == nullptr) return ENOMEM;
  *out = p;
  return 0;
}
void free(void* p) noexcept { __libc_free(p); }
}

namespace adfsmc::instr::detail {
inline const bool kHookRegistered = (g_hook_installed = true);
}  // namespace adfsmc::instr::detail
#endif
