#pragma once

#include <cstdint>

// Heap-allocation counter read by the filters once per timestep.
//
// The counter only moves when some translation unit of the final executable
// includes <adfsmc/core/alloc_hook_impl.hpp>, which interposes the C
// allocator. Without it every read returns zero and hook_installed() is false.

namespace adfsmc::instr {

inline thread_local std::uint64_t tl_heap_allocations = 0;
inline bool g_hook_installed = false;

inline std::uint64_t heap_allocations() noexcept { return tl_heap_allocations; }
inline bool hook_installed() noexcept { return g_hook_installed; }

}  // namespace adfsmc::instr
