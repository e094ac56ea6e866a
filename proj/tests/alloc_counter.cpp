// Installs the allocation counter for the unit-test binary.
#include <adfsmc/core/alloc_hook_impl.hpp>
