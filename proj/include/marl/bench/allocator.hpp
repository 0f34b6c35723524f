#pragma once

namespace marl::bench {

// Keeps freed batch-sized blocks on the heap instead of returning them to the
// kernel, so per-update temporaries stop page-faulting. No-op off glibc.
// Returns false if the allocator rejected a setting.
bool tune_allocator();

}  // namespace marl::bench
