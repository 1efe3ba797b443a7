#pragma once

#include <cstddef>
#include <functional>

namespace nouk {

/// Worker count used by Monte Carlo loops; 1 unless set (the CLI sets it from
/// --threads or NOUK_THREADS). Results never depend on it.
int worker_threads();
void set_worker_threads(int threads);

/// Runs body(chunk) for chunk in [0, chunks) on up to worker_threads() threads.
/// Callers write into per-chunk slots and reduce in chunk order. Nested calls
/// from a worker run serially.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

}  // namespace nouk
