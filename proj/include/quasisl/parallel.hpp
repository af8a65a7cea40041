#ifndef QUASISL_PARALLEL_HPP
#define QUASISL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace quasisl {

// Worker-pool size used by parallel_for. Defaults to the machine
// parallelism; the CLI exposes it as --threads.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [0, n). Work items must be independent; callers are
// responsible for writing results into index-addressed slots so the merge
// order stays deterministic. The first exception thrown by a worker is
// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace quasisl

#endif
