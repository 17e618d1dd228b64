#ifndef TSRAG_THREADING_HPP
#define TSRAG_THREADING_HPP

#include <cstddef>
#include <functional>

namespace tsrag {

// Thread cap: TSRAG_THREADS env var when set (>=1), else hardware concurrency.
std::size_t max_threads();

// Index-parallel loop with deterministic output: fn(i) must write only to
// slot i of preallocated storage. Runs inline when n is small or the cap is 1.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace tsrag

#endif
