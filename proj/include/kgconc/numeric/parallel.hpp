#pragma once

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

#include <cstddef>
#include <memory>

namespace kgconc {

/// Runs body(i) for i in [0, n). Each index must write only its own output slot, which
/// keeps results independent of scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body)
{
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
    });
}

/// Caps the worker pool for the lifetime of the returned handle (0 = library default).
inline std::unique_ptr<tbb::global_control> limit_threads(std::size_t n)
{
    if (n == 0) return nullptr;
    return std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, n);
}

}  // namespace kgconc
