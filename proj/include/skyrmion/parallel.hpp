#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

// Fixed-order reductions. The index range is split into chunks of a fixed
// size independent of the thread count; chunk partials are computed in
// parallel and summed sequentially in chunk order, so results are bitwise
// identical for any number of threads.

namespace skyrmion::parallel {

inline constexpr std::size_t kChunk = std::size_t{1} << 14;

void set_threads(int n);
int threads();

template <class T, class ChunkFn>
T chunked_sum(std::size_t n, ChunkFn&& fn) {
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<T> partial(n_chunks, T{});
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
        const std::size_t end = std::min(n, begin + kChunk);
        partial[static_cast<std::size_t>(c)] = fn(begin, end);
    }
    T total{};
    for (const T& p : partial) total += p;
    return total;
}

template <class Fn>
void for_chunks(std::size_t n, Fn&& fn) {
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
        fn(begin, std::min(n, begin + kChunk));
    }
}

}  // namespace skyrmion::parallel
