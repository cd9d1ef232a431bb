#pragma once

#include <cstdint>
#include <functional>
#include <optional>

namespace tq {

/// Worker count: the explicit request, else TQ_THREADS, else hardware cores.
int resolve_threads(std::optional<int> requested);

/// Runs body(begin, end) over contiguous chunks of [0, n) on `threads`
/// workers. Chunk boundaries depend only on n and threads; callers must not
/// let results depend on the split. The first exception is rethrown.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t, std::int64_t)>& body);

/// Independent 64-bit stream seed for replication `index` (splitmix64).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

} // namespace tq
