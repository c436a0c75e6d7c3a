#pragma once

#include <cstddef>
#include <functional>

namespace toa {

/// Runs body(i) for i in [0, count) on a small worker pool. Each index is
/// handled by exactly one worker; callers write results into per-index slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace toa
