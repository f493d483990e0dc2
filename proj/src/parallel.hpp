#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace edlab::detail {

/// Runs body(begin, end, part) over `parts` contiguous chunks of [0, count), one thread each.
template <class Body>
void parallel_chunks(std::size_t count, unsigned parts, Body&& body) {
    parts = std::max(1u, std::min<unsigned>(parts, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (parts == 1) {
        body(std::size_t{0}, count, 0u);
        return;
    }
    const std::size_t chunk = (count + parts - 1) / parts;
    std::vector<std::jthread> workers;
    workers.reserve(parts);
    for (unsigned p = 0; p < parts; ++p) {
        const std::size_t begin = std::min(count, p * chunk);
        const std::size_t end = std::min(count, begin + chunk);
        workers.emplace_back([&body, begin, end, p] { body(begin, end, p); });
    }
}

} // namespace edlab::detail
