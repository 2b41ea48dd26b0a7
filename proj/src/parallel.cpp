// SPDX-License-Identifier: Apache-2.0

#include "iclsel/parallel.hpp"

namespace iclsel {

namespace {
std::atomic<std::size_t> g_workers{0};
}

void set_worker_count(std::size_t n) { g_workers.store(n); }

std::size_t worker_count() {
    const std::size_t n = g_workers.load();
    if (n > 0) return n;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace iclsel
