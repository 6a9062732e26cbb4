#include "reparam/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace reparam {

namespace {
std::atomic<int> g_thread_cap{0};  // 0 means "use the OpenMP default"
}

int thread_cap() { return g_thread_cap.load(std::memory_order_relaxed); }

void set_thread_cap(int n) { g_thread_cap.store(n < 0 ? 0 : n, std::memory_order_relaxed); }

void apply_thread_cap_from_env() {
    const char* v = std::getenv("REPARAM_THREADS");
    if (!v || !*v) return;
    try {
        set_thread_cap(std::stoi(v));
    } catch (...) {
        // ignore malformed values, keep the default
    }
}

}  // namespace reparam
