#include "dcolor/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace dcolor {

namespace {

int automatic_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int from_environment() {
    const char* env = std::getenv("DCOLOR_THREADS");
    if (env == nullptr || *env == '\0') {
        return automatic_threads();
    }
    try {
        const int n = std::stoi(env);
        return n <= 0 ? automatic_threads() : n;
    } catch (const std::exception&) {
        return automatic_threads();
    }
}

std::atomic<int>& current() {
    static std::atomic<int> threads{from_environment()};
    return threads;
}

}  // namespace

int thread_count() { return current().load(std::memory_order_relaxed); }

void set_thread_count(int threads) {
    current().store(threads <= 0 ? automatic_threads() : threads, std::memory_order_relaxed);
}

}  // namespace dcolor
