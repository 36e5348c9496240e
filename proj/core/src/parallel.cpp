#include "derham/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace derham {

namespace {

int read_env_threads()
{
    const char* env = std::getenv("DERHAM_THREADS");
    if (env == nullptr) {
        return 1;
    }
    try {
        const int n = std::stoi(env);
        return n > 0 ? n : 1;
    } catch (const std::exception&) {
        return 1;
    }
}

std::atomic<int>& thread_setting()
{
    static std::atomic<int> value{read_env_threads()};
    return value;
}

}  // namespace

int thread_count()
{
    return thread_setting().load(std::memory_order_relaxed);
}

void set_thread_count(int n)
{
    thread_setting().store(n > 0 ? n : 1, std::memory_order_relaxed);
}

}  // namespace derham
