#include "pintflow/driver/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pintflow {

WorkerPool::WorkerPool(std::size_t workers, Schedule schedule) : workers_(workers), schedule_(schedule) {
    if (workers == 0) throw ConfigError("worker count must be >= 1");
    for (std::size_t id = 1; id < workers; ++id) threads_.emplace_back([this, id] { worker_loop(id); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

std::pair<std::size_t, std::size_t> WorkerPool::contiguous_range(std::size_t n, std::size_t workers, std::size_t w) {
    const std::size_t base = n / workers;
    const std::size_t extra = n % workers;  // the last `extra` workers get one more
    const std::size_t small = workers - extra;
    std::size_t first = 0;
    if (w < small) {
        first = w * base;
        return {first, first + base};
    }
    first = small * base + (w - small) * (base + 1);
    return {first, first + base + 1};
}

void WorkerPool::work(std::size_t id) {
    auto call = [&](std::size_t i) {
        try {
            (*fn_)(i);
        } catch (...) {
            errors_[i] = std::current_exception();
        }
    };
    if (schedule_ == Schedule::contiguous) {
        const auto [first, last] = contiguous_range(n_, workers_, id);
        for (std::size_t i = first; i < last; ++i) call(i);
        return;
    }
    for (;;) {
        std::size_t i;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (next_ >= n_) return;
            i = next_++;
        }
        call(i);
    }
}

void WorkerPool::worker_loop(std::size_t id) {
    std::size_t seen = 0;
    for (;;) {
        {
            std::unique_lock<std::mutex> lock(mutex_);
            start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
        }
        work(id);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (--pending_ == 0) done_cv_.notify_all();
        }
    }
}

void WorkerPool::run(std::size_t n, const std::function<void(std::size_t)>& fn) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        fn_ = &fn;
        n_ = n;
        next_ = 0;
        errors_.assign(n, nullptr);
        pending_ = threads_.size();
        ++generation_;
    }
    start_cv_.notify_all();
    work(0);
    {
        std::unique_lock<std::mutex> lock(mutex_);
        done_cv_.wait(lock, [&] { return pending_ == 0; });
        fn_ = nullptr;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors_[i]) continue;
        try {
            std::rethrow_exception(errors_[i]);
        } catch (const BlockFailure&) {
            throw;
        } catch (const std::exception& e) {
            throw BlockFailure(i, e.what());
        } catch (...) {
            throw BlockFailure(i, "unknown exception");
        }
    }
}

std::size_t workers_from_environment(std::size_t fallback) {
    const char* s = std::getenv("PINTFLOW_WORKERS");
    if (!s || !*s) return fallback;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(std::string("PINTFLOW_WORKERS must be a positive integer, got '") + s + "'");
    return static_cast<std::size_t>(v);
}

void block_parallel_for(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (pool) {
        pool->run(n, fn);
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (const BlockFailure&) {
            throw;
        } catch (const std::exception& e) {
            throw BlockFailure(i, e.what());
        }
    }
}

}  // namespace pintflow
