#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "pintflow/errors.hpp"

namespace pintflow {

enum class Schedule {
    dynamic,      // workers grab the next unclaimed block
    contiguous,   // fixed contiguous ranges; lower workers get the smaller ranges
};

/// Persistent pool of `workers` threads, the calling thread being worker 0.
/// run() executes fn(i) for i in [0, n) exactly once each and returns when all
/// are done. Each index writes only its own output, so results never depend
/// on the worker count or on scheduling.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers, Schedule schedule = Schedule::dynamic);
    ~WorkerPool();
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t workers() const noexcept { return workers_; }
    Schedule schedule() const noexcept { return schedule_; }
    void set_schedule(Schedule s) { schedule_ = s; }

    /// Throws BlockFailure for the lowest failing index after all indices ran.
    void run(std::size_t n, const std::function<void(std::size_t)>& fn);

    /// Block range [first, last) of worker w under the contiguous schedule.
    static std::pair<std::size_t, std::size_t> contiguous_range(std::size_t n, std::size_t workers, std::size_t w);

private:
    void worker_loop(std::size_t id);
    void work(std::size_t id);

    std::size_t workers_;
    Schedule schedule_;
    std::vector<std::thread> threads_;

    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stop_ = false;

    // current job
    const std::function<void(std::size_t)>* fn_ = nullptr;
    std::size_t n_ = 0;
    std::size_t next_ = 0;
    std::vector<std::exception_ptr> errors_;
};

/// Number of workers from PINTFLOW_WORKERS if set, else `fallback`. A value
/// that is not a positive integer raises ConfigError.
std::size_t workers_from_environment(std::size_t fallback);

/// Runs fn over [0, n) on the pool (serially when pool is null) and returns
/// the results in index order.
template <class R>
std::vector<R> block_parallel_map(WorkerPool* pool, std::size_t n, const std::function<R(std::size_t)>& fn) {
    std::vector<R> out(n);
    const std::function<void(std::size_t)> body = [&](std::size_t i) { out[i] = fn(i); };
    if (pool) {
        pool->run(n, body);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (const BlockFailure&) {
                throw;
            } catch (const std::exception& e) {
                throw BlockFailure(i, e.what());
            }
        }
    }
    return out;
}

/// Same contract without results.
void block_parallel_for(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pintflow
