#include "core/backend.hpp"

#include "core/errors.hpp"
#include "core/text.hpp"

#include <algorithm>

namespace biodiff {

BackendKind BackendKind::make_parallel(int worker_count)
{
    if (worker_count < 1)
        throw config_error("parallel backend needs at least 1 worker, got " +
                           format_int(worker_count));
    return {true, worker_count};
}

WorkerPool::WorkerPool(BackendKind kind) : kind_(kind)
{
    if (kind_.parallel && kind_.workers < 1)
        throw config_error("parallel backend needs at least 1 worker");
    if (kind_.parallel) {
        threads_.reserve(static_cast<std::size_t>(kind_.workers));
        for (int w = 0; w < kind_.workers; ++w)
            threads_.emplace_back([this] { worker_loop(); });
    }
}

WorkerPool::~WorkerPool()
{
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::parallel_for(std::int64_t n,
                              const std::function<void(std::int64_t, std::int64_t)>& body)
{
    if (n <= 0) return;
    if (threads_.empty()) {
        body(0, n);
        return;
    }

    auto job = std::make_shared<Job>();
    job->body = &body;
    job->n = n;
    job->chunks = static_cast<int>(std::min<std::int64_t>(n, static_cast<std::int64_t>(threads_.size())));
    job->remaining.store(job->chunks, std::memory_order_relaxed);

    {
        std::lock_guard lock(mutex_);
        job_ = job;
        ++generation_;
    }
    cv_.notify_all();

    // Wait for the last chunk to check out; workers holding their own
    // shared_ptr keep the job alive past this frame if they wake up late.
    int remaining = job->remaining.load(std::memory_order_acquire);
    while (remaining != 0) {
        job->remaining.wait(remaining, std::memory_order_acquire);
        remaining = job->remaining.load(std::memory_order_acquire);
    }

    {
        std::lock_guard lock(mutex_);
        job_.reset();
    }
}

void WorkerPool::worker_loop()
{
    std::uint64_t seen = 0;
    while (true) {
        std::shared_ptr<Job> job;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [&] { return stop_ || (job_ && generation_ != seen); });
            if (stop_) return;
            seen = generation_;
            job = job_;
        }

        while (true) {
            const int c = job->next.fetch_add(1, std::memory_order_relaxed);
            if (c >= job->chunks) break;
            const std::int64_t lo = job->n * c / job->chunks;
            const std::int64_t hi = job->n * (c + 1) / job->chunks;
            (*job->body)(lo, hi);
            if (job->remaining.fetch_sub(1, std::memory_order_acq_rel) == 1)
                job->remaining.notify_all();
        }
    }
}

} // namespace biodiff
