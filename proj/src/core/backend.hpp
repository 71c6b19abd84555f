#ifndef BIODIFF_CORE_BACKEND_HPP
#define BIODIFF_CORE_BACKEND_HPP

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace biodiff {

/// Execution strategy: the serial reference, or a fixed-size worker pool.
/// Both produce bitwise identical results for every kernel in this library;
/// parallelism only ever partitions independent index ranges.
struct BackendKind {
    bool parallel = false;
    int workers = 1;

    static BackendKind serial() { return {false, 1}; }
    /// Throws config_error when worker_count < 1.
    static BackendKind make_parallel(int worker_count);

    bool operator==(const BackendKind&) const = default;
};

/// Data-parallel dispatcher over [0, n) index ranges. The serial strategy
/// runs the body inline on the calling thread; the parallel strategy splits
/// the range into one contiguous chunk per worker. Chunk contents depend
/// only on (n, worker_count), never on scheduling, and each body invocation
/// touches a disjoint slice of state, so results are independent of both
/// worker count and claim order.
class WorkerPool {
public:
    explicit WorkerPool(BackendKind kind);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    BackendKind kind() const { return kind_; }

    /// Runs body(lo, hi) over a partition of [0, n). Must not be re-entered
    /// from inside a body.
    void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body);

private:
    struct Job {
        const std::function<void(std::int64_t, std::int64_t)>* body = nullptr;
        std::int64_t n = 0;
        int chunks = 0;
        std::atomic<int> next{0};
        std::atomic<int> remaining{0};
    };

    void worker_loop();

    BackendKind kind_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::shared_ptr<Job> job_;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

} // namespace biodiff

#endif
