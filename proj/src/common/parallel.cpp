#include "common/parallel.hpp"

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace lvc {

namespace {

int resolve_thread_count() {
    if (const char* env = std::getenv("LVC_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Persistent pool: workers wait on a generation counter, the caller runs
// chunk 0 itself. One job at a time; parallel_for does not nest.
class Pool {
public:
    explicit Pool(int workers) : chunks_(workers + 1) {
        for (int i = 1; i <= workers; ++i) {
            threads_.emplace_back([this, i] { worker(i); });
        }
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lk(m_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    void run(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
        job_ = &fn;
        job_n_ = n;
        pending_ = static_cast<int>(threads_.size());
        {
            std::lock_guard<std::mutex> lk(m_);
            ++generation_;
        }
        cv_.notify_all();
        run_chunk(0);
        std::unique_lock<std::mutex> lk(m_);
        done_cv_.wait(lk, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

    int chunks() const { return chunks_; }

private:
    void run_chunk(int idx) {
        int64_t per = (job_n_ + chunks_ - 1) / chunks_;
        int64_t begin = per * idx;
        int64_t end = std::min<int64_t>(begin + per, job_n_);
        if (begin < end) (*job_)(begin, end);
    }

    void worker(int idx) {
        uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lk(m_);
                cv_.wait(lk, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
            }
            run_chunk(idx);
            {
                std::lock_guard<std::mutex> lk(m_);
                if (--pending_ == 0) done_cv_.notify_one();
            }
        }
    }

    std::vector<std::thread> threads_;
    int chunks_;
    std::mutex m_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    uint64_t generation_ = 0;
    bool stop_ = false;
    const std::function<void(int64_t, int64_t)>* job_ = nullptr;
    int64_t job_n_ = 0;
    int pending_ = 0;
};

Pool& pool() {
    static Pool p(resolve_thread_count() - 1);
    return p;
}

}  // namespace

int thread_count() {
    static int n = resolve_thread_count();
    return n;
}

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    // Small loops are not worth the dispatch round trip.
    if (thread_count() == 1 || n < 4) {
        fn(0, n);
        return;
    }
    pool().run(n, fn);
}

}  // namespace lvc
