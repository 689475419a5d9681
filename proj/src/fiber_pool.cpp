#include "parqdd/fiber_pool.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <boost/fiber/algo/algorithm.hpp>
#include <boost/fiber/condition_variable.hpp>
#include <boost/fiber/context.hpp>
#include <boost/fiber/fiber.hpp>
#include <boost/fiber/fixedsize_stack.hpp>
#include <boost/fiber/future.hpp>
#include <boost/fiber/mutex.hpp>
#include <boost/fiber/operations.hpp>

namespace parqdd {

namespace {

constexpr std::size_t kFiberStack = 128 * 1024;

class StealAlgo;

struct PoolShared {
    explicit PoolShared(unsigned n) : algos(n), nworkers(n) {
        for (auto& a : algos) a.store(nullptr, std::memory_order_relaxed);
    }
    std::vector<std::atomic<StealAlgo*>> algos;
    unsigned nworkers;
    std::atomic<unsigned> registered{0};

    boost::fibers::mutex done_mx;
    boost::fibers::condition_variable done_cv;
    bool done = false;

    void wake_someone(unsigned except);
};

// Per-thread scheduler: pinned contexts (main fiber, dispatcher) stay local;
// worker fibers go through a lockable deque that other threads may steal
// from. Threads with nothing to run sleep on a condition variable and are
// kicked whenever another worker publishes a fiber.
class StealAlgo : public boost::fibers::algo::algorithm {
public:
    StealAlgo(std::shared_ptr<PoolShared> sh, unsigned id)
        : sh_(std::move(sh)), id_(id), rng_(id * 2654435761u + 1u) {
        sh_->algos[id_].store(this, std::memory_order_release);
        sh_->registered.fetch_add(1, std::memory_order_release);
    }
    ~StealAlgo() override {
        sh_->algos[id_].store(nullptr, std::memory_order_release);
    }

    void awakened(boost::fibers::context* ctx) noexcept override {
        if (ctx->is_context(boost::fibers::type::pinned_context)) {
            pinned_.push_back(ctx);
            return;
        }
        ctx->detach();
        {
            std::lock_guard<std::mutex> lk(mx_);
            rq_.push_back(ctx);
        }
        sh_->wake_someone(id_);
    }

    boost::fibers::context* pick_next() noexcept override {
        if (!pinned_.empty()) {
            boost::fibers::context* c = pinned_.front();
            pinned_.pop_front();
            return c;
        }
        boost::fibers::context* c = nullptr;
        {
            std::lock_guard<std::mutex> lk(mx_);
            if (!rq_.empty()) {
                c = rq_.back(); // own work LIFO for locality
                rq_.pop_back();
            }
        }
        if (!c && sh_->nworkers > 1) {
            unsigned start = rng_() % sh_->nworkers;
            for (unsigned k = 0; k < sh_->nworkers && !c; ++k) {
                unsigned v = (start + k) % sh_->nworkers;
                if (v == id_) continue;
                if (StealAlgo* victim = sh_->algos[v].load(std::memory_order_acquire))
                    c = victim->steal();
            }
        }
        if (c) boost::fibers::context::active()->attach(c);
        return c;
    }

    bool has_ready_fibers() const noexcept override {
        if (!pinned_.empty()) return true;
        std::lock_guard<std::mutex> lk(mx_);
        return !rq_.empty();
    }

    void suspend_until(std::chrono::steady_clock::time_point const& tp) noexcept override {
        std::unique_lock<std::mutex> lk(smx_);
        sleeping_ = true;
        if (tp == std::chrono::steady_clock::time_point::max())
            scv_.wait(lk, [this] { return sflag_; });
        else
            scv_.wait_until(lk, tp, [this] { return sflag_; });
        sleeping_ = false;
        sflag_ = false;
    }

    void notify() noexcept override {
        {
            std::lock_guard<std::mutex> lk(smx_);
            sflag_ = true;
        }
        scv_.notify_one();
    }

    boost::fibers::context* steal() noexcept {
        std::lock_guard<std::mutex> lk(mx_);
        if (rq_.empty()) return nullptr;
        boost::fibers::context* c = rq_.front(); // steal FIFO end
        rq_.pop_front();
        return c;
    }

    // Wake only if actually parked; returns whether a notify was sent.
    bool try_wake() {
        {
            std::lock_guard<std::mutex> lk(smx_);
            if (!sleeping_ || sflag_) return false;
            sflag_ = true;
        }
        scv_.notify_one();
        return true;
    }

private:
    std::shared_ptr<PoolShared> sh_;
    unsigned id_;
    std::deque<boost::fibers::context*> pinned_;
    mutable std::mutex mx_;
    std::deque<boost::fibers::context*> rq_;
    std::mutex smx_;
    std::condition_variable scv_;
    bool sleeping_ = false;
    bool sflag_ = false;
    std::minstd_rand rng_;
};

void PoolShared::wake_someone(unsigned except) {
    for (unsigned v = 0; v < nworkers; ++v) {
        if (v == except) continue;
        if (StealAlgo* a = algos[v].load(std::memory_order_acquire))
            if (a->try_wake()) return;
    }
}

} // namespace

void run_with_fiber_pool(unsigned workers, const std::function<void()>& body) {
    if (workers < 1) workers = 1;
    auto sh = std::make_shared<PoolShared>(workers);

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (unsigned id = 1; id < workers; ++id) {
        threads.emplace_back([sh, id] {
            tls_worker = id;
            boost::fibers::use_scheduling_algorithm<StealAlgo>(sh, id);
            std::unique_lock<boost::fibers::mutex> lk(sh->done_mx);
            sh->done_cv.wait(lk, [&] { return sh->done; });
            tls_worker = 0;
        });
    }
    tls_worker = 0;
    boost::fibers::use_scheduling_algorithm<StealAlgo>(sh, 0u);
    while (sh->registered.load(std::memory_order_acquire) < workers)
        std::this_thread::yield();

    body();

    {
        std::unique_lock<boost::fibers::mutex> lk(sh->done_mx);
        sh->done = true;
    }
    sh->done_cv.notify_all();
    for (auto& t : threads) t.join();
}

void FiberRunner::run_children(FnRef f, const unsigned* idx, unsigned count) {
    auto& stats = ctx_.worker_stats(tls_worker);
    stats.spawns += count - 1;

    boost::fibers::future<void> futs[3];
    unsigned nf = 0;
    for (unsigned j = 1; j < count; ++j) {
        unsigned i = idx[j];
        boost::fibers::packaged_task<void()> task([this, f, i] {
            double b = rec_.now();
            auto& st = ctx_.worker_stats(tls_worker);
            st.tasks_run++;
            try {
                f(i);
            } catch (RunCancelled&) {
                rec_.record(tls_worker, b, rec_.now());
                throw;
            } catch (...) {
                ctx_.record_failure(std::current_exception());
                rec_.record(tls_worker, b, rec_.now());
                throw RunCancelled{};
            }
            rec_.record(tls_worker, b, rec_.now());
        });
        futs[nf++] = task.get_future();
        boost::fibers::fiber(boost::fibers::launch::post, std::allocator_arg,
                             boost::fibers::fixedsize_stack(kFiberStack), std::move(task))
            .detach();
    }

    bool inline_failed = false;
    try {
        f(idx[0]);
    } catch (RunCancelled&) {
        inline_failed = true;
    } catch (...) {
        ctx_.record_failure(std::current_exception());
        inline_failed = true;
    }
    bool child_failed = false;
    for (unsigned j = 0; j < nf; ++j) {
        try {
            futs[j].get();
        } catch (...) {
            child_failed = true;
        }
    }
    if (inline_failed || child_failed) throw RunCancelled{};
}

} // namespace parqdd
