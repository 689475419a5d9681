#pragma once

#include <functional>

#include "parqdd/context.hpp"
#include "parqdd/idle.hpp"

namespace parqdd {

// Runs body() on the calling thread as the root fiber of a cooperative
// work-stealing pool with `workers` threads in total; the caller is worker 0
// and the extra threads are joined before returning. While the root fiber is
// blocked on child results, worker 0's dispatcher keeps executing and
// stealing fibers like any other worker.
void run_with_fiber_pool(unsigned workers, const std::function<void()>& body);

// Spawns recursion children as fibers on the surrounding pool. Child idx[0]
// runs inline; the rest are posted and may be stolen.
class FiberRunner : public ChildRunner {
public:
    FiberRunner(ExecContext& ctx, IdleRecorder& rec) : ctx_(ctx), rec_(rec) {}
    void run_children(FnRef f, const unsigned* idx, unsigned count) override;

private:
    ExecContext& ctx_;
    IdleRecorder& rec_;
};

} // namespace parqdd
