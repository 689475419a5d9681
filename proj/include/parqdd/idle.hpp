#pragma once

#include <algorithm>
#include <chrono>
#include <utility>
#include <vector>

namespace parqdd {

// Collects per-worker execution windows of scheduled task units. Idle time
// for a worker is the sum of gaps between its consecutive windows; slack
// before the first and after the last window does not count, and a worker
// that ran fewer than two units reports zero. Windows may nest (a unit that
// joins child units keeps its window open), so overlaps are merged first.
class IdleRecorder {
public:
    using clock = std::chrono::steady_clock;

    void start(unsigned workers) {
        lanes_.assign(workers, Lane{});
        for (auto& l : lanes_) l.iv.reserve(256);
        t0_ = clock::now();
    }

    double now() const {
        return std::chrono::duration<double>(clock::now() - t0_).count();
    }

    void record(unsigned worker, double begin_s, double end_s) {
        lanes_[worker].iv.emplace_back(begin_s, end_s);
    }

    unsigned workers() const { return unsigned(lanes_.size()); }
    std::size_t units(unsigned worker) const { return lanes_[worker].iv.size(); }

    std::vector<double> idle_seconds() const {
        std::vector<double> out(lanes_.size(), 0.0);
        for (std::size_t w = 0; w < lanes_.size(); ++w) {
            auto iv = lanes_[w].iv;
            if (iv.size() < 2) continue;
            std::sort(iv.begin(), iv.end());
            double idle = 0, cur_end = iv[0].second;
            for (std::size_t i = 1; i < iv.size(); ++i) {
                if (iv[i].first > cur_end) idle += iv[i].first - cur_end;
                cur_end = std::max(cur_end, iv[i].second);
            }
            out[w] = idle;
        }
        return out;
    }

private:
    struct alignas(64) Lane {
        std::vector<std::pair<double, double>> iv;
    };
    std::vector<Lane> lanes_;
    clock::time_point t0_;
};

} // namespace parqdd
