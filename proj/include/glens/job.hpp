#pragma once

#include <atomic>
#include <functional>

namespace glens {

// Cooperative cancellation and progress reporting for long-running analyses.
struct JobControl {
    const std::atomic<bool>* cancel = nullptr;
    std::function<void(double)> progress;  // fraction in [0,1]

    bool cancelled() const { return cancel && cancel->load(std::memory_order_relaxed); }
    void report(double fraction) const {
        if (progress) progress(fraction);
    }
};

}  // namespace glens
