#pragma once

// Indexed binary min-heap over per-voxel next-event times.  Every voxel is
// always present exactly once; update() moves it in O(log K).

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "rdkmc/errors.hpp"

namespace rdkmc {

class IndexedEventQueue {
public:
    explicit IndexedEventQueue(std::size_t n)
        : time_(n, std::numeric_limits<double>::infinity()), heap_(n), pos_(n) {
        for (std::size_t i = 0; i < n; ++i) heap_[i] = static_cast<int>(i), pos_[i] = static_cast<int>(i);
    }

    std::size_t size() const { return heap_.size(); }

    double time_of(int key) const { return time_[static_cast<std::size_t>(key)]; }

    // earliest (key, time); time may be +inf when nothing is pending
    std::pair<int, double> top() const {
        const int k = heap_[0];
        return {k, time_[static_cast<std::size_t>(k)]};
    }

    void update(int key, double t) {
        const double old = time_[static_cast<std::size_t>(key)];
        time_[static_cast<std::size_t>(key)] = t;
        const int i = pos_[static_cast<std::size_t>(key)];
        if (t < old)
            sift_up(i);
        else
            sift_down(i);
    }

    // test hook: heap property and index bijection
    void validate() const {
        const std::size_t n = heap_.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (pos_[static_cast<std::size_t>(heap_[i])] != static_cast<int>(i))
                throw ConsistencyError("event queue: heap/pos bijection broken");
            const std::size_t l = 2 * i + 1, r = 2 * i + 2;
            if (l < n && key_time(l) < key_time(i))
                throw ConsistencyError("event queue: heap property broken (left)");
            if (r < n && key_time(r) < key_time(i))
                throw ConsistencyError("event queue: heap property broken (right)");
        }
    }

private:
    double key_time(std::size_t heap_idx) const {
        return time_[static_cast<std::size_t>(heap_[heap_idx])];
    }

    void place(std::size_t i, int key) {
        heap_[i] = key;
        pos_[static_cast<std::size_t>(key)] = static_cast<int>(i);
    }

    void sift_up(int i) {
        const int key = heap_[static_cast<std::size_t>(i)];
        const double t = time_[static_cast<std::size_t>(key)];
        while (i > 0) {
            const int parent = (i - 1) / 2;
            if (key_time(static_cast<std::size_t>(parent)) <= t) break;
            place(static_cast<std::size_t>(i), heap_[static_cast<std::size_t>(parent)]);
            i = parent;
        }
        place(static_cast<std::size_t>(i), key);
    }

    void sift_down(int i) {
        const std::size_t n = heap_.size();
        const int key = heap_[static_cast<std::size_t>(i)];
        const double t = time_[static_cast<std::size_t>(key)];
        while (true) {
            std::size_t child = 2 * static_cast<std::size_t>(i) + 1;
            if (child >= n) break;
            if (child + 1 < n && key_time(child + 1) < key_time(child)) ++child;
            if (key_time(child) >= t) break;
            place(static_cast<std::size_t>(i), heap_[child]);
            i = static_cast<int>(child);
        }
        place(static_cast<std::size_t>(i), key);
    }

    std::vector<double> time_;
    std::vector<int> heap_;
    std::vector<int> pos_;
};

} // namespace rdkmc
