#pragma once

// Trajectory observers: fixed-interval species totals (state is held between
// events, so samples see the pre-event state) and a raw event log.

#include <cstdint>
#include <vector>

#include "rdkmc/nsm.hpp"

namespace rdkmc {

class TimeSeriesObserver final : public Observer {
public:
    explicit TimeSeriesObserver(double interval) : interval_(interval) {}

    void advance_to(double t, const Engine& e) override {
        while (next_ <= t) {
            times.push_back(next_);
            auto& row = totals.emplace_back();
            row.reserve(static_cast<std::size_t>(e.state().species()));
            for (int s = 0; s < e.state().species(); ++s) row.push_back(e.state().total(s));
            next_ += interval_;
        }
    }

    std::vector<double> times;
    std::vector<std::vector<std::int64_t>> totals;

private:
    double interval_;
    double next_ = 0.0;
};

class EventLogObserver final : public Observer {
public:
    void on_event(const Engine&, const Event& ev) override { events.push_back(ev); }
    std::vector<Event> events;
};

} // namespace rdkmc
