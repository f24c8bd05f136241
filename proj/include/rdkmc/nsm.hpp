#pragma once

// Next Subvolume Method: event-driven exact sampling of the lattice
// reaction-diffusion process.  Each voxel carries one clock (its total
// propensity and next event time) in an indexed min-heap; a step pops the
// earliest voxel, picks reaction vs. diffusion by propensity share inside
// it, applies the stoichiometry and refreshes only the affected voxels.
//
// Clock updates redraw a fresh exponential by default.  The classical
// rescaling tau' = t + (a_old/a_new)(tau - t) is available through
// EngineOptions::rescale_clocks; both are statistically exact for
// exponential clocks.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rdkmc/errors.hpp"
#include "rdkmc/event_queue.hpp"
#include "rdkmc/model.hpp"
#include "rdkmc/rng.hpp"

namespace rdkmc {

struct Event {
    double time = 0.0;
    long long voxel = -1;
    int channel = -1;        // >= 0: reaction channel; -1: diffusion jump
    int species = -1;        // diffusion only
    long long to_voxel = -1; // diffusion only

    bool is_diffusion() const { return channel < 0; }
};

struct EngineOptions {
    bool rescale_clocks = false;
};

class Engine {
public:
    Engine(const CompiledModel& model, SystemState initial, RngStream rng, EngineOptions opt = {})
        : model_(&model),
          state_(std::move(initial)),
          rng_(rng),
          opt_(opt),
          queue_(static_cast<std::size_t>(model.voxel_count())),
          reaction_total_(static_cast<std::size_t>(model.voxel_count()), 0.0),
          diffusion_total_(static_cast<std::size_t>(model.voxel_count()), 0.0) {
        if (state_.voxels() != model.voxel_count() || state_.species() != model.species_count())
            throw InvalidParams("Engine: state shape does not match the compiled model");
        const long long K = model.voxel_count();
        for (long long v = 0; v < K; ++v) {
            recompute(v);
            queue_.update(static_cast<int>(v), t_ + rng_.exponential(total(v)));
        }
    }

    double time() const { return t_; }
    const SystemState& state() const { return state_; }
    const CompiledModel& model() const { return *model_; }
    RngStream& rng() { return rng_; }

    double peek_next_time() const { return queue_.top().second; }

    // advance the clock without an event (used when a horizon cuts the run)
    void coast_to(double t) {
        if (t >= t_) t_ = t;
    }

    // executes the earliest event; nullopt once every clock is infinite
    std::optional<Event> step() {
        const auto [vi, tnext] = queue_.top();
        if (std::isinf(tnext)) return std::nullopt;
        const long long v = vi;
        t_ = tnext;

        Event ev;
        ev.time = t_;
        ev.voxel = v;

        const double a_r = reaction_total_[static_cast<std::size_t>(v)];
        const double a_d = diffusion_total_[static_cast<std::size_t>(v)];
        const double pick = rng_.u01() * (a_r + a_d);

        long long other = -1;
        if (pick < a_r) {
            ev.channel = select_channel(v, pick);
            const auto& ch = model_->channels[static_cast<std::size_t>(ev.channel)];
            for (const auto& [s, d] : ch.delta) state_.add(v, s, d);
        } else {
            select_jump(v, pick - a_r, ev);
            other = ev.to_voxel;
            state_.add(v, ev.species, -1);
            state_.add(other, ev.species, +1);
        }

        refresh(v, /*redraw=*/true);
        if (other >= 0 && other != v) refresh(other, /*redraw=*/!opt_.rescale_clocks);
        return ev;
    }

    // test hook: stored totals must equal a from-scratch recomputation
    void validate_totals() const {
        const long long K = model_->voxel_count();
        for (long long v = 0; v < K; ++v) {
            double r = 0.0;
            for (const auto& ch : model_->channels) r += reaction_propensity(ch, state_.voxel_counts(v));
            double d = 0.0;
            for (int s = 0; s < state_.species(); ++s)
                d += model_->jump_rate[static_cast<std::size_t>(s)] * model_->adj.open_dirs(v) *
                     static_cast<double>(state_.at(v, s));
            const double tol = 1e-9 * (1.0 + r + d);
            if (std::abs(r - reaction_total_[static_cast<std::size_t>(v)]) > tol ||
                std::abs(d - diffusion_total_[static_cast<std::size_t>(v)]) > tol)
                throw ConsistencyError("Engine: cached voxel propensity diverged from recomputation");
        }
        queue_.validate();
    }

private:
    double total(long long v) const {
        return reaction_total_[static_cast<std::size_t>(v)] + diffusion_total_[static_cast<std::size_t>(v)];
    }

    void recompute(long long v) {
        double r = 0.0;
        const auto counts = state_.voxel_counts(v);
        for (const auto& ch : model_->channels) r += reaction_propensity(ch, counts);
        double d = 0.0;
        const int dirs = model_->adj.open_dirs(v);
        for (int s = 0; s < state_.species(); ++s)
            d += model_->jump_rate[static_cast<std::size_t>(s)] * dirs * static_cast<double>(counts[static_cast<std::size_t>(s)]);
        reaction_total_[static_cast<std::size_t>(v)] = r;
        diffusion_total_[static_cast<std::size_t>(v)] = d;
    }

    void refresh(long long v, bool redraw) {
        const double a_old = total(v);
        const double t_old = queue_.time_of(static_cast<int>(v));
        recompute(v);
        const double a_new = total(v);
        double t_next;
        if (redraw || a_old <= 0.0 || std::isinf(t_old)) {
            t_next = t_ + rng_.exponential(a_new);
        } else if (a_new <= 0.0) {
            t_next = std::numeric_limits<double>::infinity();
        } else {
            t_next = t_ + (a_old / a_new) * (t_old - t_);
        }
        queue_.update(static_cast<int>(v), t_next);
    }

    int select_channel(long long v, double pick) {
        const auto counts = state_.voxel_counts(v);
        double acc = 0.0;
        int last_positive = -1;
        for (std::size_t c = 0; c < model_->channels.size(); ++c) {
            const double a = reaction_propensity(model_->channels[c], counts);
            if (a > 0.0) last_positive = static_cast<int>(c);
            acc += a;
            if (pick < acc) return static_cast<int>(c);
        }
        if (last_positive < 0)
            throw ConsistencyError("Engine: reaction selected in a voxel without reaction propensity");
        return last_positive; // guard against accumulated round-off
    }

    void select_jump(long long v, double pick, Event& ev) {
        const auto counts = state_.voxel_counts(v);
        const int dirs = model_->adj.open_dirs(v);
        double acc = 0.0;
        int species = -1;
        for (int s = 0; s < state_.species(); ++s) {
            const double a =
                model_->jump_rate[static_cast<std::size_t>(s)] * dirs * static_cast<double>(counts[static_cast<std::size_t>(s)]);
            if (a > 0.0) species = s;
            acc += a;
            if (pick < acc) {
                species = s;
                break;
            }
        }
        if (species < 0)
            throw ConsistencyError("Engine: diffusion selected in a voxel without diffusion propensity");
        ev.species = species;
        int k = static_cast<int>(rng_.u01() * dirs);
        if (k >= dirs) k = dirs - 1;
        const auto nbrs = model_->adj.neighbors(v);
        int seen = 0;
        for (std::int32_t w : nbrs) {
            if (w < 0) continue;
            if (seen == k) {
                ev.to_voxel = w;
                return;
            }
            ++seen;
        }
        throw ConsistencyError("Engine: open direction count disagrees with adjacency table");
    }

    const CompiledModel* model_;
    SystemState state_;
    RngStream rng_;
    EngineOptions opt_;
    IndexedEventQueue queue_;
    std::vector<double> reaction_total_;
    std::vector<double> diffusion_total_;
    double t_ = 0.0;
};

// Exactly one terminal condition; safety_cap (events) is optional on top.
struct StopCondition {
    enum class Kind { time_horizon, first_firing, event_cap };
    Kind kind = Kind::time_horizon;
    double T = 0.0;
    int channel = -1;
    std::uint64_t cap = 0;
    std::uint64_t safety_cap = 0; // 0 = unlimited

    static StopCondition horizon(double T, std::uint64_t safety = 0) {
        return {Kind::time_horizon, T, -1, 0, safety};
    }
    static StopCondition first_firing_of(int channel, std::uint64_t safety = 0) {
        return {Kind::first_firing, 0.0, channel, 0, safety};
    }
    static StopCondition event_count(std::uint64_t n) { return {Kind::event_cap, 0.0, -1, n, 0}; }
};

struct TrajectoryResult {
    double stop_time = 0.0;
    double first_firing_time = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t events = 0;
    bool censored = false;  // safety cap hit, or the target channel can no longer fire
    bool exhausted = false; // all clocks infinite
};

struct Observer {
    virtual ~Observer() = default;
    // state is about to advance to time t (no event in between)
    virtual void advance_to(double /*t*/, const Engine&) {}
    virtual void on_event(const Engine&, const Event&) {}
};

inline TrajectoryResult run(Engine& engine, const StopCondition& stop, std::span<Observer* const> observers = {}) {
    TrajectoryResult res;
    const std::uint64_t safety =
        stop.safety_cap == 0 ? std::numeric_limits<std::uint64_t>::max() : stop.safety_cap;
    while (true) {
        const double tn = engine.peek_next_time();
        if (std::isinf(tn)) res.exhausted = true;
        if (stop.kind == StopCondition::Kind::time_horizon && tn > stop.T) {
            for (auto* o : observers) o->advance_to(stop.T, engine);
            engine.coast_to(stop.T);
            res.stop_time = stop.T;
            break;
        }
        if (res.exhausted) {
            res.stop_time = engine.time();
            if (stop.kind == StopCondition::Kind::first_firing) res.censored = true;
            break;
        }
        for (auto* o : observers) o->advance_to(tn, engine);
        const auto ev = engine.step();
        if (!ev) break;
        ++res.events;
        for (auto* o : observers) o->on_event(engine, *ev);
        if (stop.kind == StopCondition::Kind::first_firing && ev->channel == stop.channel) {
            res.stop_time = ev->time;
            res.first_firing_time = ev->time;
            break;
        }
        if (stop.kind == StopCondition::Kind::event_cap && res.events >= stop.cap) {
            res.stop_time = engine.time();
            break;
        }
        if (res.events >= safety) {
            res.stop_time = engine.time();
            res.censored = true;
            break;
        }
    }
    return res;
}

} // namespace rdkmc
