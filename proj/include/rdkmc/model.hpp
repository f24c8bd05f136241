#pragma once

// Reaction-diffusion model definition and its compiled form.  compile_model
// resolves every channel into a per-voxel propensity constant:
//
//   multiscale      bimolecular  -> rho(h) from the pair's intrinsic k_r
//   collins_kimball bimolecular  -> k_CK / h^3 (3D only)
//   explicit_meso                -> the given constant as-is
//   linked dissociation          -> kd_meso(h) when the link is multiscale,
//                                   the intrinsic k_d otherwise
//
// Pairwise sigma and D default to the sum of the reactants' radii and
// diffusion coefficients; channels may override both.  Propensities follow
// mass action per voxel: c x_A x_B (hetero), c x_A (x_A - 1)/2 (homo pairs,
// i.e. each unordered pair reacts at rate c), c x_A (unimolecular), c
// (source).  Products of a dissociation occupy the dissociation voxel.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rdkmc/errors.hpp"
#include "rdkmc/lattice.hpp"
#include "rdkmc/rates.hpp"

namespace rdkmc {

struct SpeciesSpec {
    std::string name;
    double gamma = 0.0;  // diffusion coefficient, m^2/s
    double radius = 0.0; // molecular radius, m
};

enum class RateMode { multiscale, collins_kimball, explicit_meso };

inline const char* to_string(RateMode m) {
    switch (m) {
        case RateMode::multiscale: return "multiscale";
        case RateMode::collins_kimball: return "collins_kimball";
        default: return "explicit";
    }
}

struct ReactionChannel {
    std::string name;
    std::vector<int> reactants; // species ids, at most 2
    std::vector<int> products;
    RateMode mode = RateMode::explicit_meso;
    double k_r = 0.0;     // intrinsic association rate (multiscale/collins_kimball)
    double k_d = 0.0;     // intrinsic dissociation rate (linked unimolecular)
    double k_meso = 0.0;  // explicit constant
    int assoc_link = -1;  // channel index of the paired association
    std::optional<double> sigma_override;
    std::optional<double> D_override;
};

struct Model {
    LatticeSpec lattice;
    std::vector<SpeciesSpec> species;
    std::vector<ReactionChannel> channels;

    int species_id(const std::string& name) const {
        for (std::size_t i = 0; i < species.size(); ++i)
            if (species[i].name == name) return static_cast<int>(i);
        throw ConfigError("unknown species '" + name + "'");
    }
};

// gamma / h^2, the per-neighbor jump rate of one molecule
inline double diffusion_propensity(const SpeciesSpec& s, const LatticeSpec& lattice) {
    lattice.validate();
    const double h = lattice.h();
    return s.gamma / (h * h);
}

enum class ChannelKind { source, unimolecular, bi_hetero, bi_homo };

struct CompiledChannel {
    std::string name;
    ChannelKind kind = ChannelKind::unimolecular;
    double constant = 0.0; // per-voxel propensity constant, 1/s
    int s_a = -1, s_b = -1;
    std::vector<std::pair<int, int>> delta; // (species, net change), zero entries dropped

    // diagnostics for reports; populated for bimolecular channels
    bool bimolecular = false;
    RateMode mode = RateMode::explicit_meso;
    double pair_sigma = 0.0, pair_D = 0.0, k_r = 0.0;
    double h_star_kr = 0.0, h_star_inf = 0.0, k_ck = 0.0, mesh_bound = 0.0;
    double kd_meso_value = 0.0; // derived dissociation constant of a linked reverse, if any
    int assoc_link = -1;
    unsigned flags = 0;
};

struct CompileOptions {
    double eps = 0.05; // tolerance used for the h > F(eps) advisory
};

struct CompiledModel {
    LatticeSpec lattice;
    Adjacency adj;
    std::vector<SpeciesSpec> species;
    std::vector<CompiledChannel> channels;
    std::vector<double> jump_rate; // per species, gamma/h^2
    std::vector<std::string> warnings;
    double eps = 0.05;

    long long voxel_count() const { return lattice.voxel_count(); }
    int species_count() const { return static_cast<int>(species.size()); }
};

namespace detail {

inline PhysicalParams pair_params(const Model& m, const ReactionChannel& ch) {
    const auto& a = m.species[static_cast<std::size_t>(ch.reactants[0])];
    const auto& b = m.species[static_cast<std::size_t>(ch.reactants[1])];
    PhysicalParams p;
    p.dim = m.lattice.dim;
    p.k_r = ch.k_r;
    p.k_d = ch.k_d;
    p.D = ch.D_override ? *ch.D_override : a.gamma + b.gamma;
    p.sigma = ch.sigma_override ? *ch.sigma_override : a.radius + b.radius;
    return p;
}

inline std::vector<std::pair<int, int>> net_delta(const ReactionChannel& ch) {
    std::vector<std::pair<int, int>> d;
    auto add = [&d](int s, int v) {
        for (auto& e : d)
            if (e.first == s) {
                e.second += v;
                return;
            }
        d.emplace_back(s, v);
    };
    for (int s : ch.reactants) add(s, -1);
    for (int s : ch.products) add(s, +1);
    std::erase_if(d, [](const auto& e) { return e.second == 0; });
    std::sort(d.begin(), d.end());
    return d;
}

} // namespace detail

inline CompiledModel compile_model(const Model& m, CompileOptions opt = {}) {
    m.lattice.validate();
    for (std::size_t i = 0; i < m.species.size(); ++i) {
        if (m.species[i].gamma < 0.0 || m.species[i].radius < 0.0)
            throw CompileError("species '" + m.species[i].name + "': gamma and radius must be >= 0");
        for (std::size_t j = i + 1; j < m.species.size(); ++j)
            if (m.species[i].name == m.species[j].name)
                throw CompileError("duplicate species name '" + m.species[i].name + "'");
    }

    CompiledModel cm;
    cm.lattice = m.lattice;
    cm.adj = Adjacency(m.lattice);
    cm.species = m.species;
    cm.eps = opt.eps;
    const double h = m.lattice.h();

    cm.jump_rate.reserve(m.species.size());
    for (const auto& s : m.species) cm.jump_rate.push_back(diffusion_propensity(s, m.lattice));

    auto warn = [&cm](const std::string& w) { cm.warnings.push_back(w); };

    for (std::size_t ci = 0; ci < m.channels.size(); ++ci) {
        const auto& ch = m.channels[ci];
        if (ch.reactants.size() > 2)
            throw CompileError("channel '" + ch.name + "': at most two reactants");
        for (int s : ch.reactants)
            if (s < 0 || s >= static_cast<int>(m.species.size()))
                throw CompileError("channel '" + ch.name + "': bad reactant id");
        for (int s : ch.products)
            if (s < 0 || s >= static_cast<int>(m.species.size()))
                throw CompileError("channel '" + ch.name + "': bad product id");

        CompiledChannel out;
        out.name = ch.name;
        out.mode = ch.mode;
        out.assoc_link = ch.assoc_link;
        out.delta = detail::net_delta(ch);

        if (ch.reactants.empty()) {
            out.kind = ChannelKind::source;
            if (ch.mode != RateMode::explicit_meso)
                throw CompileError("channel '" + ch.name + "': source channels need an explicit constant");
            out.constant = ch.k_meso;
        } else if (ch.reactants.size() == 1) {
            out.kind = ChannelKind::unimolecular;
            out.s_a = ch.reactants[0];
            if (ch.assoc_link >= 0) {
                if (ch.assoc_link >= static_cast<int>(m.channels.size()) ||
                    m.channels[static_cast<std::size_t>(ch.assoc_link)].reactants.size() != 2)
                    throw CompileError("channel '" + ch.name + "': dissociation link must name a bimolecular channel");
                const auto& assoc = m.channels[static_cast<std::size_t>(ch.assoc_link)];
                if (ch.mode == RateMode::multiscale) {
                    if (assoc.mode != RateMode::multiscale)
                        throw CompileError("channel '" + ch.name +
                                           "': multiscale dissociation requires a multiscale association link");
                    PhysicalParams p = detail::pair_params(m, assoc);
                    p.k_d = ch.k_d;
                    try {
                        const RateResult r = kd_meso(h, p);
                        out.constant = r.value;
                        out.flags = r.flags;
                        out.kd_meso_value = r.value;
                    } catch (const NoValidRate& e) {
                        std::ostringstream os;
                        os << "channel '" << ch.name << "': no valid dissociation rate at h = " << e.h
                           << " (h*_kr = " << e.h_star_kr << ", h*_inf = " << e.h_star_inf << ")";
                        throw CompileError(os.str());
                    }
                } else {
                    out.constant = ch.k_d; // intrinsic rate carries over unchanged
                    out.kd_meso_value = ch.k_d;
                }
            } else {
                if (ch.mode != RateMode::explicit_meso)
                    throw CompileError("channel '" + ch.name +
                                       "': unlinked unimolecular channels need an explicit constant");
                out.constant = ch.k_meso;
            }
        } else {
            out.bimolecular = true;
            out.s_a = ch.reactants[0];
            out.s_b = ch.reactants[1];
            out.kind = out.s_a == out.s_b ? ChannelKind::bi_homo : ChannelKind::bi_hetero;

            if (ch.mode == RateMode::explicit_meso) {
                out.constant = ch.k_meso;
            } else {
                PhysicalParams p = detail::pair_params(m, ch);
                if (!(p.D > 0.0))
                    throw CompileError("channel '" + ch.name + "': pairwise D must be > 0 (immobile pair)");
                if (!(p.sigma > 0.0))
                    throw CompileError("channel '" + ch.name + "': pairwise sigma must be > 0");
                out.pair_sigma = p.sigma;
                out.pair_D = p.D;
                out.k_r = p.k_r;
                const CriticalSizes crit = h_star(p);
                out.h_star_kr = crit.h_star_kr;
                out.h_star_inf = crit.h_star_inf;
                if (p.dim == 3) out.k_ck = collins_kimball(p);

                if (ch.mode == RateMode::collins_kimball) {
                    if (p.dim != 3)
                        throw CompileError("channel '" + ch.name + "': collins_kimball mode is 3D only");
                    out.constant = out.k_ck / (h * h * h);
                } else {
                    try {
                        const RateResult r = rho_meso(h, p);
                        out.constant = r.value;
                        out.flags = r.flags;
                    } catch (const NoValidRate& e) {
                        std::ostringstream os;
                        os << "channel '" << ch.name << "': no valid rate at h = " << e.h
                           << " (h*_kr = " << e.h_star_kr << ", h*_inf = " << e.h_star_inf << ")";
                        throw CompileError(os.str());
                    }
                }
                const RateResult fb = mesh_bound_F(p, opt.eps);
                out.mesh_bound = fb.value;
                if (h > fb.value) {
                    out.flags |= flag_h_above_mesh_bound;
                    std::ostringstream os;
                    os << "channel '" << ch.name << "': h = " << h << " exceeds F(eps=" << opt.eps
                       << ") = " << fb.value;
                    warn(os.str());
                }
                if (out.flags & flag_h_below_h_star_inf) {
                    std::ostringstream os;
                    os << "channel '" << ch.name << "': h = " << h << " < h*_inf = " << out.h_star_inf;
                    warn(os.str());
                }
                if (out.flags & flag_h_below_10sigma) {
                    std::ostringstream os;
                    os << "channel '" << ch.name << "': h = " << h << " < 10 sigma = " << 10.0 * p.sigma;
                    warn(os.str());
                }
            }
        }
        cm.channels.push_back(std::move(out));
    }
    return cm;
}

// mass-action propensity of a compiled channel given the voxel's counts
inline double reaction_propensity(const CompiledChannel& ch, std::span<const std::int64_t> voxel_counts) {
    switch (ch.kind) {
        case ChannelKind::source:
            return ch.constant;
        case ChannelKind::unimolecular:
            return ch.constant * static_cast<double>(voxel_counts[static_cast<std::size_t>(ch.s_a)]);
        case ChannelKind::bi_hetero:
            return ch.constant * static_cast<double>(voxel_counts[static_cast<std::size_t>(ch.s_a)]) *
                   static_cast<double>(voxel_counts[static_cast<std::size_t>(ch.s_b)]);
        case ChannelKind::bi_homo: {
            const double x = static_cast<double>(voxel_counts[static_cast<std::size_t>(ch.s_a)]);
            return ch.constant * x * (x - 1.0) * 0.5;
        }
    }
    return 0.0;
}

// Sparse state update: (voxel, species, delta) triples.  Reactions touch one
// voxel; a diffusion jump touches two with deltas (-1, +1).
struct StoichTriple {
    long long voxel;
    int species;
    int delta;
};

using StoichVector = std::vector<StoichTriple>;

class SystemState {
public:
    SystemState() = default;
    SystemState(long long voxels, int species)
        : K_(voxels), S_(species), counts_(static_cast<std::size_t>(voxels) * species, 0) {}

    static SystemState zeros(const CompiledModel& m) {
        return SystemState(m.voxel_count(), m.species_count());
    }

    long long voxels() const { return K_; }
    int species() const { return S_; }

    std::int64_t at(long long v, int s) const { return counts_[idx(v, s)]; }

    void set(long long v, int s, std::int64_t c) {
        if (c < 0) throw InvalidParams("SystemState: counts must be >= 0");
        counts_[idx(v, s)] = c;
    }

    void add(long long v, int s, std::int64_t d) {
        auto& c = counts_[idx(v, s)];
        c += d;
        if (c < 0)
            throw ConsistencyError("SystemState: negative copy number after update (propensity bug)");
    }

    std::span<const std::int64_t> voxel_counts(long long v) const {
        return {counts_.data() + idx(v, 0), static_cast<std::size_t>(S_)};
    }

    std::int64_t total(int s) const {
        std::int64_t t = 0;
        for (long long v = 0; v < K_; ++v) t += counts_[idx(v, s)];
        return t;
    }

    bool operator==(const SystemState&) const = default;

private:
    std::size_t idx(long long v, int s) const {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(S_) + static_cast<std::size_t>(s);
    }

    long long K_ = 0;
    int S_ = 0;
    std::vector<std::int64_t> counts_;
};

// Applies a stoichiometry vector and returns the voxels whose propensities
// must be recomputed.
inline std::vector<long long> apply_event(SystemState& state, const StoichVector& stoich) {
    std::vector<long long> affected;
    for (const auto& t : stoich) {
        state.add(t.voxel, t.species, t.delta);
        if (std::find(affected.begin(), affected.end(), t.voxel) == affected.end())
            affected.push_back(t.voxel);
    }
    return affected;
}

} // namespace rdkmc
