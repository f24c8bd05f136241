#pragma once

// Closed-form rate calculators connecting the microscopic Smoluchowski
// parameters (k_r, k_d, D, sigma) to mesoscopic per-voxel propensity
// constants on a Cartesian lattice of voxel width h.
//
// The central objects are the mesh-coupled ("multiscale") association rate
//
//   rho(h) = (k_r / h^d) * (1 + (k_r/D) G(h,sigma))^-1,
//
// the geometric lattice factor G, the critical voxel widths h*_{k_r} and
// h*_inf below which no valid rate exists, the detailed-balance dissociation
// rate kd_meso = h^d k_d rho / k_r, and the tolerance bound F(eps) on h that
// keeps the relative rebinding-time error below eps.  All quantities are in
// strict SI units.  k_r may be the distinguished value infinite_rate
// (perfect absorption); every formula then evaluates its analytic limit
// rather than dividing by a large float.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "rdkmc/errors.hpp"

namespace rdkmc {

// Lattice Green's function constants, fixed to the precision they are known
// at; never recomputed at runtime.
inline constexpr double C2 = 0.1951;
inline constexpr double C3 = 1.5164;

inline constexpr double infinite_rate = std::numeric_limits<double>::infinity();
inline constexpr double pi = std::numbers::pi;

// Advisory flags. Calculators return these alongside the value instead of
// clamping or failing: the conditions are modeling warnings, not errors.
enum RateFlag : unsigned {
    flag_h_below_10sigma    = 1u << 0, // voxel not large vs molecules (h >> sigma assumption)
    flag_h_below_h_star_inf = 1u << 1, // dissociation would be accelerated (kd_meso > k_d)
    flag_h_above_mesh_bound = 1u << 2, // h exceeds F(eps) for the configured tolerance
    flag_eps_above_eps_max  = 1u << 3, // requested tolerance unreachable in 3D
    flag_unbounded          = 1u << 4, // value is +infinity by construction (F -> inf)
    flag_L_below_10sigma    = 1u << 5, // domain not large vs molecules
};

inline std::vector<std::string> flag_names(unsigned flags) {
    std::vector<std::string> out;
    if (flags & flag_h_below_10sigma) out.push_back("h_below_10sigma");
    if (flags & flag_h_below_h_star_inf) out.push_back("h_below_h_star_inf");
    if (flags & flag_h_above_mesh_bound) out.push_back("h_above_mesh_bound");
    if (flags & flag_eps_above_eps_max) out.push_back("eps_above_eps_max");
    if (flags & flag_unbounded) out.push_back("unbounded");
    if (flags & flag_L_below_10sigma) out.push_back("L_below_10sigma");
    return out;
}

// Intrinsic microscopic parameters of one reacting pair.
//   k_r   association rate at contact, m^dim/s (infinite_rate = absorbing)
//   k_d   dissociation rate of the complex, 1/s
//   D     relative diffusion constant = sum of the pair's constants, m^2/s
//   sigma reaction radius = sum of the molecular radii, m
struct PhysicalParams {
    double k_r = 0.0;
    double k_d = 0.0;
    double D = 0.0;
    double sigma = 0.0;
    int dim = 3;

    bool absorbing() const { return std::isinf(k_r); }

    void validate() const {
        if (!(D > 0.0)) throw InvalidParams("PhysicalParams: D must be > 0");
        if (!(sigma > 0.0)) throw InvalidParams("PhysicalParams: sigma must be > 0");
        if (k_r < 0.0 || std::isnan(k_r)) throw InvalidParams("PhysicalParams: k_r must be >= 0");
        if (!(k_d >= 0.0) || std::isinf(k_d)) throw InvalidParams("PhysicalParams: k_d must be finite and >= 0");
        if (dim != 2 && dim != 3) throw UnsupportedDimension("PhysicalParams: dim must be 2 or 3");
    }
};

// Voxel geometry of a cubic (square) lattice: h the voxel width, L = n*h the
// domain side, K = n^dim voxels.  L >= 10 sigma is advisory only.
struct MeshContext {
    double h = 0.0;
    double L = 0.0;
    long long K = 0;
    int dim = 3;

    static MeshContext cubic(int dim, int n, double h) {
        if (n < 1 || !(h > 0.0)) throw InvalidParams("MeshContext: need n >= 1 and h > 0");
        MeshContext m;
        m.dim = dim;
        m.h = h;
        m.L = h * n;
        m.K = 1;
        for (int i = 0; i < dim; ++i) m.K *= n;
        return m;
    }
};

struct RateResult {
    double value = 0.0;
    unsigned flags = 0;
};

// Both critical voxel widths: h_star_kr gates the existence of rho at this
// k_r; h_star_inf additionally keeps kd_meso <= k_d (and is the k_r->inf
// limit of h_star_kr).
struct CriticalSizes {
    double h_star_kr = 0.0;
    double h_star_inf = 0.0;
};

// Effective association rate of Collins and Kimball,
// k_CK = 4 pi sigma D k_r / (4 pi sigma D + k_r).  3D only.
inline double collins_kimball(const PhysicalParams& p) {
    p.validate();
    if (p.dim != 3)
        throw UnsupportedDimension("collins_kimball: only derived in 3D");
    const double kd3 = 4.0 * pi * p.sigma * p.D; // diffusion-limited ceiling
    if (p.absorbing()) return kd3;
    return kd3 * p.k_r / (kd3 + p.k_r);
}

// Geometric lattice factor G(h, sigma).  Dimension of 1/length^(dim-2):
// dimensionless in 2D, 1/m in 3D.  Its root in h is h_star_inf.
inline double g_geometric(double h, const PhysicalParams& p) {
    p.validate();
    if (!(h > 0.0)) throw InvalidParams("g_geometric: h must be > 0");
    if (p.dim == 2)
        return std::log(h / (std::sqrt(pi) * p.sigma)) / (2.0 * pi)
               - 0.25 * (3.0 / (2.0 * pi) + C2);
    return 1.0 / (4.0 * pi * p.sigma) - C3 / (6.0 * h);
}

inline CriticalSizes h_star(const PhysicalParams& p) {
    p.validate();
    CriticalSizes c;
    if (p.dim == 2) {
        const double base = std::sqrt(pi) * std::exp((3.0 + 2.0 * C2 * pi) / 4.0) * p.sigma;
        c.h_star_inf = base;
        c.h_star_kr = p.absorbing() ? base
                      : p.k_r == 0.0 ? 0.0
                                     : base * std::exp(-2.0 * pi * p.D / p.k_r);
    } else {
        c.h_star_inf = (C3 / 6.0) * (4.0 * pi * p.sigma);
        c.h_star_kr = p.absorbing() ? c.h_star_inf
                      : p.k_r == 0.0 ? 0.0
                                     : (C3 / 6.0) / (p.D / p.k_r + 1.0 / (4.0 * pi * p.sigma));
    }
    return c;
}

namespace detail {

inline unsigned advisory_flags_for_h(double h, const PhysicalParams& p, double h_star_inf) {
    unsigned f = 0;
    if (h < 10.0 * p.sigma) f |= flag_h_below_10sigma;
    if (h < h_star_inf) f |= flag_h_below_h_star_inf;
    return f;
}

} // namespace detail

// Mesoscopic association propensity constant rho(h).  Units 1/s after the
// h^-d scaling, i.e. this is the per-voxel constant multiplying x_A x_B.
// Throws NoValidRate for h <= h*_{k_r}.
inline RateResult rho_meso(double h, const PhysicalParams& p) {
    p.validate();
    if (!(h > 0.0)) throw InvalidParams("rho_meso: h must be > 0");
    const double G = g_geometric(h, p);
    const CriticalSizes crit = h_star(p);
    const double hd = std::pow(h, p.dim);

    RateResult r;
    r.flags = detail::advisory_flags_for_h(h, p, crit.h_star_inf);
    if (p.absorbing()) {
        // k_r -> inf limit: rho = D / (h^d G), valid only where G > 0.
        if (!(G > 0.0))
            throw NoValidRate("rho_meso: h <= h*_inf, no rate exists for absorbing reaction",
                              h, crit.h_star_kr, crit.h_star_inf);
        r.value = p.D / (hd * G);
        return r;
    }
    const double denom = 1.0 + (p.k_r / p.D) * G;
    if (!(denom > 0.0))
        throw NoValidRate("rho_meso: h <= h*_{k_r}, denominator 1 + (k_r/D)G is not positive",
                          h, crit.h_star_kr, crit.h_star_inf);
    r.value = p.k_r / hd / denom;
    return r;
}

// Detailed-balance dissociation constant kd_meso = h^d k_d rho / k_r
// = k_d (1 + (k_r/D) G)^-1.  Requires k_r > 0 when k_d > 0.
inline RateResult kd_meso(double h, const PhysicalParams& p) {
    p.validate();
    if (p.k_d == 0.0) {
        RateResult r;
        r.flags = detail::advisory_flags_for_h(h, p, h_star(p).h_star_inf);
        return r; // 0, trivially
    }
    if (p.k_r == 0.0)
        throw InvalidParams("kd_meso: undefined ratio, k_r = 0 with k_d > 0");
    RateResult r = rho_meso(h, p); // validity gate and flags
    if (p.absorbing()) {
        r.value = 0.0; // k_d / (1 + (k_r/D)G) -> 0 as k_r -> inf (G > 0 here)
        return r;
    }
    r.value = std::pow(h, p.dim) * p.k_d * r.value / p.k_r;
    return r;
}

// Maximal relative rebinding error in 3D, eps_max = k_CK / (4 pi sigma D).
inline double eps_max(const PhysicalParams& p) {
    p.validate();
    if (p.dim != 3)
        throw UnsupportedDimension("eps_max: no finite bound exists in 2D");
    return collins_kimball(p) / (4.0 * pi * p.sigma * p.D);
}

// Largest voxel width F(eps) with |k_r - h^d rho| < eps k_r.  eps = 0 gives
// exactly h*_inf.  In 3D, eps >= eps_max returns +infinity with
// flag_unbounded: any h satisfies the criterion.
inline RateResult mesh_bound_F(const PhysicalParams& p, double eps) {
    p.validate();
    if (!(eps >= 0.0) || eps >= 1.0)
        throw InvalidParams("mesh_bound_F: eps must lie in [0, 1)");
    const CriticalSizes crit = h_star(p);
    RateResult r;
    if (eps == 0.0) {
        r.value = crit.h_star_inf;
        return r;
    }
    if (p.k_r == 0.0)
        throw InvalidParams("mesh_bound_F: k_r = 0 leaves the tolerance criterion undefined");
    // t = (1 - (1-eps)^-1) = -eps/(1-eps); zero when k_r is infinite.
    const double t = p.absorbing() ? 0.0 : (1.0 - 1.0 / (1.0 - eps)) * p.D / p.k_r;
    if (p.dim == 2) {
        r.value = std::sqrt(pi) * std::exp(-2.0 * pi * t + (3.0 + 2.0 * pi * C2) / 4.0) * p.sigma;
        return r;
    }
    if (!p.absorbing() && eps >= eps_max(p)) {
        r.value = std::numeric_limits<double>::infinity();
        r.flags |= flag_unbounded | flag_eps_above_eps_max;
        return r;
    }
    const double bracket = 1.0 / (4.0 * pi * p.sigma) + t;
    r.value = (C3 / 6.0) / bracket;
    return r;
}

// Dimensionless disk quantities entering the 2D mean binding time.
struct Disk2DQuantities {
    double lambda = 0.0; // sqrt(pi) sigma / L
    double alpha = 0.0;  // k_r / (2 pi D), +inf for absorbing
    double Flambda = 0.0;

    static Disk2DQuantities of(const PhysicalParams& p, double L) {
        p.validate();
        if (!(L > 0.0)) throw InvalidParams("Disk2DQuantities: L must be > 0");
        Disk2DQuantities q;
        q.lambda = std::sqrt(pi) * p.sigma / L;
        if (!(q.lambda > 0.0 && q.lambda < 1.0))
            throw InvalidParams("Disk2DQuantities: need 0 < sqrt(pi) sigma / L < 1");
        q.alpha = p.absorbing() ? std::numeric_limits<double>::infinity()
                                : p.k_r / (2.0 * pi * p.D);
        const double l2 = q.lambda * q.lambda;
        q.Flambda = std::log(1.0 / q.lambda) / ((1.0 - l2) * (1.0 - l2))
                    - (3.0 - l2) / (4.0 * (1.0 - l2));
        return q;
    }
};

// Mean binding time of one pair from a uniform initial distribution in a
// square/cube of side L:  L^3/k_CK (3D) and (1 + alpha F(lambda)) L^2 / k_r
// (2D).  The absorbing 2D value F(lambda) L^2 / (2 pi D) is the alpha->inf
// limit of the finite-rate expression (derived limit, not stated separately
// in the source analysis).
inline RateResult tau_micro_mean(const PhysicalParams& p, double L) {
    p.validate();
    if (!(L > 0.0)) throw InvalidParams("tau_micro_mean: L must be > 0");
    if (p.k_r == 0.0) throw InvalidParams("tau_micro_mean: k_r = 0 never binds");
    RateResult r;
    if (L < 10.0 * p.sigma) r.flags |= flag_L_below_10sigma;
    if (p.dim == 3) {
        r.value = L * L * L / collins_kimball(p);
        return r;
    }
    const Disk2DQuantities q = Disk2DQuantities::of(p, L);
    if (p.absorbing())
        r.value = q.Flambda * L * L / (2.0 * pi * p.D);
    else
        r.value = (1.0 + q.alpha * q.Flambda) * L * L / p.k_r;
    return r;
}

// Mean rebinding times of a just-dissociated pair: the mesoscopic value
// K/rho(h) and the microscopic estimate L^d/k_r.  Both in seconds.
struct RebindTimes {
    double meso = 0.0;
    double micro = 0.0;
    unsigned flags = 0;
};

inline RebindTimes tau_rebind(const PhysicalParams& p, const MeshContext& m) {
    p.validate();
    if (m.dim != p.dim) throw InvalidParams("tau_rebind: mesh and params dimension mismatch");
    const RateResult rho = rho_meso(m.h, p);
    RebindTimes t;
    t.flags = rho.flags;
    if (m.L < 10.0 * p.sigma) t.flags |= flag_L_below_10sigma;
    t.meso = static_cast<double>(m.K) / rho.value;
    t.micro = p.absorbing() ? 0.0 : std::pow(m.L, p.dim) / p.k_r;
    return t;
}

} // namespace rdkmc
