#pragma once

// Tabulated radial propagator for the relative coordinate of one reacting
// pair in 3D: isotropic diffusion with constant D outside the contact sphere
// r = sigma, where the partially absorbing (Robin) condition
// 4 pi sigma^2 D dp/dr = k_r p removes probability flux.  Because |r| of an
// isotropic diffusion is itself Markov, one radial PDE
//
//   dp/dt = D (1/r^2) d/dr (r^2 dp/dr),   r in (sigma, r_max)
//
// carries all binding statistics.  The builder discretizes it with a
// conservative finite-volume scheme, diagonalizes the (symmetrizable)
// tridiagonal generator once, and stores, for a log-spaced family of start
// radii r0, the one-step binding probability 1 - S(dt; r0) and the
// conditional radial displacement CDF.  Exact in time; spatial resolution is
// the only discretization knob (checked by the step-halving and calibration
// tests).
//
// Tables depend on (D, sigma, k_r, dt, shell) only and are cached to disk in
// a versioned binary format keyed by a content hash of those parameters.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rdkmc/errors.hpp"
#include "rdkmc/rates.hpp"

namespace rdkmc {

class PropagatorTable {
public:
    struct Spec {
        double D = 0.0;
        double sigma = 0.0;
        double k_r = 0.0; // infinite_rate = absorbing
        double dt = 0.0;
        double shell = 5.0; // interaction shell radius in units of sigma
        int cells_per_step = 24; // radial cells per sqrt(2 D dt)
        int rows = 160;

        void validate() const {
            if (!(D > 0.0) || !(sigma > 0.0) || !(dt > 0.0))
                throw InvalidParams("PropagatorTable: D, sigma, dt must be > 0");
            if (k_r < 0.0 || std::isnan(k_r))
                throw InvalidParams("PropagatorTable: k_r must be >= 0");
            if (!(shell > 1.5)) throw InvalidParams("PropagatorTable: shell must exceed 1.5");
            if (cells_per_step < 4 || rows < 8) throw InvalidParams("PropagatorTable: resolution too coarse");
        }
    };

    static PropagatorTable build(const Spec& spec) {
        spec.validate();
        PropagatorTable t;
        t.spec_ = spec;

        const double step_len = std::sqrt(2.0 * spec.D * spec.dt);
        const double pad = std::max(4.0 * spec.sigma, 8.0 * step_len);
        t.r_max_ = spec.shell * spec.sigma + pad;
        const double target_dr = std::min(spec.sigma, step_len) / spec.cells_per_step;
        t.cells_ = static_cast<int>(std::ceil((t.r_max_ - spec.sigma) / target_dr));
        t.cells_ = std::clamp(t.cells_, 64, 4000);
        t.dr_ = (t.r_max_ - spec.sigma) / t.cells_;

        t.assemble_and_propagate();
        return t;
    }

    // ---- queries -----------------------------------------------------

    double dt() const { return spec_.dt; }
    double shell_radius() const { return spec_.shell * spec_.sigma; }
    double sigma() const { return spec_.sigma; }
    const Spec& spec() const { return spec_; }
    int cells() const { return cells_; }
    std::size_t rows() const { return row_r0_.size(); }
    double row_radius(std::size_t i) const { return row_r0_[i]; }
    double row_bind_probability(std::size_t i) const { return p_bind_[i]; }

    // probability that a pair starting at radius r0 binds within one dt
    double binding_probability(double r0) const {
        const auto [lo, hi, w] = bracket(r0);
        return (1.0 - w) * p_bind_[lo] + w * p_bind_[hi];
    }

    // new radius conditional on surviving the step, via shared-quantile
    // interpolation between the bracketing start rows
    double sample_radius(double r0, double u) const {
        const auto [lo, hi, w] = bracket(r0);
        const double a = invert_cdf(lo, u);
        if (w == 0.0) return a;
        return (1.0 - w) * a + w * invert_cdf(hi, u);
    }

    // ---- cache io ----------------------------------------------------

    std::string content_key() const {
        // FNV-1a over the parameter block
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](const void* p, std::size_t n) {
            const auto* b = static_cast<const unsigned char*>(p);
            for (std::size_t i = 0; i < n; ++i) {
                h ^= b[i];
                h *= 1099511628211ull;
            }
        };
        mix(&spec_.D, sizeof(double));
        mix(&spec_.sigma, sizeof(double));
        mix(&spec_.k_r, sizeof(double));
        mix(&spec_.dt, sizeof(double));
        mix(&spec_.shell, sizeof(double));
        mix(&spec_.cells_per_step, sizeof(int));
        mix(&spec_.rows, sizeof(int));
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("PropagatorTable: cannot open '" + path.string() + "' for writing");
        os.write(magic(), 8);
        auto wd = [&os](double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
        auto wi = [&os](std::int64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
        wd(spec_.D);
        wd(spec_.sigma);
        wd(spec_.k_r);
        wd(spec_.dt);
        wd(spec_.shell);
        wi(spec_.cells_per_step);
        wi(spec_.rows);
        wd(r_max_);
        wd(dr_);
        wi(cells_);
        wi(static_cast<std::int64_t>(row_r0_.size()));
        auto wv = [&os](const std::vector<double>& v) {
            os.write(reinterpret_cast<const char*>(v.data()),
                     static_cast<std::streamsize>(v.size() * sizeof(double)));
        };
        wv(row_r0_);
        wv(p_bind_);
        for (const auto& row : cdf_) wv(row);
        if (!os) throw Error("PropagatorTable: short write to '" + path.string() + "'");
    }

    static PropagatorTable load(const std::filesystem::path& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw Error("PropagatorTable: cannot open '" + path.string() + "'");
        char m[8];
        is.read(m, 8);
        if (!is || std::string(m, 8) != magic())
            throw Error("PropagatorTable: '" + path.string() + "' has a wrong format version");
        PropagatorTable t;
        auto rd = [&is](double& v) { is.read(reinterpret_cast<char*>(&v), sizeof v); };
        auto ri = [&is](std::int64_t& v) { is.read(reinterpret_cast<char*>(&v), sizeof v); };
        std::int64_t cps = 0, rows_spec = 0, cells = 0, nrows = 0;
        rd(t.spec_.D);
        rd(t.spec_.sigma);
        rd(t.spec_.k_r);
        rd(t.spec_.dt);
        rd(t.spec_.shell);
        ri(cps);
        ri(rows_spec);
        rd(t.r_max_);
        rd(t.dr_);
        ri(cells);
        ri(nrows);
        t.spec_.cells_per_step = static_cast<int>(cps);
        t.spec_.rows = static_cast<int>(rows_spec);
        t.cells_ = static_cast<int>(cells);
        t.row_r0_.resize(static_cast<std::size_t>(nrows));
        t.p_bind_.resize(static_cast<std::size_t>(nrows));
        auto rv = [&is](std::vector<double>& v) {
            is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
        };
        rv(t.row_r0_);
        rv(t.p_bind_);
        t.cdf_.assign(static_cast<std::size_t>(nrows), std::vector<double>(static_cast<std::size_t>(cells)));
        for (auto& row : t.cdf_) rv(row);
        if (!is) throw Error("PropagatorTable: truncated file '" + path.string() + "'");
        return t;
    }

    static PropagatorTable build_or_load(const Spec& spec, const std::filesystem::path& cache_dir) {
        if (cache_dir.empty()) return build(spec);
        PropagatorTable probe;
        probe.spec_ = spec;
        const auto path = cache_dir / ("propagator-" + probe.content_key() + ".bin");
        std::error_code ec;
        if (std::filesystem::exists(path, ec)) {
            try {
                auto t = load(path);
                if (t.matches(spec)) return t;
            } catch (const Error&) {
                // fall through to a rebuild
            }
        }
        auto t = build(spec);
        std::filesystem::create_directories(cache_dir, ec);
        const auto tmp = path.string() + ".tmp";
        try {
            t.save(tmp);
            std::filesystem::rename(tmp, path, ec);
        } catch (const Error&) {
            std::filesystem::remove(tmp, ec); // cache write is best-effort
        }
        return t;
    }

    bool matches(const Spec& s) const {
        return spec_.D == s.D && spec_.sigma == s.sigma &&
               ((std::isinf(spec_.k_r) && std::isinf(s.k_r)) || spec_.k_r == s.k_r) &&
               spec_.dt == s.dt && spec_.shell == s.shell && spec_.cells_per_step == s.cells_per_step &&
               spec_.rows == s.rows;
    }

private:
    static const char* magic() { return "RDKMCPT1"; }

    struct Bracket {
        std::size_t lo, hi;
        double w;
    };

    Bracket bracket(double r0) const {
        if (r0 <= row_r0_.front()) return {0, 0, 0.0};
        if (r0 >= row_r0_.back()) return {row_r0_.size() - 1, row_r0_.size() - 1, 0.0};
        const auto it = std::upper_bound(row_r0_.begin(), row_r0_.end(), r0);
        const std::size_t hi = static_cast<std::size_t>(it - row_r0_.begin());
        const std::size_t lo = hi - 1;
        const double w = (r0 - row_r0_[lo]) / (row_r0_[hi] - row_r0_[lo]);
        return {lo, hi, w};
    }

    double invert_cdf(std::size_t row, double u) const {
        const auto& c = cdf_[row];
        const auto it = std::upper_bound(c.begin(), c.end(), u);
        std::size_t i = static_cast<std::size_t>(it - c.begin());
        if (i >= c.size()) i = c.size() - 1;
        const double lo = i == 0 ? 0.0 : c[i - 1];
        const double hi = c[i];
        const double f = hi > lo ? (u - lo) / (hi - lo) : 0.5;
        return spec_.sigma + (static_cast<double>(i) + f) * dr_;
    }

    void assemble_and_propagate() {
        const int n = cells_;
        const double sigma = spec_.sigma;

        std::vector<double> vol(static_cast<std::size_t>(n)), face_area(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            const double rf = sigma + i * dr_;
            face_area[static_cast<std::size_t>(i)] = 4.0 * pi * rf * rf;
        }
        for (int i = 0; i < n; ++i) {
            const double rl = sigma + i * dr_, rr = rl + dr_;
            vol[static_cast<std::size_t>(i)] = 4.0 * pi / 3.0 * (rr * rr * rr - rl * rl * rl);
        }

        // contact conductance: series combination of the Robin rate and the
        // half-cell diffusive resistance
        const double g_half = face_area[0] * spec_.D / (0.5 * dr_);
        const double k_hat = std::isinf(spec_.k_r) ? g_half : 1.0 / (1.0 / spec_.k_r + 1.0 / g_half);

        // symmetrized generator B = V^-1/2 K V^-1/2
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            double diag = 0.0;
            if (i > 0) {
                const double g = face_area[static_cast<std::size_t>(i)] * spec_.D / dr_;
                diag += g;
                B(i, i - 1) = g / std::sqrt(vol[static_cast<std::size_t>(i)] * vol[static_cast<std::size_t>(i - 1)]);
            }
            if (i + 1 < n) {
                const double g = face_area[static_cast<std::size_t>(i) + 1] * spec_.D / dr_;
                diag += g;
            }
            if (i == 0) diag += k_hat;
            B(i, i) = -diag / vol[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i + 1 < n; ++i) B(i, i + 1) = B(i + 1, i);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
        if (es.info() != Eigen::Success) throw Error("PropagatorTable: eigensolver failed");
        const Eigen::MatrixXd& Q = es.eigenvectors();
        Eigen::VectorXd decay = (es.eigenvalues() * spec_.dt).array().exp();

        // start rows: cell centers nearest to a log grid over [sigma, shell*sigma]
        std::vector<int> row_cells;
        const double top = spec_.shell * spec_.sigma;
        for (int k = 0; k < spec_.rows; ++k) {
            const double target =
                sigma * std::exp(std::log(top / sigma) * static_cast<double>(k) / (spec_.rows - 1));
            int cell = static_cast<int>((target - sigma) / dr_);
            cell = std::clamp(cell, 0, n - 1);
            if (row_cells.empty() || cell > row_cells.back()) row_cells.push_back(cell);
        }

        row_r0_.clear();
        p_bind_.clear();
        cdf_.clear();
        Eigen::VectorXd v0(n), proj(n), mass(n);
        for (int cell : row_cells) {
            row_r0_.push_back(sigma + (cell + 0.5) * dr_);
            // delta start in `cell`: (V^1/2 c)_i = delta_ic / sqrt(V_c)
            proj = Q.row(cell).transpose() / std::sqrt(vol[static_cast<std::size_t>(cell)]);
            v0 = Q * (decay.array() * proj.array()).matrix();
            double survive = 0.0;
            for (int i = 0; i < n; ++i) {
                double m = v0(i) * std::sqrt(vol[static_cast<std::size_t>(i)]);
                if (m < 0.0) m = 0.0;
                mass(i) = m;
                survive += m;
            }
            survive = std::min(survive, 1.0);
            p_bind_.push_back(1.0 - survive);
            auto& c = cdf_.emplace_back(static_cast<std::size_t>(n));
            if (survive <= 1e-300) {
                // fully absorbed within one step; the CDF is never sampled
                for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = 1.0;
            } else {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += mass(i) / survive;
                    c[static_cast<std::size_t>(i)] = acc;
                }
                c.back() = 1.0;
            }
        }
    }

    Spec spec_;
    double r_max_ = 0.0;
    double dr_ = 0.0;
    int cells_ = 0;
    std::vector<double> row_r0_;
    std::vector<double> p_bind_;
    std::vector<std::vector<double>> cdf_;
};

} // namespace rdkmc
