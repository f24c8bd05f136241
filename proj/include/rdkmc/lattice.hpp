#pragma once

// Cubic Cartesian voxel lattice with row-major linearization
// (index = x + n*(y + n*z)) and a precomputed flat adjacency table:
// 2*dim neighbor slots per voxel, -1 where a reflective wall closes a
// direction.  dim = 1 is supported for degenerate test lattices.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdkmc/errors.hpp"

namespace rdkmc {

enum class Boundary { periodic, reflective };

inline const char* to_string(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "reflective";
}

struct LatticeSpec {
    int dim = 3;
    int n = 1;          // voxels per side
    double L = 0.0;     // side length, m
    Boundary boundary = Boundary::periodic;

    double h() const { return L / n; }

    long long voxel_count() const {
        long long k = 1;
        for (int i = 0; i < dim; ++i) k *= n;
        return k;
    }

    void validate() const {
        if (dim < 1 || dim > 3) throw InvalidParams("LatticeSpec: dim must be 1, 2 or 3");
        if (n < 1) throw InvalidParams("LatticeSpec: n must be >= 1");
        if (!(L > 0.0)) throw InvalidParams("LatticeSpec: L must be > 0");
    }

    static LatticeSpec cubic(int dim, int n, double h, Boundary b = Boundary::periodic) {
        LatticeSpec s;
        s.dim = dim;
        s.n = n;
        s.L = h * n;
        s.boundary = b;
        s.validate();
        return s;
    }
};

class Adjacency {
public:
    Adjacency() = default;

    explicit Adjacency(const LatticeSpec& spec) {
        spec.validate();
        dirs_ = 2 * spec.dim;
        const long long K = spec.voxel_count();
        nbr_.assign(static_cast<std::size_t>(K) * dirs_, -1);
        open_.assign(static_cast<std::size_t>(K), 0);

        const int n = spec.n;
        long long stride[3] = {1, n, static_cast<long long>(n) * n};
        for (long long v = 0; v < K; ++v) {
            int c[3] = {0, 0, 0};
            long long rem = v;
            for (int a = 0; a < spec.dim; ++a) {
                c[a] = static_cast<int>(rem % n);
                rem /= n;
            }
            for (int a = 0; a < spec.dim; ++a) {
                for (int s = 0; s < 2; ++s) {
                    const int d = 2 * a + s;
                    const int step = s == 0 ? 1 : -1;
                    int q = c[a] + step;
                    bool open = true;
                    if (q < 0 || q >= n) {
                        if (spec.boundary == Boundary::reflective)
                            open = false;
                        else
                            q = (q + n) % n;
                    }
                    if (open && q != c[a]) {
                        nbr_[static_cast<std::size_t>(v) * dirs_ + d] =
                            static_cast<std::int32_t>(v + (q - c[a]) * stride[a]);
                        ++open_[static_cast<std::size_t>(v)];
                    } else if (open && n == 1) {
                        // single voxel per side: periodic wrap maps to itself,
                        // which is not a jump
                    }
                }
            }
        }
    }

    int dirs() const { return dirs_; }

    std::span<const std::int32_t> neighbors(long long v) const {
        return {nbr_.data() + static_cast<std::size_t>(v) * dirs_, static_cast<std::size_t>(dirs_)};
    }

    int open_dirs(long long v) const { return open_[static_cast<std::size_t>(v)]; }

private:
    int dirs_ = 0;
    std::vector<std::int32_t> nbr_;
    std::vector<int> open_;
};

} // namespace rdkmc
