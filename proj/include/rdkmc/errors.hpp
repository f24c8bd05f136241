#pragma once

#include <stdexcept>
#include <string>

namespace rdkmc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter or configuration value outside its documented domain.
struct InvalidParams : Error {
    using Error::Error;
};

// Operation only derived/defined in some dimensions (e.g. Collins-Kimball is 3D).
struct UnsupportedDimension : Error {
    using Error::Error;
};

// No mesoscopic association rate exists at the requested voxel width:
// h <= h*_{k_r}, i.e. 1 + (k_r/D) G(h,sigma) <= 0.
struct NoValidRate : Error {
    double h;          // requested voxel width
    double h_star_kr;  // smallest admissible width for this k_r
    double h_star_inf; // smallest width admissible for every k_r (reversible bound)
    NoValidRate(const std::string& what, double h_, double kr_bound, double inf_bound)
        : Error(what), h(h_), h_star_kr(kr_bound), h_star_inf(inf_bound) {}
};

// Model definition cannot be turned into per-voxel propensity constants.
struct CompileError : Error {
    using Error::Error;
};

// Experiment/model file could not be parsed or is self-inconsistent.
struct ConfigError : Error {
    using Error::Error;
};

// Internal invariant broken (negative copy number, |r| < sigma, ...).
// Always a bug in the simulator, never a user error.
struct ConsistencyError : Error {
    using Error::Error;
};

} // namespace rdkmc
