#pragma once

// Conformal-mapping model of a coplanar waveguide on a zero-thickness
// half-space substrate.

#include <cmath>
#include <limits>
#include <string>

#include "cpwres/error.hpp"
#include "cpwres/units.hpp"

namespace cpwres {

/// Complete elliptic integral of the first kind K(k), modulus convention,
/// via the arithmetic-geometric mean: K(k) = pi / (2 AGM(1, sqrt(1 - k^2))).
inline double elliptic_k(double k) {
    if (!(k >= 0.0 && k < 1.0)) throw DomainError("elliptic_k: modulus must lie in [0, 1)");
    double a = 1.0;
    double b = std::sqrt((1.0 - k) * (1.0 + k));
    for (int i = 0; i < 64 && std::abs(a - b) > 1e-15 * a; ++i) {
        const double m = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = m;
    }
    return kPi / (a + b);
}

struct CpwCrossSection {
    double center_width_um = 0.0;
    double gap_um = 0.0;
    double film_thickness_um = 0.0;  // stored, not used by the model

    double modulus() const { return center_width_um / (center_width_um + 2.0 * gap_um); }
};

struct SubstrateSpec {
    enum class Model { zero_thickness_half_space };

    double relative_permittivity = 10.0;  // isotropic stand-in for C-plane sapphire
    Model model = Model::zero_thickness_half_space;
};

struct LineParams {
    double eps_eff = 1.0;
    double z0 = kReferenceImpedance;   // Ohm
    double phase_velocity = kSpeedOfLight;  // m/s
    double attenuation = 0.0;          // Np/m

    double beta(double f_hz) const { return angular(f_hz) / phase_velocity; }

    static LineParams from(double z0, double eps_eff, double attenuation = 0.0) {
        return {eps_eff, z0, kSpeedOfLight / std::sqrt(eps_eff), attenuation};
    }
};

inline void validate(const CpwCrossSection& xs) {
    if (!(xs.center_width_um > 0.0) || !std::isfinite(xs.center_width_um))
        throw InvalidGeometry("center_width must be positive (got " + std::to_string(xs.center_width_um) + " um)");
    if (!(xs.gap_um > 0.0) || !std::isfinite(xs.gap_um))
        throw InvalidGeometry("gap must be positive (got " + std::to_string(xs.gap_um) + " um)");
}

inline void validate(const SubstrateSpec& sub) {
    if (!(sub.relative_permittivity >= 1.0) || !std::isfinite(sub.relative_permittivity))
        throw InvalidSubstrate("relative_permittivity must be >= 1 (got " +
                               std::to_string(sub.relative_permittivity) + ")");
}

inline double half_space_eps_eff(const SubstrateSpec& sub) { return 0.5 * (1.0 + sub.relative_permittivity); }

/// Characteristic impedance for modulus k = w / (w + 2g).
inline double cpw_z0_from_modulus(double k, double eps_eff) {
    const double kp = std::sqrt((1.0 - k) * (1.0 + k));
    return 30.0 * kPi / std::sqrt(eps_eff) * elliptic_k(kp) / elliptic_k(k);
}

inline LineParams cpw_params(const CpwCrossSection& xs, const SubstrateSpec& sub) {
    validate(xs);
    validate(sub);
    const double eps_eff = half_space_eps_eff(sub);
    return LineParams::from(cpw_z0_from_modulus(xs.modulus(), eps_eff), eps_eff);
}

/// Inverse design: center width giving target_z0 at a fixed gap. Bisection on
/// the modulus, which z0 decreases monotonically in.
inline double solve_center_width(double target_z0, double gap_um, const SubstrateSpec& sub) {
    validate(sub);
    if (!(gap_um > 0.0)) throw InvalidGeometry("gap must be positive");
    const double eps_eff = half_space_eps_eff(sub);
    constexpr double k_lo_limit = 1e-7;  // below this k' rounds to 1
    constexpr double k_hi_limit = 1.0 - 1e-9;
    const double z_max = cpw_z0_from_modulus(k_lo_limit, eps_eff);
    const double z_min = cpw_z0_from_modulus(k_hi_limit, eps_eff);
    if (!(target_z0 > z_min && target_z0 < z_max))
        throw NoSolution("target impedance " + std::to_string(target_z0) + " Ohm outside attainable range (" +
                         std::to_string(z_min) + ", " + std::to_string(z_max) + ")");

    double lo = k_lo_limit, hi = k_hi_limit;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double z = cpw_z0_from_modulus(mid, eps_eff);
        if (std::abs(z - target_z0) < 1e-9) {
            lo = hi = mid;
            break;
        }
        (z > target_z0 ? lo : hi) = mid;
        if (hi - lo < std::numeric_limits<double>::epsilon() * hi) break;
    }
    const double k = 0.5 * (lo + hi);
    return 2.0 * gap_um * k / (1.0 - k);
}

}  // namespace cpwres
