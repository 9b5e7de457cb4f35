#pragma once

// Stepped-impedance resonator theory: resonance condition, minimum-length
// split, spurious modes, and physical length synthesis with discontinuity
// corrections.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cpwres/cpw_geometry.hpp"
#include "cpwres/error.hpp"
#include "cpwres/network_sim.hpp"
#include "cpwres/units.hpp"

namespace cpwres {

namespace detail {
inline bool at_tangent_pole(double theta) {
    return std::abs(std::cos(theta)) < 1e-15;
}
}  // namespace detail

/// tan(theta1) tan(theta2) - R; zero exactly at resonance of a SIR shorted at
/// one end, R = Z(open-end segment) / Z(shorted segment).
inline double resonance_residual(double ratio, double theta1, double theta2) {
    if (detail::at_tangent_pole(theta1) || detail::at_tangent_pole(theta2))
        throw PoleError("resonance_residual: electrical length at a tangent pole");
    return std::tan(theta1) * std::tan(theta2) - ratio;
}

/// Total electrical length 2 atan(sqrt R) of the equal-split design, the
/// minimum over all splits.
inline double minimal_total_theta(double ratio) {
    if (!(ratio > 0.0)) throw DomainError("minimal_total_theta: impedance ratio must be positive");
    return 2.0 * std::atan(std::sqrt(ratio));
}

/// Fractional length saving against the quarter-wave UIR (equal phase velocity).
inline double shortening_vs_quarter_wave(double ratio) { return 1.0 - minimal_total_theta(ratio) / (0.5 * kPi); }

inline double solve_theta2(double ratio, double theta1) {
    if (!(ratio > 0.0)) throw DomainError("solve_theta2: impedance ratio must be positive");
    if (!(theta1 > 0.0 && theta1 < 0.5 * kPi)) throw DomainError("solve_theta2: theta1 must lie in (0, pi/2)");
    return std::atan(ratio / std::tan(theta1));
}

/// Frequency ratios f_k / f_0 of the first `count` spurious modes of the
/// equal-split design: successive positive roots of tan^2 x = R, over the
/// fundamental root atan(sqrt R).
inline std::vector<double> spurious_ratios(double ratio, std::size_t count) {
    if (!(ratio > 0.0)) throw DomainError("spurious_ratios: impedance ratio must be positive");
    if (count < 1) throw DomainError("spurious_ratios: count must be >= 1");
    const double x0 = std::atan(std::sqrt(ratio));
    std::vector<double> out;
    out.reserve(count);
    for (int m = 1; out.size() < count; ++m) {
        out.push_back((m * kPi - x0) / x0);
        if (out.size() < count) out.push_back((m * kPi + x0) / x0);
    }
    return out;
}

/// Physical length (um) carrying electrical length theta at f.
inline double physical_length(double theta, double f_hz, const LineParams& line) {
    if (!(f_hz > 0.0)) throw DomainError("physical_length: frequency must be positive");
    if (theta < 0.0) throw DomainError("physical_length: electrical length must be non-negative");
    return m_to_um(theta * line.phase_velocity / angular(f_hz));
}

/// Length (um) by which a segment is shortened to absorb a shunt capacitance at
/// its end: delta_theta = atan(omega C Z0).
inline double length_correction(double cap_ff, double z0, double f_hz, const LineParams& line) {
    if (cap_ff < 0.0) throw DomainError("length_correction: negative capacitance");
    if (!(f_hz > 0.0)) throw DomainError("length_correction: frequency must be positive");
    const double dtheta = std::atan(angular(f_hz) * ff_to_f(cap_ff) * z0);
    return physical_length(dtheta, f_hz, line);
}

struct CorrectionCap {
    enum class Site { open_end, step, bend };

    double cap_ff = 0.0;
    Site site = Site::open_end;
    std::size_t segment = 0;  // bend host segment
    double offset_um = 0.0;   // bend position within its segment
};

struct DesignTarget {
    enum class Split { equal_theta, explicit_theta1 };

    double fundamental_frequency_hz = 0.0;
    Split split = Split::equal_theta;
    double theta1 = 0.0;  // used with explicit_theta1
    Termination termination = Termination::short_circuit;
    double coupling_cap_ff = 0.0;
};

struct SirDesign {
    double impedance_ratio = 1.0;
    std::vector<double> thetas;         // designed electrical lengths, coupled end first
    std::vector<LineSegment> segments;  // corrected physical lengths
    std::vector<CorrectionCap> correction_caps;
    Termination termination = Termination::short_circuit;
    double coupling_cap_ff = 0.0;
    double target_frequency_hz = 0.0;

    bool is_uniform() const { return segments.size() == 1; }
    double total_theta() const {
        double t = 0.0;
        for (double th : thetas) t += th;
        return t;
    }
    /// Electrical length relative to the uniform quarter-wave (or half-wave) line.
    double shortening() const {
        const double reference = termination == Termination::short_circuit ? 0.5 * kPi : kPi;
        return 1.0 - total_theta() / reference;
    }
};

inline ResonatorSpec to_resonator(const SirDesign& d) {
    ResonatorSpec res;
    res.segments = d.segments;
    res.termination = d.termination;
    res.coupling_cap_ff = d.coupling_cap_ff;
    for (const auto& c : d.correction_caps) {
        if (c.cap_ff == 0.0) continue;
        switch (c.site) {
            case CorrectionCap::Site::open_end: res.shunt_caps.push_back({c.cap_ff, 0, 0.0}); break;
            case CorrectionCap::Site::step:
                if (d.segments.size() > 1) res.shunt_caps.push_back({c.cap_ff, 1, 0.0});
                break;
            case CorrectionCap::Site::bend: res.shunt_caps.push_back({c.cap_ff, c.segment, c.offset_um}); break;
        }
    }
    return res;
}

/// Lengths for a one- or two-segment resonator resonating at the target. The
/// impedance ratio is taken from the segment lines (coupled end first). Caps
/// are absorbed by shortening their host segment; a final uniform rescale
/// against the simulated fundamental settles residual error from step and bend
/// caps.
inline SirDesign synthesize_design(const DesignTarget& target, std::span<const LineParams> lines,
                                   std::span<const CorrectionCap> caps = {}) {
    const double f = target.fundamental_frequency_hz;
    if (!(f > 0.0)) throw DomainError("synthesize_design: target frequency must be positive");
    if (lines.empty() || lines.size() > 2) throw DomainError("synthesize_design: one or two segment lines required");
    if (target.coupling_cap_ff < 0.0) throw DomainError("synthesize_design: negative coupling capacitance");
    for (const auto& c : caps) {
        if (c.cap_ff < 0.0) throw DomainError("synthesize_design: negative correction capacitance");
        if (c.site == CorrectionCap::Site::bend && c.segment >= lines.size())
            throw DomainError("synthesize_design: bend capacitance on a missing segment");
    }
    const bool shorted = target.termination == Termination::short_circuit;

    SirDesign d;
    d.termination = target.termination;
    d.coupling_cap_ff = target.coupling_cap_ff;
    d.target_frequency_hz = f;
    d.correction_caps.assign(caps.begin(), caps.end());

    if (lines.size() == 1) {
        d.impedance_ratio = 1.0;
        d.thetas = {shorted ? 0.5 * kPi : kPi};
    } else {
        const double r = lines[0].z0 / lines[1].z0;
        d.impedance_ratio = r;
        double t1 = 0.0, t2 = 0.0;
        if (target.split == DesignTarget::Split::equal_theta) {
            t1 = t2 = shorted ? std::atan(std::sqrt(r)) : 0.5 * kPi;
        } else {
            t1 = target.theta1;
            if (!(t1 > 0.0 && t1 < 0.5 * kPi)) throw DomainError("synthesize_design: theta1 must lie in (0, pi/2)");
            t2 = shorted ? solve_theta2(r, t1) : kPi - std::atan(std::tan(t1) / r);
        }
        d.thetas = {t1, t2};
    }

    for (std::size_t i = 0; i < lines.size(); ++i)
        d.segments.push_back({lines[i], physical_length(d.thetas[i], f, lines[i])});

    auto shorten = [&](std::size_t seg, double cap_ff) {
        d.segments[seg].length_um -= length_correction(cap_ff, lines[seg].z0, f, lines[seg]);
    };
    if (target.coupling_cap_ff > 0.0) shorten(0, target.coupling_cap_ff);
    for (const auto& c : caps) {
        switch (c.site) {
            case CorrectionCap::Site::open_end: shorten(0, c.cap_ff); break;
            case CorrectionCap::Site::step: shorten(0, c.cap_ff); break;
            case CorrectionCap::Site::bend: shorten(c.segment, c.cap_ff); break;
        }
    }
    for (const auto& s : d.segments)
        if (!(s.length_um > 0.0))
            throw DesignInfeasible("synthesize_design: corrections exceed segment length at " + std::to_string(f) + " Hz");
    for (const auto& c : caps)
        if (c.site == CorrectionCap::Site::bend && c.offset_um > d.segments[c.segment].length_um)
            throw DesignInfeasible("synthesize_design: bend lies beyond its corrected segment");

    const ResonatorSpec tuned = retune(to_resonator(d), f);
    const double scale = tuned.segments[0].length_um / d.segments[0].length_um;
    for (std::size_t i = 0; i < d.segments.size(); ++i) d.segments[i].length_um = tuned.segments[i].length_um;
    for (auto& c : d.correction_caps)
        if (c.site == CorrectionCap::Site::bend) c.offset_um *= scale;

    const double achieved = fundamental_frequency(to_resonator(d), 0.0);
    if (std::abs(achieved - f) > 1e-3 * f)
        throw DesignInfeasible("synthesize_design: could not reach " + std::to_string(f) + " Hz (got " +
                               std::to_string(achieved) + ")");
    return d;
}

}  // namespace cpwres
