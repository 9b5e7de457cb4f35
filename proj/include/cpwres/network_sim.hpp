#pragma once

// ABCD-cascade simulation of capacitively coupled (hanger) resonators on a
// feedline.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpwres/cpw_geometry.hpp"
#include "cpwres/error.hpp"
#include "cpwres/trace.hpp"
#include "cpwres/units.hpp"

namespace cpwres {

struct TwoPortAbcd {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    cplx determinant() const { return a * d - b * c; }

    friend TwoPortAbcd operator*(const TwoPortAbcd& l, const TwoPortAbcd& r) {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
    TwoPortAbcd& operator*=(const TwoPortAbcd& r) { return *this = *this * r; }
};

struct SParams {
    cplx s11, s21, s12, s22;
};

inline SParams to_sparams(const TwoPortAbcd& m, double z_ref = kReferenceImpedance) {
    const cplx den = m.a + m.b / z_ref + m.c * z_ref + m.d;
    return {(m.a + m.b / z_ref - m.c * z_ref - m.d) / den, 2.0 / den, 2.0 * m.determinant() / den,
            (-m.a + m.b / z_ref - m.c * z_ref + m.d) / den};
}

inline TwoPortAbcd abcd_series(cplx z) { return {1.0, z, 0.0, 1.0}; }
inline TwoPortAbcd abcd_shunt(cplx y) { return {1.0, 0.0, y, 1.0}; }

/// Lossy line section. extra_q adds a frequency-proportional attenuation
/// beta / (2 Q) on top of line.attenuation.
inline TwoPortAbcd abcd_line(const LineParams& line, double length_um, double f_hz,
                             double extra_q = std::numeric_limits<double>::infinity()) {
    if (length_um < 0.0) throw DomainError("abcd_line: negative length");
    const double beta = line.beta(f_hz);
    const double alpha = line.attenuation + (std::isfinite(extra_q) ? beta / (2.0 * extra_q) : 0.0);
    const cplx gl = cplx(alpha, beta) * um_to_m(length_um);
    const cplx ch = std::cosh(gl), sh = std::sinh(gl);
    return {ch, line.z0 * sh, sh / line.z0, ch};
}

enum class Termination { short_circuit, open_circuit };

struct LineSegment {
    LineParams line;
    double length_um = 0.0;
};

/// Shunt capacitance to ground inside the resonator: `segment` indexes the
/// host segment, offset is measured from that segment's coupled-end side.
struct ShuntCap {
    double cap_ff = 0.0;
    std::size_t segment = 0;
    double offset_um = 0.0;
};

/// A resonator as a chain of segments ordered from the coupled (open) end
/// toward the termination.
struct ResonatorSpec {
    std::vector<LineSegment> segments;
    Termination termination = Termination::short_circuit;
    double coupling_cap_ff = 0.0;
    double internal_q = std::numeric_limits<double>::infinity();
    std::vector<ShuntCap> shunt_caps;

    double total_length_um() const {
        double l = 0.0;
        for (const auto& s : segments) l += s.length_um;
        return l;
    }
    // Sum of l / v over segments, seconds.
    double transit_time() const {
        double t = 0.0;
        for (const auto& s : segments) t += um_to_m(s.length_um) / s.line.phase_velocity;
        return t;
    }
};

inline void validate(const ResonatorSpec& res) {
    if (res.segments.empty()) throw DomainError("resonator: needs at least one segment");
    for (const auto& s : res.segments) {
        if (!(s.length_um > 0.0)) throw DomainError("resonator: segment length must be positive");
        if (!(s.line.z0 > 0.0) || !(s.line.phase_velocity > 0.0) || s.line.attenuation < 0.0)
            throw DomainError("resonator: invalid line parameters");
    }
    if (res.coupling_cap_ff < 0.0) throw DomainError("resonator: negative coupling capacitance");
    if (!(res.internal_q > 0.0)) throw DomainError("resonator: internal Q must be positive");
    for (const auto& c : res.shunt_caps) {
        if (c.cap_ff < 0.0) throw DomainError("resonator: negative shunt capacitance");
        if (c.segment >= res.segments.size() || c.offset_um < 0.0 ||
            c.offset_um > res.segments[c.segment].length_um)
            throw DomainError("resonator: shunt capacitance outside its segment");
    }
}

inline TwoPortAbcd chain_abcd(const ResonatorSpec& res, double f_hz) {
    TwoPortAbcd m;
    const double w = angular(f_hz);
    for (std::size_t i = 0; i < res.segments.size(); ++i) {
        const auto& seg = res.segments[i];
        std::vector<ShuntCap> caps;
        for (const auto& c : res.shunt_caps)
            if (c.segment == i) caps.push_back(c);
        std::sort(caps.begin(), caps.end(), [](const ShuntCap& x, const ShuntCap& y) { return x.offset_um < y.offset_um; });
        double pos = 0.0;
        for (const auto& c : caps) {
            if (c.offset_um > pos) m *= abcd_line(seg.line, c.offset_um - pos, f_hz, res.internal_q);
            m *= abcd_shunt(cplx(0.0, w * ff_to_f(c.cap_ff)));
            pos = c.offset_um;
        }
        if (seg.length_um > pos) m *= abcd_line(seg.line, seg.length_um - pos, f_hz, res.internal_q);
    }
    return m;
}

/// Admittance looking into the segment chain at the coupled end, excluding
/// the coupling capacitor. Open terminations use the admittance form Y = C/A.
inline cplx chain_admittance(const ResonatorSpec& res, double f_hz) {
    const TwoPortAbcd m = chain_abcd(res, f_hz);
    return res.termination == Termination::short_circuit ? m.d / m.b : m.c / m.a;
}

inline cplx chain_impedance(const ResonatorSpec& res, double f_hz) {
    const TwoPortAbcd m = chain_abcd(res, f_hz);
    return res.termination == Termination::short_circuit ? m.b / m.d : m.a / m.c;
}

/// Impedance looking into the coupling capacitor toward the terminated chain.
inline cplx input_impedance(const ResonatorSpec& res, double f_hz) {
    const cplx zc = res.coupling_cap_ff > 0.0 ? cplx(0.0, -1.0 / (angular(f_hz) * ff_to_f(res.coupling_cap_ff)))
                                              : cplx(0.0);
    return zc + chain_impedance(res, f_hz);
}

/// Admittance of the coupled-end node with the coupling capacitor returned to
/// ground through the (low-impedance) feedline. Its zeros are the loaded
/// resonances.
inline cplx node_admittance(const ResonatorSpec& res, double f_hz) {
    return cplx(0.0, angular(f_hz) * ff_to_f(res.coupling_cap_ff)) + chain_admittance(res, f_hz);
}

/// Lowest `count` zeros of Im(node_admittance) crossing from negative to
/// positive. Bracketing scan at pi/1000 electrical resolution, bisection to
/// tol_hz (tol_hz = 0 refines to machine precision).
inline std::vector<double> resonance_frequencies(const ResonatorSpec& res, std::size_t count, double tol_hz = 1.0,
                                                 double max_electrical_length = 0.0) {
    validate(res);
    const double transit = res.transit_time();
    const double step = (kPi / 1000.0) / (2.0 * kPi * transit);
    if (max_electrical_length <= 0.0) max_electrical_length = (4.0 * static_cast<double>(count) + 8.0) * kPi;
    const double f_stop = max_electrical_length / (2.0 * kPi * transit);

    auto im_y = [&](double f) { return node_admittance(res, f).imag(); };
    std::vector<double> roots;
    double f_prev = step;
    double y_prev = im_y(f_prev);
    for (std::size_t i = 2; step * static_cast<double>(i) <= f_stop && roots.size() < count; ++i) {
        const double f = step * static_cast<double>(i);
        const double y = im_y(f);
        if (y_prev < 0.0 && y >= 0.0) {
            double lo = f_prev, hi = f;
            while (hi - lo > tol_hz) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (im_y(mid) < 0.0 ? lo : hi) = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        f_prev = f;
        y_prev = y;
    }
    return roots;
}

inline double fundamental_frequency(const ResonatorSpec& res, double tol_hz = 1.0) {
    const auto roots = resonance_frequencies(res, 1, tol_hz);
    if (roots.empty()) throw NotFound("fundamental_frequency: no admittance zero in scan band");
    return roots.front();
}

struct Feedline {
    LineParams line;
    double length_um = 0.0;
};

struct TappedResonator {
    ResonatorSpec resonator;
    double tap_um = 0.0;
};

/// Loaded-Q estimate from the node-admittance slope and the conductance the
/// coupling capacitor sees looking into the two feedline halves.
struct ResonanceEstimate {
    double f_r = 0.0;
    double q_coupling = 0.0;
    double q_loaded = 0.0;
    double linewidth() const { return f_r / q_loaded; }
};

inline ResonanceEstimate estimate_resonance(const ResonatorSpec& res, double feed_z0 = kReferenceImpedance) {
    ResonatorSpec lossless = res;
    lossless.internal_q = std::numeric_limits<double>::infinity();
    const double f0 = fundamental_frequency(lossless, 0.0);
    const double h = f0 * 1e-7;
    const double slope = (node_admittance(lossless, f0 + h).imag() - node_admittance(lossless, f0 - h).imag()) /
                         (angular(f0 + h) - angular(f0 - h));
    const double c_eq = 0.5 * slope;
    const cplx zc(0.0, -1.0 / (angular(f0) * ff_to_f(std::max(res.coupling_cap_ff, 1e-300))));
    const double g = (1.0 / (zc + 0.5 * feed_z0)).real();
    const double qc = angular(f0) * c_eq / g;
    const double ql = std::isfinite(res.internal_q) ? 1.0 / (1.0 / qc + 1.0 / res.internal_q) : qc;
    return {f0, qc, ql};
}

/// chain_abcd applies internal_q as a line-material Q. Lossless coupling and
/// shunt caps hold part of the stored energy, so the resonator Q comes out
/// higher by 1/participation. This returns a copy whose line Q is rescaled so
/// the fundamental's internal Q equals res.internal_q.
inline ResonatorSpec calibrate_line_loss(ResonatorSpec res) {
    if (!std::isfinite(res.internal_q)) return res;
    ResonatorSpec lossless = res;
    lossless.internal_q = std::numeric_limits<double>::infinity();
    const double f0 = fundamental_frequency(lossless, 0.0);
    const double h = f0 * 1e-7;
    const double slope = (node_admittance(lossless, f0 + h).imag() - node_admittance(lossless, f0 - h).imag()) /
                         (angular(f0 + h) - angular(f0 - h));
    const double g = node_admittance(res, f0).real();
    if (!(g > 0.0) || !(slope > 0.0)) return res;
    const double q_eff = angular(f0) * slope / (2.0 * g);
    res.internal_q *= res.internal_q / q_eff;
    return res;
}

/// Pairs (i, j) of resonators whose 3-dB windows intersect.
inline std::vector<std::pair<std::size_t, std::size_t>> overlapping_resonances(
    const Feedline& feed, std::span<const TappedResonator> resonators) {
    std::vector<ResonanceEstimate> est;
    for (const auto& r : resonators) est.push_back(estimate_resonance(r.resonator, feed.line.z0));
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < est.size(); ++i)
        for (std::size_t j = i + 1; j < est.size(); ++j)
            if (std::abs(est[i].f_r - est[j].f_r) < 0.5 * (est[i].linewidth() + est[j].linewidth()))
                out.emplace_back(i, j);
    return out;
}

inline TwoPortAbcd chip_abcd(const Feedline& feed, std::span<const TappedResonator> sorted, double f_hz) {
    TwoPortAbcd m;
    double pos = 0.0;
    for (const auto& r : sorted) {
        if (r.tap_um > pos) m *= abcd_line(feed.line, r.tap_um - pos, f_hz);
        m *= abcd_shunt(1.0 / input_impedance(r.resonator, f_hz));
        pos = r.tap_um;
    }
    if (feed.length_um > pos) m *= abcd_line(feed.line, feed.length_um - pos, f_hz);
    return m;
}

/// Feedline with shunt resonator branches at their taps, 50 Ohm ports.
/// Overlapping 3-dB windows are reported in metadata["overlap"].
inline S21Trace s21_sweep(const Feedline& feed, std::span<const TappedResonator> resonators,
                          std::span<const double> grid) {
    if (feed.length_um < 0.0) throw DomainError("s21_sweep: negative feedline length");
    std::vector<TappedResonator> sorted(resonators.begin(), resonators.end());
    for (const auto& r : sorted) {
        validate(r.resonator);
        if (!(r.resonator.coupling_cap_ff > 0.0)) throw DomainError("s21_sweep: notch coupling needs a positive coupling cap");
        if (r.tap_um < 0.0 || r.tap_um > feed.length_um) throw DomainError("s21_sweep: tap position outside feedline");
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TappedResonator& x, const TappedResonator& y) { return x.tap_um < y.tap_um; });
    for (auto& r : sorted) r.resonator = calibrate_line_loss(r.resonator);

    S21Trace trace;
    trace.frequencies.assign(grid.begin(), grid.end());
    trace.s21.resize(grid.size());
    trace.s11.resize(grid.size());
    trace.s22.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const SParams s = to_sparams(chip_abcd(feed, sorted, grid[i]));
        trace.s21[i] = s.s21;
        trace.s11[i] = s.s11;
        trace.s22[i] = s.s22;
    }
    trace.validate();

    if (resonators.size() > 1) {
        std::string tag;
        for (const auto& [i, j] : overlapping_resonances(feed, resonators))
            tag += (tag.empty() ? "" : ";") + std::to_string(i) + "," + std::to_string(j);
        if (!tag.empty()) trace.metadata["overlap"] = tag;
    }
    return trace;
}

/// Matched, zero-length 50 Ohm feedline: S21 of a single isolated notch.
inline S21Trace notch_sweep(const ResonatorSpec& res, std::span<const double> grid) {
    const Feedline feed{LineParams::from(kReferenceImpedance, 1.0), 0.0};
    const TappedResonator tr{res, 0.0};
    return s21_sweep(feed, std::span<const TappedResonator>(&tr, 1), grid);
}

/// Default single-resonator grid: 1601 points over f_r +/- 10 linewidths.
inline std::vector<double> default_grid(const ResonatorSpec& res, std::size_t points = 1601,
                                        double half_span_linewidths = 10.0) {
    const ResonanceEstimate e = estimate_resonance(res);
    const double half = half_span_linewidths * e.linewidth();
    return linear_grid(e.f_r - half, e.f_r + half, points);
}

/// Scale every segment (and shunt-cap offset) so the loaded fundamental lands
/// on f_hz.
inline ResonatorSpec retune(ResonatorSpec res, double f_hz) {
    for (int it = 0; it < 30; ++it) {
        const double f = fundamental_frequency(res, 0.0);
        const double scale = f / f_hz;
        if (std::abs(scale - 1.0) < 1e-13) break;
        for (auto& s : res.segments) s.length_um *= scale;
        for (auto& c : res.shunt_caps) c.offset_um *= scale;
    }
    return res;
}

/// Coupling Q of a notch-coupled resonator, measured on the simulated
/// lossless dip: Q_c = f_r / (half-power bandwidth). With at_frequency set,
/// the resonator is first rescaled to resonate there.
inline double coupling_q_from_cap(double cap_ff, ResonatorSpec res, std::optional<double> at_frequency = {}) {
    if (!(cap_ff > 0.0)) throw DomainError("coupling_q_from_cap: capacitance must be positive");
    res.coupling_cap_ff = cap_ff;
    res.internal_q = std::numeric_limits<double>::infinity();
    validate(res);
    if (at_frequency) res = retune(res, *at_frequency);

    const double f_r = fundamental_frequency(res, 0.0);
    const double guess = std::max(estimate_resonance(res).linewidth(), f_r * 1e-15);
    auto power = [&](double f) {
        const std::array<double, 1> g{f};
        return std::norm(notch_sweep(res, g).s21[0]);
    };
    auto half_point = [&](double dir) {
        double inner = f_r, outer = f_r + dir * guess;
        for (int i = 0; i < 200 && power(outer) < 0.5; ++i) {
            inner = outer;
            outer = f_r + 2.0 * (outer - f_r);
        }
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (inner + outer);
            if (mid == inner || mid == outer) break;
            (power(mid) < 0.5 ? inner : outer) = mid;
        }
        return 0.5 * (inner + outer);
    };
    const double width = half_point(+1.0) - half_point(-1.0);
    if (!(width > f_r * 1e-12)) throw ResolutionError("coupling_q_from_cap: dip narrower than numerical resolution");
    return f_r / width;
}

}  // namespace cpwres
