#pragma once

// Notch-type resonance extraction: cable delay and background removal,
// circle fit, phase fit, diameter correction, then a simultaneous
// least-squares refinement of all parameters on the raw data.

#include <boost/math/tools/minima.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cpwres/circle_fit.hpp"
#include "cpwres/error.hpp"
#include "cpwres/levenberg_marquardt.hpp"
#include "cpwres/trace.hpp"
#include "cpwres/units.hpp"

namespace cpwres {

/// Parameters of S21 = a e^{i alpha} e^{-2 pi i f tau} [1 - (Q_L/|Q_c|) e^{i phi} / (1 + 2i Q_L (f - f_r)/f_r)].
struct NotchParams {
    double f_r = 0.0;
    double q_loaded = 0.0;
    double q_coupling_mag = 0.0;
    double mismatch_angle = 0.0;
    double amplitude = 1.0;
    double phase = 0.0;
    double delay = 0.0;

    static NotchParams from_q(double f_r, double q_internal, double q_coupling_mag, double mismatch_angle = 0.0) {
        const double ql = 1.0 / (1.0 / q_internal + std::cos(mismatch_angle) / q_coupling_mag);
        return {f_r, ql, q_coupling_mag, mismatch_angle};
    }
};

inline cplx notch_model(double f, const NotchParams& p) {
    const cplx background = p.amplitude * std::polar(1.0, p.phase - 2.0 * kPi * f * p.delay);
    const cplx lorentz = (p.q_loaded / p.q_coupling_mag) * std::polar(1.0, p.mismatch_angle) /
                         cplx(1.0, 2.0 * p.q_loaded * (f - p.f_r) / p.f_r);
    return background * (1.0 - lorentz);
}

inline S21Trace synthesize_notch_trace(std::span<const double> grid, const NotchParams& p) {
    S21Trace t;
    t.frequencies.assign(grid.begin(), grid.end());
    t.s21.reserve(grid.size());
    for (double f : grid) t.s21.push_back(notch_model(f, p));
    t.validate();
    return t;
}

struct FitDiagnostics {
    // standard errors, order: amplitude, phase, delay, f_r, Q_L, |Q_c|, phi
    std::array<double, 7> std_error{};
    int iterations = 0;
    std::size_t points_used = 0;
    bool converged = false;
};

struct FitResult {
    double f_r = 0.0;
    double q_loaded = 0.0;
    double q_coupling_mag = 0.0;
    double mismatch_angle = 0.0;
    double q_internal = 0.0;
    double cable_delay = 0.0;
    double background_amplitude = 1.0;
    double background_phase = 0.0;
    double rms_residual = 0.0;
    FitDiagnostics diagnostics;

    NotchParams notch() const {
        return {f_r, q_loaded, q_coupling_mag, mismatch_angle, background_amplitude, background_phase, cable_delay};
    }
};

struct BackgroundRemoval {
    S21Trace normalized;
    double delay = 0.0;
    double amplitude = 1.0;
    double phase = 0.0;
};

namespace detail {

inline double wrap_phase(double x) {
    x = std::remainder(x, 2.0 * kPi);
    return x <= -kPi ? x + 2.0 * kPi : x;
}

inline std::vector<double> unwrapped_phase(std::span<const cplx> z) {
    std::vector<double> ph(z.size());
    double offset = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double p = std::arg(z[i]);
        if (i > 0) {
            const double prev = ph[i - 1] - offset;
            const double jump = p - prev;
            if (jump > kPi) offset -= 2.0 * kPi * std::round(jump / (2.0 * kPi));
            else if (jump < -kPi) offset += 2.0 * kPi * std::round(-jump / (2.0 * kPi));
        }
        ph[i] = p + offset;
    }
    return ph;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

inline std::vector<cplx> remove_delay(const S21Trace& t, double f_ref, double tau) {
    std::vector<cplx> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        out[i] = t.s21[i] * std::polar(1.0, 2.0 * kPi * (t.frequencies[i] - f_ref) * tau);
    return out;
}

// Everything the background stage learns; fit_notch reuses it as a start point.
struct BackgroundStage {
    bool has_dip = false;
    double f_ref = 0.0;
    double delay = 0.0;
    cplx off_resonant{1.0};  // in the delay-removed frame referenced at f_ref
    Circle circle;           // delay-removed frame
    double f_r = 0.0;
    double q_loaded = 0.0;
    double theta0 = 0.0;
};

inline BackgroundStage background_stage(const S21Trace& t) {
    t.validate();
    const std::size_t n = t.size();
    if (n < 50) throw InsufficientSpan("remove_background: need at least 50 points, got " + std::to_string(n));

    BackgroundStage st;
    st.f_ref = 0.5 * (t.frequencies.front() + t.frequencies.back());
    const std::size_t edge = std::max<std::size_t>(n / 5, 2);

    // linear fit of unwrapped phase over the outer 20% on each side
    const auto phase = unwrapped_phase(t.s21);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, amp = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= edge && i < n - edge) continue;
        const double x = t.frequencies[i] - st.f_ref;
        sx += x, sy += phase[i], sxx += x * x, sxy += x * phase[i], amp += std::abs(t.s21[i]);
        ++m;
    }
    const double md = static_cast<double>(m);
    const double slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / md;
    double tau = -slope / (2.0 * kPi);
    const double a0 = amp / md;
    st.delay = tau;
    st.off_resonant = std::polar(a0, intercept);

    // dip detection on the magnitude relative to the off-resonant level
    std::vector<double> mag2(n);
    std::size_t imin = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mag2[i] = std::norm(t.s21[i]) / (a0 * a0);
        if (mag2[i] < mag2[imin]) imin = i;
    }
    if (std::sqrt(mag2[imin]) > 0.99) return st;
    st.has_dip = true;

    // linewidth from the half-depth crossing of |S21|^2
    const double half = 0.5 * (1.0 + mag2[imin]);
    std::size_t lo = imin, hi = imin;
    while (lo > 0 && mag2[lo] < half) --lo;
    while (hi + 1 < n && mag2[hi] < half) ++hi;
    const double linewidth = std::max(t.frequencies[hi] - t.frequencies[lo], t.span() / static_cast<double>(n));
    if (t.span() < 6.0 * linewidth)
        throw InsufficientSpan("remove_background: span covers fewer than 6 linewidths");

    // refine the delay: the right delay puts the data on a circle. The rms
    // distance is V-shaped at a noiseless optimum, so Brent resolves it to
    // machine precision instead of sqrt(eps).
    auto circle_cost = [&](double candidate) {
        const auto z = remove_delay(t, st.f_ref, candidate);
        try {
            return std::sqrt(circle_residual(z, circle_fit(z))) / a0;
        } catch (const DegenerateError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const double window = 0.1 / t.span();
    constexpr int kScan = 41;
    double best_tau = tau, best_cost = circle_cost(tau);
    for (int k = 0; k < kScan; ++k) {
        const double cand = tau - window + 2.0 * window * k / (kScan - 1);
        const double c = circle_cost(cand);
        if (c < best_cost) best_cost = c, best_tau = cand;
    }
    const double cell = 2.0 * window / (kScan - 1);
    // Brent works on a unit-scaled offset; its tolerance floor assumes |x| ~ 1
    auto scaled_cost = [&](double u) { return circle_cost(best_tau + u * cell); };
    tau = best_tau + cell * boost::math::tools::brent_find_minima(scaled_cost, -1.0, 1.0, std::numeric_limits<double>::digits).first;
    st.delay = tau;

    const auto z = remove_delay(t, st.f_ref, tau);
    st.circle = circle_fit(z);

    // phase of (z - center) vs frequency: theta0 + 2 atan(2 Q_L (1 - f/f_r))
    std::vector<cplx> rel(n);
    for (std::size_t i = 0; i < n; ++i) rel[i] = z[i] - st.circle.center;
    const auto theta = unwrapped_phase(rel);

    const double f0 = t.frequencies[imin];
    Eigen::VectorXd p(3);
    p << theta[imin], f0 / linewidth, f0;
    auto model = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd& j) {
        r.resize(static_cast<Eigen::Index>(n));
        j.resize(static_cast<Eigen::Index>(n), 3);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const double f = t.frequencies[i];
            const double u = 2.0 * q[1] * (1.0 - f / q[2]);
            const double den = 1.0 + u * u;
            r[ii] = q[0] + 2.0 * std::atan(u) - theta[i];
            j(ii, 0) = 1.0;
            j(ii, 1) = 2.0 * 2.0 * (1.0 - f / q[2]) / den;
            j(ii, 2) = 2.0 * 2.0 * q[1] * f / (q[2] * q[2]) / den;
        }
    };
    const LmResult lm = levenberg_marquardt(model, p);
    st.theta0 = lm.params[0];
    st.q_loaded = std::abs(lm.params[1]);
    st.f_r = lm.params[2];
    st.off_resonant = st.circle.center + std::polar(st.circle.radius, st.theta0 + kPi);
    return st;
}

struct RefineOutput {
    LmResult lm;
    std::size_t points = 0;
    double rms = 0.0;
};

// params: amplitude, phase at f_ref, delay, f_r, Q_L, |Q_c|, phi
inline RefineOutput refine_notch(const S21Trace& t, double f_ref, const Eigen::VectorXd& start, double f_lo,
                                 double f_hi) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t.frequencies[i] >= f_lo && t.frequencies[i] <= f_hi) idx.push_back(i);
    if (idx.size() < 30) {
        idx.resize(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) idx[i] = i;
    }
    const auto m = static_cast<Eigen::Index>(idx.size());

    auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& j) {
        r.resize(2 * m);
        j.resize(2 * m, 7);
        const double a = p[0], alpha = p[1], tau = p[2], fr = p[3], ql = p[4], qc = p[5], phi = p[6];
        for (Eigen::Index k = 0; k < m; ++k) {
            const std::size_t i = idx[static_cast<std::size_t>(k)];
            const double f = t.frequencies[i];
            const cplx bg = a * std::polar(1.0, alpha - 2.0 * kPi * (f - f_ref) * tau);
            const cplx den(1.0, 2.0 * ql * (f / fr - 1.0));
            const cplx lor = (ql / qc) * std::polar(1.0, phi) / den;
            const cplx mdl = bg * (1.0 - lor);
            const cplx res = mdl - t.s21[i];
            const cplx d_a = mdl / a;
            const cplx d_alpha = cplx(0.0, 1.0) * mdl;
            const cplx d_tau = cplx(0.0, -2.0 * kPi * (f - f_ref)) * mdl;
            const cplx d_fr = -bg * (-lor / den * cplx(0.0, -2.0 * ql * f / (fr * fr)));
            const cplx d_ql = -bg * (lor / ql - lor / den * cplx(0.0, 2.0 * (f / fr - 1.0)));
            const cplx d_qc = -bg * (-lor / qc);
            const cplx d_phi = -bg * (cplx(0.0, 1.0) * lor);
            const std::array<cplx, 7> d{d_a, d_alpha, d_tau, d_fr, d_ql, d_qc, d_phi};
            r[2 * k] = res.real();
            r[2 * k + 1] = res.imag();
            for (Eigen::Index c = 0; c < 7; ++c) {
                j(2 * k, c) = d[static_cast<std::size_t>(c)].real();
                j(2 * k + 1, c) = d[static_cast<std::size_t>(c)].imag();
            }
        }
    };
    LmOptions opt;
    opt.max_iterations = 300;
    RefineOutput out;
    out.lm = levenberg_marquardt(model, start, opt);
    out.points = idx.size();
    out.rms = std::sqrt(out.lm.cost / static_cast<double>(idx.size())) / std::abs(out.lm.params[0]);
    return out;
}

inline FitResult fit_from_stage(const S21Trace& trace, const BackgroundStage& st) {
    const cplx c_norm = st.circle.center / st.off_resonant;
    const double diameter = 2.0 * st.circle.radius / std::abs(st.off_resonant);
    const double phi0 = std::arg(1.0 - c_norm);

    Eigen::VectorXd p(7);
    p << std::abs(st.off_resonant), std::arg(st.off_resonant), st.delay, st.f_r, st.q_loaded,
        st.q_loaded / diameter, phi0;

    detail::RefineOutput ref;
    for (int pass = 0; pass < 2; ++pass) {
        const double half = 5.0 * p[3] / std::abs(p[4]);
        ref = detail::refine_notch(trace, st.f_ref, p, p[3] - half, p[3] + half);
        p = ref.lm.params;
    }

    auto diagnostics = [&] {
        std::ostringstream os;
        os << "iterations=" << ref.lm.iterations << " points=" << ref.points << " rms=" << ref.rms
           << " f_r=" << p[3] << " Q_L=" << p[4] << " |Q_c|=" << p[5] << " phi=" << p[6];
        return os.str();
    };
    if (!ref.lm.converged || !p.allFinite()) throw ConvergenceError("fit_notch: refinement did not converge (" + diagnostics() + ")");

    FitResult fr;
    fr.background_amplitude = p[0];
    double alpha = p[1];
    fr.q_loaded = p[4];
    fr.q_coupling_mag = p[5];
    fr.mismatch_angle = p[6];
    if (fr.background_amplitude < 0.0) fr.background_amplitude = -fr.background_amplitude, alpha += kPi;
    if (fr.q_coupling_mag < 0.0) fr.q_coupling_mag = -fr.q_coupling_mag, fr.mismatch_angle += kPi;
    fr.mismatch_angle = detail::wrap_phase(fr.mismatch_angle);
    fr.f_r = p[3];
    fr.cable_delay = p[2];
    fr.background_phase = detail::wrap_phase(alpha + 2.0 * kPi * st.f_ref * fr.cable_delay);
    fr.rms_residual = ref.rms;

    const double inv_qi = 1.0 / fr.q_loaded - std::cos(fr.mismatch_angle) / fr.q_coupling_mag;
    if (!(fr.q_loaded > 0.0) || !(inv_qi > 0.0))
        throw ConvergenceError("fit_notch: unphysical quality factors (" + diagnostics() + ")");
    fr.q_internal = 1.0 / inv_qi;
    if (fr.f_r < trace.frequencies.front() || fr.f_r > trace.frequencies.back())
        throw ConvergenceError("fit_notch: resonance outside the trace span (" + diagnostics() + ")");

    fr.diagnostics.iterations = ref.lm.iterations;
    fr.diagnostics.points_used = ref.points;
    fr.diagnostics.converged = true;
    for (int k = 0; k < 7; ++k) fr.diagnostics.std_error[static_cast<std::size_t>(k)] = std::sqrt(std::max(ref.lm.covariance(k, k), 0.0));
    return fr;
}

}  // namespace detail

/// Full notch extraction on a raw (or already normalized) trace.
inline FitResult fit_notch(const S21Trace& trace) {
    const detail::BackgroundStage st = detail::background_stage(trace);
    if (!st.has_dip) throw NoResonance("fit_notch: no dip deeper than 1% of the background");
    return detail::fit_from_stage(trace, st);
}

/// Cable delay, amplitude and phase of the off-resonant background; the
/// normalized trace has its off-resonant point at 1 + 0i. With a dip present
/// the circle-stage estimate is polished by the full model fit, which pins
/// the delay far more tightly than circle residuals can.
inline BackgroundRemoval remove_background(const S21Trace& trace) {
    const detail::BackgroundStage st = detail::background_stage(trace);
    double delay = st.delay;
    cplx off_resonant = st.off_resonant;
    if (st.has_dip) {
        try {
            const FitResult fr = detail::fit_from_stage(trace, st);
            delay = fr.cable_delay;
            off_resonant = std::polar(fr.background_amplitude, fr.background_phase - 2.0 * kPi * st.f_ref * delay);
        } catch (const Error&) {
        }
    }
    BackgroundRemoval out;
    out.delay = delay;
    out.amplitude = std::abs(off_resonant);
    out.phase = detail::wrap_phase(std::arg(off_resonant) + 2.0 * kPi * st.f_ref * delay);
    out.normalized = trace;
    out.normalized.s11.clear();
    out.normalized.s22.clear();
    const auto z = detail::remove_delay(trace, st.f_ref, delay);
    for (std::size_t i = 0; i < z.size(); ++i) out.normalized.s21[i] = z[i] / off_resonant;
    return out;
}

/// Indices of distinct dips: contiguous runs below (1 - min_depth) of the
/// median level, one index (the minimum) per run.
inline std::vector<std::size_t> find_dips(const S21Trace& trace, double min_depth = 0.1) {
    std::vector<double> mag(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) mag[i] = std::abs(trace.s21[i]);
    const double level = (1.0 - min_depth) * detail::median(mag);
    std::vector<std::size_t> dips;
    for (std::size_t i = 0; i < mag.size();) {
        if (mag[i] >= level) {
            ++i;
            continue;
        }
        std::size_t best = i;
        while (i < mag.size() && mag[i] < level) {
            if (mag[i] < mag[best]) best = i;
            ++i;
        }
        dips.push_back(best);
    }
    return dips;
}

}  // namespace cpwres
