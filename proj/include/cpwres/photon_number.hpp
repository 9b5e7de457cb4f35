#pragma once

// Circulating photon number from incident power, and batch analysis of
// power-tagged traces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cpwres/error.hpp"
#include "cpwres/resonance_fit.hpp"
#include "cpwres/units.hpp"

namespace cpwres {

namespace detail {
inline void check_photon_inputs(double q_loaded, double q_internal, int harmonic, double f_r) {
    if (!(q_loaded > 0.0) || !(q_internal > 0.0)) throw DomainError("photon_number: quality factors must be positive");
    if (q_loaded > q_internal)
        throw InconsistentQ("photon_number: loaded Q " + std::to_string(q_loaded) + " exceeds internal Q " +
                            std::to_string(q_internal));
    if (harmonic < 1) throw DomainError("photon_number: harmonic index must be >= 1");
    if (!(f_r > 0.0)) throw DomainError("photon_number: resonance frequency must be positive");
}
}  // namespace detail

/// <n> = P Q_L (1 - Q_L/Q_i) / (n pi h f_r^2), P in watts.
inline double photon_number(double p_inc_w, double q_loaded, double q_internal, int harmonic, double f_r) {
    if (p_inc_w < 0.0) throw DomainError("photon_number: incident power must be non-negative");
    detail::check_photon_inputs(q_loaded, q_internal, harmonic, f_r);
    return p_inc_w * q_loaded * (1.0 - q_loaded / q_internal) / (harmonic * kPi * kPlanck * f_r * f_r);
}

/// Incident power (dBm) for one circulating photon.
inline double single_photon_power(double q_loaded, double q_internal, int harmonic, double f_r) {
    detail::check_photon_inputs(q_loaded, q_internal, harmonic, f_r);
    const double per_watt = photon_number(1.0, q_loaded, q_internal, harmonic, f_r);
    if (!(per_watt > 0.0)) throw InconsistentQ("single_photon_power: resonator stores no photons (Q_L = Q_i)");
    return watt_to_dbm(1.0 / per_watt);
}

struct PowerPoint {
    std::string trace_id;
    double source_power_dbm = 0.0;
    double incident_power_dbm = 0.0;  // at the chip
    double photon_number = 0.0;
    FitResult fit;
};

struct SweepFailure {
    std::string trace_id;
    std::string message;
};

struct PowerSweepResult {
    std::vector<PowerPoint> points;  // ascending photon number
    std::vector<SweepFailure> failures;
};

inline std::string trace_id(const S21Trace& t, std::size_t index) {
    const auto it = t.metadata.find("id");
    return it != t.metadata.end() ? it->second : "trace" + std::to_string(index);
}

/// Fit every trace and convert its source power (less the line attenuation)
/// to a photon number using that trace's own fitted Qs. Individual failures
/// are collected, never fatal.
inline PowerSweepResult power_sweep(std::span<const S21Trace> traces, double line_attenuation_db, int harmonic = 1) {
    if (line_attenuation_db < 0.0) throw DomainError("power_sweep: attenuation must be non-negative");
    PowerSweepResult out;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const S21Trace& t = traces[i];
        const std::string id = trace_id(t, i);
        if (!t.incident_power_dbm) {
            out.failures.push_back({id, "missing incident power metadata"});
            continue;
        }
        try {
            PowerPoint pt;
            pt.trace_id = id;
            pt.source_power_dbm = *t.incident_power_dbm;
            pt.incident_power_dbm = pt.source_power_dbm - line_attenuation_db;
            pt.fit = fit_notch(t);
            pt.photon_number = photon_number(dbm_to_watt(pt.incident_power_dbm), pt.fit.q_loaded, pt.fit.q_internal,
                                             harmonic, pt.fit.f_r);
            out.points.push_back(std::move(pt));
        } catch (const Error& e) {
            out.failures.push_back({id, e.what()});
        }
    }
    std::stable_sort(out.points.begin(), out.points.end(),
                     [](const PowerPoint& a, const PowerPoint& b) { return a.photon_number < b.photon_number; });
    return out;
}

}  // namespace cpwres
