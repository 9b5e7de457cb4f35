#pragma once

// Phenomenological TLS-saturation loss, used to synthesize power-sweep
// datasets with a known Q_i(<n>) curve.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cpwres/error.hpp"
#include "cpwres/network_sim.hpp"
#include "cpwres/photon_number.hpp"
#include "cpwres/trace.hpp"
#include "cpwres/units.hpp"

namespace cpwres {

struct LossModelParams {
    double tls_loss_tangent = 8e-6;       // F delta0
    double critical_photon_number = 10.0;
    double saturation_exponent = 0.5;     // beta
    double power_independent_q = 1e6;
    double temperature_k = 0.01;
    double frequency_hz = 6e9;
};

inline void validate(const LossModelParams& p) {
    if (!(p.tls_loss_tangent > 0.0) || !(p.critical_photon_number > 0.0) || !(p.power_independent_q > 0.0) ||
        !(p.temperature_k > 0.0) || !(p.frequency_hz > 0.0))
        throw DomainError("loss model: parameters must be positive");
    if (!(p.saturation_exponent > 0.0 && p.saturation_exponent <= 1.0))
        throw DomainError("loss model: saturation exponent must lie in (0, 1]");
}

/// 1/Q_i = F delta0 tanh(h f / 2 k T) / (1 + n/n_c)^beta + 1/Q_other
inline double qi_of_photon_number(const LossModelParams& p, double n) {
    validate(p);
    if (n < 0.0) throw DomainError("qi_of_photon_number: photon number must be non-negative");
    const double thermal = std::tanh(kPlanck * p.frequency_hz / (2.0 * kBoltzmann * p.temperature_k));
    const double tls = p.tls_loss_tangent * thermal / std::pow(1.0 + n / p.critical_photon_number, p.saturation_exponent);
    return 1.0 / (tls + 1.0 / p.power_independent_q);
}

struct SelfConsistentPoint {
    double q_internal = 0.0;
    double photon_number = 0.0;
    int iterations = 0;
};

/// Damped (0.5) fixed point of Q_i = Q_i(<n>(Q_i)) at a given chip power.
inline SelfConsistentPoint self_consistent_qi(const LossModelParams& p, double chip_power_w, double q_coupling,
                                              double f_r) {
    double qi = p.power_independent_q;
    for (int it = 1; it <= 100; ++it) {
        const double ql = 1.0 / (1.0 / qi + 1.0 / q_coupling);
        const double n = photon_number(chip_power_w, ql, qi, 1, f_r);
        const double target = qi_of_photon_number(p, n);
        if (std::abs(target - qi) <= 1e-6 * qi) {
            const double ql_t = 1.0 / (1.0 / target + 1.0 / q_coupling);
            return {target, photon_number(chip_power_w, ql_t, target, 1, f_r), it};
        }
        qi = 0.5 * qi + 0.5 * target;
    }
    throw ConvergenceError("self_consistent_qi: fixed point did not converge in 100 iterations");
}

/// Complex Gaussian noise with total standard deviation 10^(-snr/20) times the
/// median |S21|.
inline void add_complex_noise(S21Trace& t, double snr_db, std::mt19937_64& rng) {
    if (!std::isfinite(snr_db)) return;
    std::vector<double> mag(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) mag[i] = std::abs(t.s21[i]);
    const double sigma = detail::median(mag) * std::pow(10.0, -snr_db / 20.0) / std::sqrt(2.0);
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& z : t.s21) {
        const double re = normal(rng);
        const double im = normal(rng);
        z += cplx(re, im);
    }
}

inline std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

inline Feedline default_feedline(double eps_eff = 5.5) {
    return {LineParams::from(kReferenceImpedance, eps_eff), 2000.0};
}

/// One trace per source power. Traces are tagged with their source power and
/// carry the programmed truth in metadata (true_q_internal, true_photon_number).
inline std::vector<S21Trace> synthesize_power_sweep(const LossModelParams& params, const ResonatorSpec& resonator,
                                                    std::span<const double> powers_dbm, double attenuation_db,
                                                    double noise_snr_db, std::uint64_t seed,
                                                    const Feedline& feed = default_feedline()) {
    validate(params);
    validate(resonator);
    if (attenuation_db < 0.0) throw DomainError("synthesize_power_sweep: attenuation must be non-negative");
    ResonatorSpec lossless = resonator;
    lossless.internal_q = std::numeric_limits<double>::infinity();
    const double f_r = fundamental_frequency(lossless, 0.0);
    const double qc = coupling_q_from_cap(resonator.coupling_cap_ff, lossless);

    std::vector<S21Trace> out;
    for (std::size_t i = 0; i < powers_dbm.size(); ++i) {
        const double chip_w = dbm_to_watt(powers_dbm[i] - attenuation_db);
        const SelfConsistentPoint sc = self_consistent_qi(params, chip_w, qc, f_r);

        ResonatorSpec r = resonator;
        r.internal_q = sc.q_internal;
        const double ql = 1.0 / (1.0 / sc.q_internal + 1.0 / qc);
        const double half = 10.0 * f_r / ql;
        const auto grid = linear_grid(f_r - half, f_r + half, 1601);
        const TappedResonator tr{r, 0.5 * feed.length_um};
        S21Trace t = s21_sweep(feed, std::span<const TappedResonator>(&tr, 1), grid);
        t.s11.clear();
        t.s22.clear();
        auto rng = derived_rng(seed, i);
        add_complex_noise(t, noise_snr_db, rng);

        t.incident_power_dbm = powers_dbm[i];
        t.metadata["id"] = "p" + std::to_string(i);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", sc.q_internal);
        t.metadata["true_q_internal"] = buf;
        std::snprintf(buf, sizeof buf, "%.17g", sc.photon_number);
        t.metadata["true_photon_number"] = buf;
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace cpwres
