// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cpwres/cli.hpp"

using namespace cpwres;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %2d. %s: %s (%.3f s, budget %g s%s)\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), dt,
                budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

NotchParams random_notch(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double fr = 4e9 + 4e9 * u(rng);
    const double qi = std::exp(std::log(5e4) + (std::log(2e6) - std::log(5e4)) * u(rng));
    const double qc = 1e5 + 4e5 * u(rng);
    NotchParams p = NotchParams::from_q(fr, qi, qc, -0.5 + u(rng));
    p.delay = 60e-9 * u(rng);
    p.amplitude = 0.05 + 2.0 * u(rng);
    p.phase = kPi * (2.0 * u(rng) - 1.0);
    return p;
}

S21Trace trace_for(const NotchParams& p) {
    const double half = 10.0 * p.f_r / p.q_loaded;
    return synthesize_notch_trace(linear_grid(p.f_r - half, p.f_r + half, 1601), p);
}

double true_qi(const NotchParams& p) {
    return 1.0 / (1.0 / p.q_loaded - std::cos(p.mismatch_angle) / p.q_coupling_mag);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

int main() {
    criterion(1, "CPW impedance reproduction", 0.1, [] {
        const SubstrateSpec sub{};
        bool ok = true;
        std::string d;
        for (auto [w, g, ref] : {std::tuple{20.0, 10.0, 50.5}, std::tuple{4.0, 18.0, 92.6}}) {
            const auto t0 = std::chrono::steady_clock::now();
            const double z = cpw_params({w, g}, sub).z0;
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const double dev = z / ref - 1.0;
            ok = ok && std::abs(dev) <= 0.03 && dt < 1e-3;
            d += fmt("w=%g g=%g -> %.2f Ohm ", w, g, z) + fmt("(%+.2f%% vs %g) in %.1f us; ", 100 * dev, ref, 1e6 * dt);
        }
        d.resize(d.size() - 2);
        return Outcome{ok, d};
    });

    criterion(2, "SIR shortening", 0.1, [] {
        const double s054 = 100.0 * shortening_vs_quarter_wave(0.54);
        const double s041 = 100.0 * shortening_vs_quarter_wave(0.41);
        const bool ok = std::abs(s054 - 19.4) <= 0.1 && std::abs(s041 - 27.5) <= 0.1;
        return Outcome{ok, fmt("R=0.54 -> %.3f%% (19.4 +/- 0.1), R=0.41 -> %.3f%% (27.5 +/- 0.1)", s054, s041)};
    });

    criterion(3, "Single-photon power window", 0.1, [] {
        const double ql1 = 1.0 / (1.0 / 1e5 + 1.0 / 2e5), ql2 = 1.0 / (1.0 / 1e6 + 1.0 / 2e5);
        const double p1 = single_photon_power(ql1, 1e5, 1, 6e9);
        const double p2 = single_photon_power(ql2, 1e6, 1, 6e9);
        const bool ok = std::abs(p1 + 144.7) <= 0.05 && std::abs(p2 + 152.7) <= 0.05 && std::abs(p1 + 144.0) <= 1.0 &&
                        std::abs(p2 + 152.0) <= 1.0;
        return Outcome{ok, fmt("Q_i=1e5 -> %.2f dBm, Q_i=1e6 -> %.2f dBm", p1, p2)};
    });

    criterion(4, "Power-to-photon span at 75 dB", 0.1, [] {
        const double ql = 1.0 / (1.0 / 1e5 + 1.0 / 2e5);
        const double top = photon_number(dbm_to_watt(-20.0 - 75.0), ql, 1e5, 1, 6e9);
        const double bottom = photon_number(dbm_to_watt(-65.0 - 75.0), ql, 1e5, 1, 6e9);
        auto within = [](double v, double ref) { return v >= ref / 1.5 && v <= ref * 1.5; };
        return Outcome{within(top, 9.4e4) && within(bottom, 3.0),
                       fmt("-20 dBm -> %.3g, -65 dBm -> %.3g photons", top, bottom)};
    });

    criterion(5, "Spurious-harmonic displacement", 1.0, [] {
        const double closed = spurious_ratios(0.54, 1)[0];
        DesignTarget t;
        t.fundamental_frequency_hz = 6e9;
        const std::vector<LineParams> lines{LineParams::from(50.0, 5.5), LineParams::from(50.0 / 0.54, 5.5)};
        const auto f = resonance_frequencies(to_resonator(synthesize_design(t, lines)), 2, 0.0);
        const double scanned = f[1] / f[0];
        const std::vector<LineParams> uni{LineParams::from(50.0, 5.5)};
        const auto fu = resonance_frequencies(to_resonator(synthesize_design(t, uni)), 2, 0.0);
        const double uir_closed = spurious_ratios(1.0, 1)[0];
        const double uir_scan = fu[1] / fu[0];
        bool above = true;
        for (int i = 1; i <= 99; ++i) above = above && spurious_ratios(i / 100.0, 1)[0] > 3.0;
        const bool ok = std::abs(closed - 3.9604) <= 1e-3 && std::abs(scanned - 3.9604) <= 1e-3 &&
                        std::abs(uir_closed - 3.0) <= 1e-12 && std::abs(uir_scan - 3.0) <= 1e-9 && above;
        return Outcome{ok, fmt("R=0.54 closed %.6f, scan %.6f (target 3.9604 +/- 1e-3); R=1 closed %.12f, ", closed,
                               scanned, uir_closed) +
                               fmt("scan %.12f; >3 on 99-point grid: %s", uir_scan) + (above ? "yes" : "no")};
    });

    criterion(6, "Fit round trip, noiseless (200 traces)", 30.0, [] {
        std::mt19937_64 rng(20240601);
        int ok = 0;
        double worst_qi = 0, worst_qc = 0, worst_f = 0;
        for (int k = 0; k < 200; ++k) {
            const NotchParams p = random_notch(rng);
            try {
                const FitResult r = fit_notch(trace_for(p));
                const double eqi = std::abs(r.q_internal / true_qi(p) - 1.0);
                const double eqc = std::abs(r.q_coupling_mag / p.q_coupling_mag - 1.0);
                const double ef = std::abs(r.f_r / p.f_r - 1.0);
                worst_qi = std::max(worst_qi, eqi), worst_qc = std::max(worst_qc, eqc), worst_f = std::max(worst_f, ef);
                if (eqi <= 0.01 && eqc <= 0.01 && ef <= 1e-6) ++ok;
            } catch (const Error&) {
            }
        }
        return Outcome{ok == 200, fmt("%g/200 within tolerance; worst Q_i %.2e, |Q_c| %.2e, f_r %.2e", ok, worst_qi,
                                      worst_qc, worst_f)};
    });

    criterion(7, "Fit round trip, 40 dB SNR (200 traces)", 60.0, [] {
        std::mt19937_64 rng(20240602);
        std::vector<double> err;
        int failed = 0;
        for (int k = 0; k < 200; ++k) {
            const NotchParams p = random_notch(rng);
            S21Trace t = trace_for(p);
            auto noise = derived_rng(7, static_cast<std::uint64_t>(k));
            add_complex_noise(t, 40.0, noise);
            try {
                err.push_back(std::abs(fit_notch(t).q_internal / true_qi(p) - 1.0));
            } catch (const Error&) {
                ++failed;
                err.push_back(std::numeric_limits<double>::infinity());
            }
        }
        const double med = percentile(err, 0.5), p95 = percentile(err, 0.95);
        return Outcome{med < 0.02 && p95 < 0.08,
                       fmt("median %.3f%%, p95 %.3f%%, failed fits %g", 100 * med, 100 * p95, failed)};
    });

    criterion(8, "Simulator physics properties", 30.0, [] {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst_det = 0, worst_unit = 0;
        for (int k = 0; k < 1000; ++k) {
            const double f = 2e9 + 8e9 * u(rng);
            ResonatorSpec r;
            const int nseg = 1 + static_cast<int>(2 * u(rng));
            for (int s = 0; s < nseg; ++s) r.segments.push_back({LineParams::from(30 + 90 * u(rng), 5.5), 1000 + 3000 * u(rng)});
            r.coupling_cap_ff = 0.2 + 10 * u(rng);
            r.termination = u(rng) < 0.5 ? Termination::short_circuit : Termination::open_circuit;
            const Feedline feed{LineParams::from(40 + 20 * u(rng), 5.5), 2000 + 4000 * u(rng)};
            const TappedResonator tr{r, feed.length_um * u(rng)};
            const TwoPortAbcd m = chip_abcd(feed, std::span<const TappedResonator>(&tr, 1), f);
            worst_det = std::max(worst_det, std::abs(m.determinant() - 1.0));
            const SParams s = to_sparams(m);
            worst_unit = std::max(worst_unit, std::abs(std::norm(s.s11) + std::norm(s.s21) - 1.0));
        }
        // notch depth: min |S21| = Q_c / (Q_i + Q_c)
        ResonatorSpec sir;
        sir.segments = {{cpw_params({20.0, 10.0}, {}), 2128.0}, {cpw_params({4.0, 18.0}, {}), 2151.0}};
        sir.coupling_cap_ff = 0.8;
        const double qc = coupling_q_from_cap(0.8, sir);
        double worst_depth = 0;
        for (double ratio : {0.3, 1.0, 3.0, 10.0}) {
            ResonatorSpec r = sir;
            r.internal_q = ratio * qc;
            const auto grid = default_grid(r, 20001, 2.0);
            const auto t = notch_sweep(r, grid);
            double mn = 1e300;
            for (const auto& z : t.s21) mn = std::min(mn, std::abs(z));
            worst_depth = std::max(worst_depth, std::abs(mn - 1.0 / (1.0 + ratio)));
        }
        return Outcome{worst_det < 1e-9 && worst_unit < 1e-9 && worst_depth < 1e-3,
                       fmt("max |AD-BC-1| %.1e, max unitarity error %.1e, max depth error %.1e", worst_det, worst_unit,
                           worst_depth)};
    });

    criterion(9, "End-to-end power-sweep pipeline", 120.0, [] {
        const fs::path dir = fs::path(CPWRES_TEST_TMP) / "acceptance_pipeline";
        fs::remove_all(dir);
        std::ostringstream out, err;
        const std::string traces = (dir / "traces").string();
        if (cli::run({"synth-sweep", "--out-dir", traces, "--attenuation-db", "75", "--snr-db", "40", "--seed", "42",
                      "--truth", (dir / "truth.csv").string()},
                     out, err) != 0)
            return Outcome{false, "synth-sweep failed: " + err.str()};
        std::vector<std::string> fit_args{"fit", "--attenuation-db", "75"};
        for (const auto& e : fs::directory_iterator(traces)) fit_args.push_back(e.path().string());
        std::ostringstream fit_out;
        if (cli::run(fit_args, fit_out, err) != 0) return Outcome{false, "fit failed: " + err.str()};
        int fit_ok = 0;
        for (const auto& row : csv_rows(fit_out.str())) fit_ok += row.size() > 1 && row[1] == "ok";
        std::ostringstream sweep_out;
        if (cli::run({"sweep", traces, "--attenuation-db", "75"}, sweep_out, err) != 0)
            return Outcome{false, "sweep failed: " + err.str()};

        const auto rows = csv_rows(sweep_out.str());
        LossModelParams params;
        std::vector<double> e;
        double n_lo = 1e300, n_hi = 0;
        for (const auto& row : rows) {
            const double n = std::stod(row[3]), qi = std::stod(row[4]);
            params.frequency_hz = std::stod(row[7]);
            e.push_back(std::abs(qi / qi_of_photon_number(params, n) - 1.0));
            n_lo = std::min(n_lo, n), n_hi = std::max(n_hi, n);
        }
        if (e.empty()) return Outcome{false, "no sweep rows"};
        const double med = percentile(e, 0.5);
        return Outcome{rows.size() == 10 && fit_ok == 10 && med < 0.03,
                       fmt("%g rows, median Q_i error %.3f%%, max %.3f%%, ", static_cast<double>(rows.size()),
                           100 * med, 100 * percentile(e, 1.0)) +
                           fmt("<n> from %.3g to %.3g", n_lo, n_hi)};
    });

    criterion(10, "Reference design consistency (R = 0.54 rows)", 1.0, [] {
        struct Row {
            const char* name;
            double l_short, l_coupled;
        };
        const Row rows[] = {{"I/SIR1", 2151, 2128}, {"I/SIR2", 2114, 2092}, {"I/SIR3", 2083, 2060},
                            {"I/SIR4", 2048, 2027}, {"I/SIR5", 2018, 1995}, {"I/SIR6", 1984, 1963},
                            {"I/SIR7", 1956, 1933}, {"I/SIR8", 1929, 1905}, {"II/SIR4", 2083, 2060},
                            {"II/SIR5", 2018, 1995}, {"II/SIR6", 1984, 1963}};
        const SubstrateSpec sub{};
        const std::vector<LineParams> lines{cpw_params({20.0, 10.0}, sub), cpw_params({4.0, 18.0}, sub)};
        double worst = 0;
        std::string worst_name;
        for (const auto& r : rows) {
            ResonatorSpec tab;
            tab.segments = {{lines[0], r.l_coupled}, {lines[1], r.l_short}};
            tab.coupling_cap_ff = 0.8;
            DesignTarget t;
            t.fundamental_frequency_hz = fundamental_frequency(tab, 0.0);
            t.coupling_cap_ff = 0.8;
            const auto d = synthesize_design(t, lines);
            const double dev = std::max(std::abs(d.segments[0].length_um / r.l_coupled - 1.0),
                                        std::abs(d.segments[1].length_um / r.l_short - 1.0));
            if (dev > worst) worst = dev, worst_name = r.name;
        }
        // nominal band example: 6.0 GHz, equal eps_eff, no caps
        DesignTarget t6;
        t6.fundamental_frequency_hz = 6.0e9;
        const std::vector<LineParams> nominal{LineParams::from(50.5, 5.5), LineParams::from(50.5 / 0.54, 5.5)};
        const auto d6 = synthesize_design(t6, nominal);
        const double dev6 = std::max(std::abs(d6.segments[0].length_um / 2128.0 - 1.0),
                                     std::abs(d6.segments[1].length_um / 2151.0 - 1.0));
        return Outcome{worst <= 0.03 && dev6 <= 0.03,
                       fmt("11 rows, worst deviation %.2f%% (", 100 * worst) + worst_name +
                           fmt("); 6.0 GHz nominal %.1f um vs SIR1, deviation %.2f%%", d6.segments[0].length_um,
                               100 * dev6)};
    });

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
