#pragma once

// Command-line front end. run() is callable in-process; tools/cpwres.cpp is a
// thin main() around it.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cpwres/cpw_geometry.hpp"
#include "cpwres/error.hpp"
#include "cpwres/loss_models.hpp"
#include "cpwres/manifest.hpp"
#include "cpwres/network_sim.hpp"
#include "cpwres/photon_number.hpp"
#include "cpwres/resonance_fit.hpp"
#include "cpwres/sir_solver.hpp"
#include "cpwres/trace_io.hpp"

#ifndef CPWRES_DEFAULT_CONFIG_DIR
#define CPWRES_DEFAULT_CONFIG_DIR ""
#endif

namespace cpwres::cli {

namespace fs = std::filesystem;

enum ExitCode : int { ok = 0, failure = 1, validation = 2, infeasible = 3, io = 4 };

inline int exit_code(const Error& e) {
    switch (e.kind()) {
        case Error::Kind::validation: return validation;
        case Error::Kind::infeasible: return infeasible;
        case Error::Kind::io: return io;
        case Error::Kind::numerical: return failure;
    }
    return failure;
}

inline constexpr const char* kConfigDirEnv = "CPWRES_CONFIG_DIR";

/// Existing paths are used as given; otherwise relative names are looked up in
/// $CPWRES_CONFIG_DIR, then in the bundled manifest directory.
inline fs::path resolve_config(const fs::path& p) {
    if (fs::exists(p) || p.is_absolute()) return p;
    if (const char* env = std::getenv(kConfigDirEnv); env && *env) {
        const fs::path cand = fs::path(env) / p;
        if (fs::exists(cand)) return cand;
    }
    const fs::path bundled = fs::path(CPWRES_DEFAULT_CONFIG_DIR) / p;
    if (!bundled.parent_path().empty() && fs::exists(bundled)) return bundled;
    return p;
}

inline std::string num(double v) { return detail::fmt17(v); }

inline std::string short_num(double v, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

inline void write_trace(const S21Trace& t, const fs::path& path) {
    if (detail::lower(path.extension().string()) == ".s2p") write_touchstone(t, path);
    else write_csv_trace(t, path);
}

inline CpwCrossSection default_feedline_geometry(const SubstrateSpec& sub, double gap_um = 10.0) {
    return {solve_center_width(kReferenceImpedance, gap_um, sub), gap_um, 0.0};
}

// impedance -----------------------------------------------------------------

struct ImpedanceArgs {
    double w = 0.0, g = 0.0, er = 10.0, t = 0.0;
    std::optional<double> z0;
};

inline int cmd_impedance(const ImpedanceArgs& a, std::ostream& out) {
    SubstrateSpec sub;
    sub.relative_permittivity = a.er;
    validate(sub);
    CpwCrossSection xs{a.w, a.g, a.t};
    if (a.z0) xs.center_width_um = solve_center_width(*a.z0, a.g, sub);
    const LineParams lp = cpw_params(xs, sub);
    out << "center_width_um=" << short_num(xs.center_width_um, 8) << '\n'
        << "gap_um=" << short_num(xs.gap_um) << '\n'
        << "relative_permittivity=" << short_num(sub.relative_permittivity) << '\n'
        << "modulus_k=" << short_num(xs.modulus()) << '\n'
        << "eps_eff=" << short_num(lp.eps_eff) << '\n'
        << "z0_ohm=" << short_num(lp.z0) << '\n'
        << "phase_velocity_m_s=" << short_num(lp.phase_velocity) << '\n';
    return ok;
}

// design ----------------------------------------------------------------------

struct DesignArgs {
    std::optional<double> ratio;
    double frequency_hz = 0.0;
    double er = 10.0;
    double low_w = 20.0, low_g = 10.0, high_g = 18.0;
    double coupling_cap_ff = 0.8;
    std::optional<double> theta1;
    std::string termination = "short";
    std::string name;
    std::optional<double> internal_q;
    std::string manifest_in;
    std::string out_path;
};

struct DesignRow {
    std::string name;
    std::string type;
    double ratio = 1.0;
    double total_length_um = 0.0;
    double shortening = 0.0;
};

inline Termination parse_termination(const std::string& s) {
    if (s == "short") return Termination::short_circuit;
    if (s == "open") return Termination::open_circuit;
    throw DomainError("termination must be 'short' or 'open', got '" + s + "'");
}

/// Fill in lengths for a manifest entry that carries a target frequency.
inline DesignRow synthesize_entry(ManifestResonator& r, const SubstrateSpec& sub,
                                  std::optional<double> theta1 = std::nullopt) {
    if (!r.target_frequency_hz) throw DomainError("design: " + r.name + " has no target frequency");
    std::vector<LineParams> lines;
    for (const auto& s : r.segments) lines.push_back(cpw_params(s.cross_section, sub));
    DesignTarget target;
    target.fundamental_frequency_hz = *r.target_frequency_hz;
    target.termination = r.termination;
    target.coupling_cap_ff = r.coupling_cap_ff;
    if (theta1) {
        target.split = DesignTarget::Split::explicit_theta1;
        target.theta1 = *theta1;
    }
    const SirDesign d = synthesize_design(target, lines, {});
    for (std::size_t i = 0; i < r.segments.size(); ++i) r.segments[i].length_um = d.segments[i].length_um;
    return {r.name, d.is_uniform() ? "UIR" : "SIR", d.impedance_ratio, to_resonator(d).total_length_um(),
            d.shortening()};
}

inline int cmd_design(const DesignArgs& a, std::ostream& out, std::ostream& err) {
    SubstrateSpec sub;
    sub.relative_permittivity = a.er;
    validate(sub);

    DesignManifest m;
    std::vector<DesignRow> rows;
    if (!a.manifest_in.empty()) {
        m = read_manifest(resolve_config(a.manifest_in));
        for (auto& r : m.resonators) {
            if (r.target_frequency_hz) {
                rows.push_back(synthesize_entry(r, m.substrate));
            } else {
                const ResonatorSpec spec = to_resonator_spec(r, m.substrate);
                double ratio = 1.0;
                if (spec.segments.size() == 2) ratio = spec.segments[0].line.z0 / spec.segments[1].line.z0;
                rows.push_back({r.name, r.type == ManifestResonator::Type::sir ? "SIR" : "UIR", ratio,
                                spec.total_length_um(), std::numeric_limits<double>::quiet_NaN()});
            }
        }
    } else {
        if (!a.ratio) throw DomainError("design: --R or --manifest is required");
        const double ratio = *a.ratio;
        if (!(ratio > 0.0)) throw DomainError("design: impedance ratio R must be positive");
        if (!(a.frequency_hz > 0.0)) throw DomainError("design: --f must be a positive frequency in Hz");
        if (ratio >= 1.0 && std::abs(ratio - 1.0) > 1e-12)
            err << "warning: R = " << ratio << " >= 1 lengthens the resonator instead of shortening it\n";

        m.substrate = sub;
        m.feedline = default_feedline_geometry(sub);
        const CpwCrossSection low{a.low_w, a.low_g, 0.0};
        validate(low);
        ManifestResonator r;
        r.termination = parse_termination(a.termination);
        r.coupling_cap_ff = a.coupling_cap_ff;
        r.target_frequency_hz = a.frequency_hz;
        r.internal_q = a.internal_q;
        if (std::abs(ratio - 1.0) <= 1e-12) {
            r.type = ManifestResonator::Type::uir;
            r.segments.push_back({low, 0.0});
        } else {
            r.type = ManifestResonator::Type::sir;
            const double z_low = cpw_params(low, sub).z0;
            const double w_high = solve_center_width(z_low / ratio, a.high_g, sub);
            r.segments.push_back({low, 0.0});
            r.segments.push_back({{w_high, a.high_g, 0.0}, 0.0});
        }
        r.name = a.name.empty() ? (r.type == ManifestResonator::Type::uir ? "UIR1" : "SIR1") : a.name;
        rows.push_back(synthesize_entry(r, sub, a.theta1));
        m.resonators.push_back(std::move(r));
    }

    out << "name,type,impedance_ratio,total_length_um,shortening_percent\n";
    for (const auto& row : rows)
        out << row.name << ',' << row.type << ',' << short_num(row.ratio) << ',' << short_num(row.total_length_um, 8)
            << ',' << (std::isnan(row.shortening) ? std::string() : short_num(100.0 * row.shortening, 4)) << '\n';
    if (!a.out_path.empty()) write_manifest(m, a.out_path);
    return ok;
}

// simulate ---------------------------------------------------------------------

struct SimulateArgs {
    std::string manifest;
    std::optional<double> start_hz, stop_hz;
    std::size_t points = 1601;
    std::size_t window_points = 401;
    double window_linewidths = 10.0;
    std::string out_path;
    std::string zoom_dir;
    std::string zoom_format = "csv";
};

inline std::vector<double> chip_grid(const SimulateArgs& a, const std::vector<ResonanceEstimate>& est) {
    double lo = 4e9, hi = 8e9;
    if (!est.empty()) {
        lo = hi = est.front().f_r;
        for (const auto& e : est) lo = std::min(lo, e.f_r), hi = std::max(hi, e.f_r);
        const double pad = std::max(0.02 * lo, 20.0 * est.front().linewidth());
        lo -= pad;
        hi += pad;
    }
    if (a.start_hz) lo = *a.start_hz;
    if (a.stop_hz) hi = *a.stop_hz;
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("simulate: need 0 < start < stop");
    if (a.points < 2) throw DomainError("simulate: --points must be at least 2");
    std::vector<double> grid = linear_grid(lo, hi, a.points);
    for (const auto& e : est) {
        const double half = a.window_linewidths * e.linewidth();
        if (a.window_points < 2) break;
        for (double f : linear_grid(e.f_r - half, e.f_r + half, a.window_points))
            if (f >= lo && f <= hi) grid.push_back(f);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(), [](double x, double y) { return y - x <= 1e-9 * x; }),
               grid.end());
    return grid;
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    const DesignManifest m = read_manifest(resolve_config(a.manifest));
    const Chip chip = to_chip(m);
    std::vector<ResonanceEstimate> est;
    for (const auto& r : chip.resonators) est.push_back(estimate_resonance(r.resonator, chip.feedline.line.z0));

    const auto grid = chip_grid(a, est);
    const S21Trace trace = s21_sweep(chip.feedline, chip.resonators, grid);
    if (auto it = trace.metadata.find("overlap"); it != trace.metadata.end())
        err << "warning: overlapping resonances (indices " << it->second << ")\n";

    if (a.out_path.empty()) write_csv_trace(trace, out);
    else write_trace(trace, a.out_path);

    if (!a.zoom_dir.empty()) {
        const fs::path dir(a.zoom_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create directory '" + dir.string() + "'");
        const std::string ext = a.zoom_format == "s2p" ? ".s2p" : ".csv";
        for (std::size_t i = 0; i < est.size(); ++i) {
            const double half = a.window_linewidths * est[i].linewidth();
            const auto zgrid = linear_grid(est[i].f_r - half, est[i].f_r + half, 1601);
            write_trace(s21_sweep(chip.feedline, chip.resonators, zgrid), dir / (chip.names[i] + ext));
        }
    }
    for (std::size_t i = 0; i < est.size(); ++i)
        err << chip.names[i] << ": f_r=" << short_num(est[i].f_r, 10) << " Hz, Q_c=" << short_num(est[i].q_coupling)
            << ", Q_L=" << short_num(est[i].q_loaded) << '\n';
    return ok;
}

// fit --------------------------------------------------------------------------

struct FitArgs {
    std::vector<std::string> files;
    double attenuation_db = 0.0;
    int harmonic = 1;
    std::string out_path;
};

inline const char* kFitHeader =
    "trace_id,status,f_r_hz,q_loaded,q_coupling_mag,mismatch_angle_rad,q_internal,photon_number,rms_residual\n";

inline int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    if (a.files.empty()) throw DomainError("fit: no trace files given");
    if (a.attenuation_db < 0.0) throw DomainError("fit: attenuation must be non-negative");
    std::ostringstream csv;
    csv << kFitHeader;
    std::size_t warnings = 0;
    for (const auto& file : a.files) {
        const S21Trace t = load_trace(file);
        const std::string id = trace_id(t, 0);
        try {
            const FitResult r = fit_notch(t);
            std::string n;
            if (t.incident_power_dbm) {
                try {
                    n = num(photon_number(dbm_to_watt(*t.incident_power_dbm - a.attenuation_db), r.q_loaded,
                                          r.q_internal, a.harmonic, r.f_r));
                } catch (const InconsistentQ& e) {
                    ++warnings;
                    err << "warning: " << id << ": " << e.what() << '\n';
                }
            }
            csv << id << ",ok," << num(r.f_r) << ',' << num(r.q_loaded) << ',' << num(r.q_coupling_mag) << ','
                << num(r.mismatch_angle) << ',' << num(r.q_internal) << ',' << n << ',' << num(r.rms_residual) << '\n';
        } catch (const NoResonance& e) {
            ++warnings;
            err << "warning: " << id << ": " << e.what() << '\n';
            csv << id << ",no_resonance,,,,,,,\n";
        } catch (const Error& e) {
            if (e.kind() == Error::Kind::io) throw;
            ++warnings;
            err << "warning: " << id << ": " << e.what() << '\n';
            csv << id << ",failed,,,,,,,\n";
        }
    }
    if (a.out_path.empty()) {
        out << csv.str();
    } else {
        auto os = detail::open_for_write(a.out_path);
        os << csv.str();
        if (!os) throw IoError("write failed: " + a.out_path);
    }
    err << "fitted " << a.files.size() << " trace(s), " << warnings << " warning(s)\n";
    return ok;
}

// sweep ------------------------------------------------------------------------

struct SweepArgs {
    std::string input;
    double attenuation_db = 0.0;
    int harmonic = 1;
    std::string out_path;
};

inline std::vector<fs::path> trace_files(const fs::path& input) {
    if (!fs::exists(input)) throw IoError("no such file or directory: '" + input.string() + "'");
    if (!fs::is_directory(input)) return {input};
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(input))
        if (e.is_regular_file() && is_trace_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

inline int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<S21Trace> traces;
    for (const auto& p : trace_files(a.input)) traces.push_back(load_trace(p));
    const PowerSweepResult res = power_sweep(traces, a.attenuation_db, a.harmonic);
    for (const auto& f : res.failures) err << "warning: skipped " << f.trace_id << ": " << f.message << '\n';

    std::ostringstream csv;
    csv << "trace_id,source_power_dbm,incident_power_dbm,photon_number,q_internal,q_loaded,q_coupling_mag,f_r_hz\n";
    for (const auto& p : res.points)
        csv << p.trace_id << ',' << num(p.source_power_dbm) << ',' << num(p.incident_power_dbm) << ','
            << num(p.photon_number) << ',' << num(p.fit.q_internal) << ',' << num(p.fit.q_loaded) << ','
            << num(p.fit.q_coupling_mag) << ',' << num(p.fit.f_r) << '\n';
    if (a.out_path.empty()) {
        out << csv.str();
    } else {
        auto os = detail::open_for_write(a.out_path);
        os << csv.str();
        if (!os) throw IoError("write failed: " + a.out_path);
    }
    err << res.points.size() << " point(s), " << res.failures.size() << " skipped\n";
    return ok;
}

// synth-sweep ------------------------------------------------------------------

struct SynthArgs {
    std::string out_dir;
    double power_start_dbm = -20.0, power_stop_dbm = -65.0;
    std::size_t power_count = 10;
    double attenuation_db = 75.0;
    double snr_db = 40.0;
    std::uint64_t seed = 1;
    LossModelParams loss;
    std::string manifest;
    std::string resonator;
    std::string truth_path;
};

/// Design-I SIR1 as tabulated: 20/10 um at the coupled end, 4/18 um at the short.
inline ResonatorSpec reference_sir(const SubstrateSpec& sub = {}) {
    ResonatorSpec r;
    r.segments = {{cpw_params({20.0, 10.0, 0.0}, sub), 2128.0}, {cpw_params({4.0, 18.0, 0.0}, sub), 2151.0}};
    r.coupling_cap_ff = 0.8;
    return r;
}

inline int cmd_synth_sweep(const SynthArgs& a, std::ostream& out, std::ostream& err) {
    if (a.out_dir.empty()) throw DomainError("synth-sweep: --out-dir is required");
    if (a.power_count < 1) throw DomainError("synth-sweep: --count must be at least 1");
    ResonatorSpec res = reference_sir();
    if (!a.manifest.empty()) {
        const DesignManifest m = read_manifest(resolve_config(a.manifest));
        const auto it = std::find_if(m.resonators.begin(), m.resonators.end(),
                                     [&](const ManifestResonator& r) { return a.resonator.empty() || r.name == a.resonator; });
        if (it == m.resonators.end()) throw DomainError("synth-sweep: no resonator named '" + a.resonator + "'");
        res = to_resonator_spec(*it, m.substrate);
    }
    LossModelParams loss = a.loss;
    ResonatorSpec lossless = res;
    lossless.internal_q = std::numeric_limits<double>::infinity();
    loss.frequency_hz = fundamental_frequency(lossless, 0.0);

    std::vector<double> powers;
    for (std::size_t i = 0; i < a.power_count; ++i)
        powers.push_back(a.power_count == 1 ? a.power_start_dbm
                                            : a.power_start_dbm + (a.power_stop_dbm - a.power_start_dbm) *
                                                                      static_cast<double>(i) /
                                                                      static_cast<double>(a.power_count - 1));
    const auto traces = synthesize_power_sweep(loss, res, powers, a.attenuation_db, a.snr_db, a.seed);

    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "'");
    std::ostringstream truth;
    truth << "trace_id,source_power_dbm,photon_number,q_internal\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        std::ostringstream name;
        name << 'p' << std::setw(3) << std::setfill('0') << i;
        write_csv_trace(traces[i], dir / (name.str() + ".csv"));
        truth << name.str() << ',' << num(powers[i]) << ',' << traces[i].metadata.at("true_photon_number") << ','
              << traces[i].metadata.at("true_q_internal") << '\n';
    }
    if (!a.truth_path.empty()) {
        auto os = detail::open_for_write(a.truth_path);
        os << truth.str();
    } else {
        out << truth.str();
    }
    err << "wrote " << traces.size() << " trace(s) to " << dir.string() << '\n';
    return ok;
}

// dispatch ---------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"cpwres: CPW resonator design, simulation and Q analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cpwres 0.1.0");

    ImpedanceArgs imp;
    auto* c_imp = app.add_subcommand("impedance", "Characteristic impedance of a CPW cross-section");
    c_imp->add_option("--w", imp.w, "center conductor width (um)");
    c_imp->add_option("--g", imp.g, "gap width (um)")->required();
    c_imp->add_option("--er", imp.er, "substrate relative permittivity")->capture_default_str();
    c_imp->add_option("--t", imp.t, "film thickness (um), informational");
    c_imp->add_option("--z0", imp.z0, "solve the center width for this impedance instead");

    DesignArgs des;
    auto* c_des = app.add_subcommand("design", "Synthesize SIR/UIR lengths for a target frequency");
    c_des->add_option("--R", des.ratio, "impedance ratio Z(coupled end)/Z(shorted end)");
    c_des->add_option("--f", des.frequency_hz, "target fundamental frequency (Hz)");
    c_des->add_option("--er", des.er, "substrate relative permittivity")->capture_default_str();
    c_des->add_option("--low-w", des.low_w, "low-impedance segment width (um)")->capture_default_str();
    c_des->add_option("--low-g", des.low_g, "low-impedance segment gap (um)")->capture_default_str();
    c_des->add_option("--high-g", des.high_g, "high-impedance segment gap (um)")->capture_default_str();
    c_des->add_option("--coupling-cap", des.coupling_cap_ff, "coupling capacitance (fF)")->capture_default_str();
    c_des->add_option("--theta1", des.theta1, "explicit coupled-end electrical length (rad)");
    c_des->add_option("--termination", des.termination, "short|open")->capture_default_str();
    c_des->add_option("--name", des.name, "resonator name");
    c_des->add_option("--internal-q", des.internal_q, "internal Q stored in the manifest");
    c_des->add_option("--manifest", des.manifest_in, "synthesize entries of an existing manifest");
    c_des->add_option("-o,--out", des.out_path, "manifest output path");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Full-chip S21 of a design manifest");
    c_sim->add_option("manifest", sim.manifest, "design manifest")->required();
    c_sim->add_option("--start", sim.start_hz, "grid start (Hz)");
    c_sim->add_option("--stop", sim.stop_hz, "grid stop (Hz)");
    c_sim->add_option("--points", sim.points, "uniform grid points")->capture_default_str();
    c_sim->add_option("--window-points", sim.window_points, "extra points around each resonance (0: none)")
        ->capture_default_str();
    c_sim->add_option("--window-linewidths", sim.window_linewidths, "half width of the dense windows")
        ->capture_default_str();
    c_sim->add_option("-o,--out", sim.out_path, "output trace (.csv or .s2p); stdout CSV if omitted");
    c_sim->add_option("--zoom-dir", sim.zoom_dir, "write one zoomed trace per resonator here");
    c_sim->add_option("--zoom-format", sim.zoom_format, "csv|s2p")->check(CLI::IsMember({"csv", "s2p"}));

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Notch fit of trace files");
    c_fit->add_option("files", fit.files, "trace files (.csv, .s1p, .s2p)")->required();
    c_fit->add_option("--attenuation-db", fit.attenuation_db, "input line attenuation (dB)");
    c_fit->add_option("--harmonic", fit.harmonic, "harmonic index")->capture_default_str();
    c_fit->add_option("-o,--out", fit.out_path, "results CSV; stdout if omitted");

    SweepArgs swp;
    auto* c_swp = app.add_subcommand("sweep", "Q_i versus photon number over power-tagged traces");
    c_swp->add_option("input", swp.input, "trace directory or single file")->required();
    c_swp->add_option("--attenuation-db", swp.attenuation_db, "input line attenuation (dB)")->required();
    c_swp->add_option("--harmonic", swp.harmonic, "harmonic index")->capture_default_str();
    c_swp->add_option("-o,--out", swp.out_path, "output CSV; stdout if omitted");

    SynthArgs syn;
    auto* c_syn = app.add_subcommand("synth-sweep", "Generate a synthetic power sweep with TLS-like loss");
    c_syn->add_option("--out-dir", syn.out_dir, "output directory")->required();
    c_syn->add_option("--power-start", syn.power_start_dbm, "first source power (dBm)")->capture_default_str();
    c_syn->add_option("--power-stop", syn.power_stop_dbm, "last source power (dBm)")->capture_default_str();
    c_syn->add_option("--count", syn.power_count, "number of powers")->capture_default_str();
    c_syn->add_option("--attenuation-db", syn.attenuation_db, "input line attenuation (dB)")->capture_default_str();
    c_syn->add_option("--snr-db", syn.snr_db, "noise SNR (dB); inf for noiseless")->capture_default_str();
    c_syn->add_option("--seed", syn.seed, "RNG seed")->capture_default_str();
    c_syn->add_option("--tls", syn.loss.tls_loss_tangent, "F*delta0")->capture_default_str();
    c_syn->add_option("--nc", syn.loss.critical_photon_number, "critical photon number")->capture_default_str();
    c_syn->add_option("--beta", syn.loss.saturation_exponent, "saturation exponent")->capture_default_str();
    c_syn->add_option("--q-other", syn.loss.power_independent_q, "power-independent Q")->capture_default_str();
    c_syn->add_option("--temperature", syn.loss.temperature_k, "temperature (K)")->capture_default_str();
    c_syn->add_option("--manifest", syn.manifest, "take the resonator from this manifest");
    c_syn->add_option("--resonator", syn.resonator, "resonator name within the manifest");
    c_syn->add_option("--truth", syn.truth_path, "write the programmed curve here; stdout if omitted");

    std::vector<const char*> argv{"cpwres"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : validation;
    }

    try {
        if (*c_imp) {
            if (!imp.z0 && c_imp->count("--w") == 0) throw DomainError("impedance: --w or --z0 is required");
            return cmd_impedance(imp, out);
        }
        if (*c_des) return cmd_design(des, out, err);
        if (*c_sim) return cmd_simulate(sim, out, err);
        if (*c_fit) return cmd_fit(fit, out, err);
        if (*c_swp) return cmd_sweep(swp, out, err);
        if (*c_syn) return cmd_synth_sweep(syn, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return io;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
    return failure;
}

}  // namespace cpwres::cli
