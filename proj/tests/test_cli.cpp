#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cpwres/cli.hpp"

using namespace cpwres;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path tmp(const std::string& sub) {
    const fs::path p = fs::path(CPWRES_TEST_TMP) / "cli" / sub;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

double value_of(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + "=");
    if (pos == std::string::npos) return std::nan("");
    return std::stod(text.substr(pos + key.size() + 1));
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(CliImpedance, PrintsLineParameters) {
    auto r = invoke({"impedance", "--w", "20", "--g", "10", "--er", "10"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_of(r.out, "z0_ohm"), 51.4, 0.05);
    EXPECT_NEAR(value_of(r.out, "eps_eff"), 5.5, 1e-12);
    r = invoke({"impedance", "--w", "4", "--g", "18", "--er", "10"});
    EXPECT_NEAR(value_of(r.out, "z0_ohm"), 94.3, 0.05);
    r = invoke({"impedance", "--z0", "50", "--g", "10"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_of(r.out, "z0_ohm"), 50.0, 1e-6);
}

TEST(CliImpedance, ValidationExit) {
    auto r = invoke({"impedance", "--w", "0", "--g", "10"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("center_width"), std::string::npos);
    r = invoke({"impedance", "--w", "5", "--g", "10", "--er", "0.5"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("relative_permittivity"), std::string::npos);
    EXPECT_EQ(invoke({"impedance", "--w", "abc", "--g", "10"}).code, 2);
    EXPECT_EQ(invoke({"nonsense"}).code, 2);
}

TEST(CliDesign, ReportsShortening) {
    auto r = invoke({"design", "--R", "0.54", "--f", "6.5e9"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0][1], "SIR");
    EXPECT_NEAR(std::stod(rows[0][4]), 19.4, 0.1);

    r = invoke({"design", "--R", "0.41", "--f", "6.5e9"});
    rows = csv_rows(r.out);
    EXPECT_NEAR(std::stod(rows[0][4]), 27.5, 0.1);

    r = invoke({"design", "--R", "1", "--f", "6.5e9"});
    rows = csv_rows(r.out);
    EXPECT_EQ(rows[0][1], "UIR");
    EXPECT_NEAR(std::stod(rows[0][4]), 0.0, 1e-9);
}

TEST(CliDesign, WarningsAndErrors) {
    auto r = invoke({"design", "--R", "1.3", "--f", "6e9"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(invoke({"design", "--R", "0.01", "--f", "6e9"}).code, 3);
    EXPECT_EQ(invoke({"design", "--R", "0.54", "--f", "6e9", "--coupling-cap", "1e5"}).code, 3);
    EXPECT_EQ(invoke({"design", "--R", "-1", "--f", "6e9"}).code, 2);
    EXPECT_EQ(invoke({"design", "--R", "0.54"}).code, 2);
    EXPECT_EQ(invoke({"design", "--R", "0.54", "--f", "6e9", "-o", "/nonexistent-dir/x.manifest"}).code, 4);
}

TEST(CliDesign, ManifestInput) {
    const fs::path dir = tmp("design_in");
    DesignManifest m;
    m.feedline = cli::default_feedline_geometry({});
    ManifestResonator r;
    r.name = "X";
    r.type = ManifestResonator::Type::sir;
    r.segments = {{{20.0, 10.0, 0.0}, 1.0}, {{4.0, 18.0, 0.0}, 1.0}};
    r.coupling_cap_ff = 0.8;
    r.target_frequency_hz = 6.2e9;
    m.resonators.push_back(r);
    write_manifest(m, dir / "in.manifest");
    const auto run = invoke({"design", "--manifest", (dir / "in.manifest").string(), "-o", (dir / "out.manifest").string()});
    ASSERT_EQ(run.code, 0) << run.err;
    const auto out = read_manifest(dir / "out.manifest");
    const auto spec = to_resonator_spec(out.resonators[0], out.substrate);
    EXPECT_NEAR(fundamental_frequency(spec, 0.0), 6.2e9, 1e3);
}

TEST(CliSimulate, DesignOneHasTenDips) {
    const fs::path dir = tmp("sim1");
    const auto r = invoke({"simulate", "design1.manifest", "-o", (dir / "chip.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(find_dips(read_csv_trace(dir / "chip.csv")).size(), 10u);
}

TEST(CliSimulate, DeterministicOutput) {
    const fs::path dir = tmp("sim_det");
    ASSERT_EQ(invoke({"simulate", "design2.manifest", "-o", (dir / "a.csv").string()}).code, 0);
    ASSERT_EQ(invoke({"simulate", "design2.manifest", "-o", (dir / "b.csv").string()}).code, 0);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    ASSERT_EQ(invoke({"simulate", "design2.manifest", "-o", (dir / "a.s2p").string()}).code, 0);
    ASSERT_EQ(invoke({"simulate", "design2.manifest", "-o", (dir / "b.s2p").string()}).code, 0);
    EXPECT_EQ(slurp(dir / "a.s2p"), slurp(dir / "b.s2p"));
}

TEST(CliSimulate, EmptyManifestIsFlat) {
    const fs::path dir = tmp("sim_empty");
    DesignManifest m;
    m.feedline = cli::default_feedline_geometry({});
    write_manifest(m, dir / "empty.manifest");
    const auto r = invoke({"simulate", (dir / "empty.manifest").string(), "-o", (dir / "flat.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = read_csv_trace(dir / "flat.csv");
    EXPECT_EQ(t.size(), 1601u);
    for (const auto& z : t.s21) EXPECT_NEAR(std::abs(z), 1.0, 1e-9);
}

TEST(CliSimulate, Failures) {
    EXPECT_EQ(invoke({"simulate", "no-such.manifest"}).code, 4);
    EXPECT_EQ(invoke({"simulate", "design1.manifest", "-o", "/nonexistent-dir/chip.csv"}).code, 4);
    const fs::path dir = tmp("sim_bad");
    std::ofstream(dir / "bad.manifest") << "{\"schema_version\": 1, \"substrate\": {\"relative_permittivity\": 10}, "
                                           "\"feedline\": {\"center_width_um\": 20, \"gap_um\": 10}, \"resonators\": "
                                           "[{\"name\": \"a\", \"type\": \"UIR\", \"segments\": [{\"center_width_um\": 0, "
                                           "\"gap_um\": 10, \"length_um\": 100}], \"coupling_cap_ff\": 1}]}";
    EXPECT_EQ(invoke({"simulate", (dir / "bad.manifest").string()}).code, 2);
}

TEST(CliSimulate, ConfigDirectoryFromEnvironment) {
    const fs::path dir = tmp("envcfg");
    DesignManifest m;
    m.feedline = cli::default_feedline_geometry({});
    write_manifest(m, dir / "only-here.manifest");
    ::setenv(cli::kConfigDirEnv, dir.c_str(), 1);
    const auto r = invoke({"simulate", "only-here.manifest", "--points", "11"});
    ::unsetenv(cli::kConfigDirEnv);
    EXPECT_EQ(r.code, 0) << r.err;
}

TEST(CliFit, KnownQAndStatuses) {
    const fs::path dir = tmp("fit");
    const NotchParams p = NotchParams::from_q(6e9, 1e5, 2e5, 0.1);
    const double half = 10.0 * p.f_r / p.q_loaded;
    auto t = synthesize_notch_trace(linear_grid(p.f_r - half, p.f_r + half, 1601), p);
    t.incident_power_dbm = -60.0;
    write_csv_trace(t, dir / "known.csv");
    S21Trace flat;
    flat.frequencies = linear_grid(6e9, 6.001e9, 201);
    flat.s21.assign(201, cplx(1.0, 0.0));
    write_touchstone(flat, dir / "flat.s2p");

    const auto r = invoke({"fit", (dir / "known.csv").string(), (dir / "flat.s2p").string(), "--attenuation-db", "75"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
              "trace_id,status,f_r_hz,q_loaded,q_coupling_mag,mismatch_angle_rad,q_internal,photon_number,rms_residual");
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0][0], "known");
    EXPECT_EQ(rows[0][1], "ok");
    EXPECT_NEAR(std::stod(rows[0][6]), 1e5, 1e3);
    EXPECT_NEAR(std::stod(rows[0][7]), photon_number(dbm_to_watt(-135.0), p.q_loaded, 1e5, 1, 6e9), 1e-2);
    EXPECT_EQ(rows[1][0], "flat");
    EXPECT_EQ(rows[1][1], "no_resonance");
    EXPECT_NE(r.err.find("1 warning(s)"), std::string::npos);
}

TEST(CliFit, MalformedTouchstoneNamesLine) {
    const fs::path dir = tmp("fit_bad");
    std::ofstream(dir / "bad.s2p") << "! test\n# Hz S RI R 50\n1e9 1 0 0 0 0 0 1 0\n2e9 1 0 0 0 0 0 1 0\n3e9 1 0 oops\n";
    const auto r = invoke({"fit", (dir / "bad.s2p").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 5"), std::string::npos) << r.err;
    EXPECT_EQ(invoke({"fit", (dir / "missing.csv").string()}).code, 4);
}

TEST(CliSweep, SyntheticSweepSpansPhotonRange) {
    const fs::path dir = tmp("sweep");
    auto r = invoke({"synth-sweep", "--out-dir", (dir / "traces").string(), "--truth", (dir / "truth.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    r = invoke({"sweep", (dir / "traces").string(), "--attenuation-db", "75"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 10u);
    const double n_low = std::stod(rows.front()[3]), n_high = std::stod(rows.back()[3]);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i - 1][3]), std::stod(rows[i][3]));
    EXPECT_NEAR(n_low, 3.0, 1.5);
    // with Q_i rising towards 1e6 at high power the top end exceeds the
    // fixed-Q value of ~1e5 by the Q_L (1 - Q_L/Q_i) factor
    EXPECT_GT(n_high, 1e5);
    EXPECT_LT(n_high, 1e6);
}

TEST(CliSweep, SingleFileAndMissingPower) {
    const fs::path dir = tmp("sweep_single");
    ASSERT_EQ(invoke({"synth-sweep", "--out-dir", dir.string(), "--count", "1", "--truth", (dir / "t.txt").string()}).code, 0);
    auto r = invoke({"sweep", (dir / "p000.csv").string(), "--attenuation-db", "75"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(csv_rows(r.out).size(), 1u);

    auto t = read_csv_trace(dir / "p000.csv");
    t.incident_power_dbm.reset();
    write_csv_trace(t, dir / "nopower.csv");
    r = invoke({"sweep", dir.string(), "--attenuation-db", "75"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(csv_rows(r.out).size(), 1u);
    EXPECT_NE(r.err.find("skipped nopower"), std::string::npos);
}

TEST(CliSweep, Deterministic) {
    const fs::path dir = tmp("sweep_det");
    ASSERT_EQ(invoke({"synth-sweep", "--out-dir", (dir / "a").string(), "--seed", "9", "--truth", (dir / "ta.txt").string()}).code, 0);
    ASSERT_EQ(invoke({"synth-sweep", "--out-dir", (dir / "b").string(), "--seed", "9", "--truth", (dir / "tb.txt").string()}).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "p004.csv"), slurp(dir / "b" / "p004.csv"));
    const auto ra = invoke({"sweep", (dir / "a").string(), "--attenuation-db", "75"});
    const auto rb = invoke({"sweep", (dir / "b").string(), "--attenuation-db", "75"});
    EXPECT_EQ(ra.out, rb.out);
}

TEST(CliPipeline, DesignSimulateFitRecoversTarget) {
    const fs::path dir = tmp("pipeline");
    for (const char* f : {"5.8e9", "6.5e9", "7.2e9"}) {
        const std::string man = (dir / (std::string("d") + f + ".manifest")).string();
        ASSERT_EQ(invoke({"design", "--R", "0.54", "--f", f, "--internal-q", "3e5", "-o", man}).code, 0);
        const fs::path zoom = dir / (std::string("z") + f);
        ASSERT_EQ(invoke({"simulate", man, "-o", (dir / "chip.csv").string(), "--zoom-dir", zoom.string()}).code, 0);
        const auto r = invoke({"fit", (zoom / "SIR1.csv").string()});
        ASSERT_EQ(r.code, 0);
        const auto rows = csv_rows(r.out);
        ASSERT_EQ(rows[0][1], "ok");
        EXPECT_NEAR(std::stod(rows[0][2]), std::stod(f), 1e-3 * std::stod(f));
    }
}
