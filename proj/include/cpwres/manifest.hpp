#pragma once

// Design manifest: substrate, feedline and a list of resonators, persisted as
// versioned JSON.

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpwres/cpw_geometry.hpp"
#include "cpwres/error.hpp"
#include "cpwres/network_sim.hpp"

namespace cpwres {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr double kDefaultTapSpacingUm = 1000.0;

struct ManifestSegment {
    CpwCrossSection cross_section;
    double length_um = 0.0;
};

struct ManifestResonator {
    enum class Type { sir, uir };

    std::string name;
    Type type = Type::uir;
    Termination termination = Termination::short_circuit;
    std::vector<ManifestSegment> segments;  // coupled end first
    double coupling_cap_ff = 0.0;
    std::optional<double> target_frequency_hz;
    bool rounded_step = false;  // metadata only
    std::optional<double> internal_q;
    std::optional<double> tap_um;
};

struct DesignManifest {
    int schema_version = kManifestSchemaVersion;
    SubstrateSpec substrate;
    CpwCrossSection feedline;
    double feedline_length_um = 0.0;  // 0: one tap spacing past the last resonator
    std::vector<ManifestResonator> resonators;
};

inline ResonatorSpec to_resonator_spec(const ManifestResonator& r, const SubstrateSpec& sub) {
    ResonatorSpec spec;
    for (const auto& s : r.segments) spec.segments.push_back({cpw_params(s.cross_section, sub), s.length_um});
    spec.termination = r.termination;
    spec.coupling_cap_ff = r.coupling_cap_ff;
    if (r.internal_q) spec.internal_q = *r.internal_q;
    return spec;
}

inline void validate(const DesignManifest& m) {
    if (m.schema_version != kManifestSchemaVersion)
        throw DomainError("manifest: unsupported schema_version " + std::to_string(m.schema_version));
    validate(m.substrate);
    validate(m.feedline);
    std::set<std::string> names;
    for (const auto& r : m.resonators) {
        if (r.name.empty()) throw DomainError("manifest: resonator without a name");
        if (!names.insert(r.name).second) throw DomainError("manifest: duplicate resonator name '" + r.name + "'");
        const std::size_t expected = r.type == ManifestResonator::Type::sir ? 2 : 1;
        if (r.segments.size() != expected)
            throw DomainError("manifest: " + r.name + " needs " + std::to_string(expected) + " segment(s)");
        try {
            validate(to_resonator_spec(r, m.substrate));
        } catch (const Error& e) {
            throw DomainError("manifest: " + r.name + ": " + e.what());
        }
        if (r.target_frequency_hz && !(*r.target_frequency_hz > 0.0))
            throw DomainError("manifest: " + r.name + ": target frequency must be positive");
    }
}

struct Chip {
    Feedline feedline;
    std::vector<TappedResonator> resonators;
    std::vector<std::string> names;
};

inline Chip to_chip(const DesignManifest& m) {
    validate(m);
    Chip chip;
    chip.feedline.line = cpw_params(m.feedline, m.substrate);
    double last_tap = 0.0;
    for (std::size_t i = 0; i < m.resonators.size(); ++i) {
        const auto& r = m.resonators[i];
        const double tap = r.tap_um.value_or(kDefaultTapSpacingUm * static_cast<double>(i + 1));
        last_tap = std::max(last_tap, tap);
        chip.resonators.push_back({to_resonator_spec(r, m.substrate), tap});
        chip.names.push_back(r.name);
    }
    chip.feedline.length_um = m.feedline_length_um > 0.0 ? m.feedline_length_um : last_tap + kDefaultTapSpacingUm;
    return chip;
}

// JSON ---------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const CpwCrossSection& xs, std::optional<double> length = {}) {
    nlohmann::ordered_json j;
    j["center_width_um"] = xs.center_width_um;
    j["gap_um"] = xs.gap_um;
    if (xs.film_thickness_um != 0.0) j["film_thickness_um"] = xs.film_thickness_um;
    if (length) j["length_um"] = *length;
    return j;
}

inline nlohmann::ordered_json to_json(const DesignManifest& m) {
    nlohmann::ordered_json j;
    j["schema_version"] = m.schema_version;
    j["substrate"] = {{"relative_permittivity", m.substrate.relative_permittivity}, {"model", "zero_thickness_half_space"}};
    auto feed = to_json(m.feedline);
    if (m.feedline_length_um > 0.0) feed["length_um"] = m.feedline_length_um;
    j["feedline"] = feed;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : m.resonators) {
        nlohmann::ordered_json e;
        e["name"] = r.name;
        e["type"] = r.type == ManifestResonator::Type::sir ? "SIR" : "UIR";
        e["termination"] = r.termination == Termination::short_circuit ? "short" : "open";
        auto segs = nlohmann::ordered_json::array();
        for (const auto& s : r.segments) segs.push_back(to_json(s.cross_section, s.length_um));
        e["segments"] = segs;
        e["coupling_cap_ff"] = r.coupling_cap_ff;
        if (r.target_frequency_hz) e["target_frequency_hz"] = *r.target_frequency_hz;
        e["rounded_step"] = r.rounded_step;
        if (r.internal_q) e["internal_q"] = *r.internal_q;
        if (r.tap_um) e["tap_um"] = *r.tap_um;
        arr.push_back(e);
    }
    j["resonators"] = arr;
    return j;
}

namespace detail {

template <class T>
T required(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw DomainError("manifest: " + where + " missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DomainError("manifest: " + where + " has an invalid '" + key + "'");
    }
}

template <class T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return required<T>(j, key, where);
}

inline CpwCrossSection cross_section_from(const nlohmann::json& j, const std::string& where) {
    CpwCrossSection xs;
    xs.center_width_um = required<double>(j, "center_width_um", where);
    xs.gap_um = required<double>(j, "gap_um", where);
    xs.film_thickness_um = optional_field<double>(j, "film_thickness_um", where).value_or(0.0);
    return xs;
}

}  // namespace detail

inline DesignManifest manifest_from_json(const nlohmann::json& j) {
    DesignManifest m;
    m.schema_version = detail::required<int>(j, "schema_version", "manifest");
    if (m.schema_version != kManifestSchemaVersion)
        throw DomainError("manifest: unsupported schema_version " + std::to_string(m.schema_version));
    const auto& sub = j.at("substrate");
    m.substrate.relative_permittivity = detail::required<double>(sub, "relative_permittivity", "substrate");
    const auto& feed = detail::required<nlohmann::json>(j, "feedline", "manifest");
    m.feedline = detail::cross_section_from(feed, "feedline");
    m.feedline_length_um = detail::optional_field<double>(feed, "length_um", "feedline").value_or(0.0);

    for (const auto& e : detail::required<nlohmann::json>(j, "resonators", "manifest")) {
        ManifestResonator r;
        r.name = detail::required<std::string>(e, "name", "resonator");
        const std::string where = "resonator '" + r.name + "'";
        const auto type = detail::required<std::string>(e, "type", where);
        if (type == "SIR") r.type = ManifestResonator::Type::sir;
        else if (type == "UIR") r.type = ManifestResonator::Type::uir;
        else throw DomainError("manifest: " + where + " has unknown type '" + type + "'");
        const auto term = detail::optional_field<std::string>(e, "termination", where).value_or("short");
        if (term == "short") r.termination = Termination::short_circuit;
        else if (term == "open") r.termination = Termination::open_circuit;
        else throw DomainError("manifest: " + where + " has unknown termination '" + term + "'");
        for (const auto& s : detail::required<nlohmann::json>(e, "segments", where))
            r.segments.push_back({detail::cross_section_from(s, where), detail::required<double>(s, "length_um", where)});
        r.coupling_cap_ff = detail::required<double>(e, "coupling_cap_ff", where);
        r.target_frequency_hz = detail::optional_field<double>(e, "target_frequency_hz", where);
        r.rounded_step = detail::optional_field<bool>(e, "rounded_step", where).value_or(false);
        r.internal_q = detail::optional_field<double>(e, "internal_q", where);
        r.tap_um = detail::optional_field<double>(e, "tap_um", where);
        m.resonators.push_back(std::move(r));
    }
    validate(m);
    return m;
}

inline std::string dump_manifest(const DesignManifest& m) { return to_json(m).dump(2) + "\n"; }

inline DesignManifest parse_manifest(const std::string& text, const std::string& source = "<manifest>") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, 0, e.what());
    }
    try {
        return manifest_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("manifest: " + std::string(e.what()));
    }
}

inline DesignManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open manifest '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_manifest(ss.str(), path.string());
}

inline void write_manifest(const DesignManifest& m, const std::filesystem::path& path) {
    validate(m);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << dump_manifest(m);
    if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace cpwres
