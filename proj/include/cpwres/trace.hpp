#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpwres/error.hpp"

namespace cpwres {

using cplx = std::complex<double>;

/// Complex transmission sampled on a strictly increasing frequency grid.
/// s11/s22 are carried only when the source knows them (simulation output).
struct S21Trace {
    std::vector<double> frequencies;  // Hz
    std::vector<cplx> s21;
    std::optional<double> incident_power_dbm;
    std::map<std::string, std::string> metadata;
    std::vector<cplx> s11;
    std::vector<cplx> s22;

    std::size_t size() const { return frequencies.size(); }
    bool empty() const { return frequencies.empty(); }
    double span() const { return empty() ? 0.0 : frequencies.back() - frequencies.front(); }

    void validate() const {
        if (s21.size() != frequencies.size()) throw DomainError("trace: s21 and frequency sizes differ");
        if (!s11.empty() && s11.size() != frequencies.size()) throw DomainError("trace: s11 size mismatch");
        if (!s22.empty() && s22.size() != frequencies.size()) throw DomainError("trace: s22 size mismatch");
        for (std::size_t i = 1; i < frequencies.size(); ++i)
            if (!(frequencies[i] > frequencies[i - 1]))
                throw DomainError("trace: frequency grid must be strictly increasing");
    }
};

inline std::vector<double> linear_grid(double start_hz, double stop_hz, std::size_t points) {
    if (points < 2 || !(stop_hz > start_hz)) throw DomainError("linear_grid: need >= 2 points and stop > start");
    std::vector<double> grid(points);
    const double step = (stop_hz - start_hz) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = start_hz + step * static_cast<double>(i);
    grid.back() = stop_hz;
    return grid;
}

}  // namespace cpwres
