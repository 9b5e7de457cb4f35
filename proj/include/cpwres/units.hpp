#pragma once

#include <cmath>
#include <numbers>

namespace cpwres {

inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kReferenceImpedance = 50.0;     // Ohm, VNA port impedance

inline constexpr double um_to_m(double um) { return um * 1e-6; }
inline constexpr double m_to_um(double m) { return m * 1e6; }
inline constexpr double ff_to_f(double ff) { return ff * 1e-15; }

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

inline constexpr double angular(double f_hz) { return 2.0 * kPi * f_hz; }

}  // namespace cpwres
