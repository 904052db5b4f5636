// Unit conversions and physical constants shared across the library.
#pragma once

#include <cmath>

namespace wsntpc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Powers are held in watts everywhere inside the library; dBm appears
// only at the configuration and report boundary.
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

inline double mhz_to_hz(double mhz) { return mhz * 1e6; }

}  // namespace wsntpc
