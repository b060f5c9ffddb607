#pragma once

namespace qmeter {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Config files carry ordinary frequencies in MHz; internally everything is
// an angular frequency in rad/us. Times are in us and hbar = 1, so energies
// share the rad/us unit.
inline constexpr double mhz_to_rad_us(double f_mhz) { return kTwoPi * f_mhz; }
inline constexpr double rad_us_to_mhz(double w) { return w / kTwoPi; }

}  // namespace qmeter
