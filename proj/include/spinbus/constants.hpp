#pragma once

namespace spinbus::constants {

// SI defining constants (2019 redefinition, exact).
inline constexpr double planck_h = 6.62607015e-34;        // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C

// Superconducting flux quantum h/2e.
inline constexpr double phi0 = planck_h / (2.0 * elementary_charge);  // Wb

// Unit conversions used throughout: energies are GHz (h = 1),
// currents nA, inductances pH, capacitances fF, fluxes Phi0.
inline constexpr double ghz = 1e9;
inline constexpr double nano = 1e-9;
inline constexpr double pico = 1e-12;
inline constexpr double femto = 1e-15;

}  // namespace spinbus::constants
