#pragma once

// Physical constants, CODATA-2018. Kept in one table so every derived
// quantity in the library is reproducible bit-for-bit.

namespace biofet::constants {

inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double boltzmann = 1.380649e-23;              // J/K
inline constexpr double avogadro = 6.02214076e23;              // 1/mol
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m

} // namespace biofet::constants
