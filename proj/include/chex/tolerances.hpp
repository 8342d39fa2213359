#pragma once

// Max-entry deviation tolerances shared across the library. Values sit about
// a decade above double-precision accumulation error at the dimension cap.

namespace chex::tol {

inline constexpr double herm = 1e-10;    // max |m - m^dagger| entry
inline constexpr double eig = 1e-9;      // eigenvalue sum vs trace
inline constexpr double trace = 1e-10;   // unit-trace / unit-weight-sum slack
inline constexpr double psd = 1e-9;      // allowed dip of the minimum eigenvalue
inline constexpr double tp = 1e-9;       // trace preservation
inline constexpr double sym = 1e-9;      // permutation symmetry
inline constexpr double ext = 1e-9;      // extendibility
inline constexpr double moment = 1e-10;  // trace-moment identity
inline constexpr double rank = 1e-8;     // relative singular-value cutoff

}  // namespace chex::tol
