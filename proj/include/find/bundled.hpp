#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "find/dataset.hpp"
#include "find/sparsereg.hpp"

namespace find {

/// Nine-planet fact-sheet transcription (Mercury … Pluto), SI units.
/// Columns: m, d, rho, g, v_e, t_r, t_d, r_s, r_p, r_a, t_o, v_o.
Dataset solar_system();

/// |Z| = √(R² + (ωL − 1/(ωC))²) on an axis-aligned grid; U and phi1 are inert.
Dataset rlc_grid(std::size_t levels = 8);

/// t = 2π·r^1.5/√(GM_sun) for n orbits log-spaced between 0.3 and 40 AU.
Dataset kepler(std::size_t n = 20);

inline constexpr double kGMSun = 1.32712440018e20;

/// Δp = 4.13e4·√(ΔT·λ₂³/(H³·T_c)) − 43.8 with multiplicative Gaussian noise.
Dataset knudsen(std::size_t n = 120, std::uint64_t seed = 7, double noise = 0.01);

/// Spring-mass-damper parameter sets: c∈[0.2,2], k∈[0.5,4], m∈[0.5,3], δ∈[0.5,2].
std::vector<SmdParams> smd_parameter_sets(std::size_t n = 8, std::uint64_t seed = 3);

Dataset series_dataset(const Series& s);

/// Columns c, k, m, delta and, when supplied, xi2[1/s], xi3[s].
Dataset smd_parameter_table(const std::vector<SmdParams>& sets, const std::vector<double>& xi2 = {},
                            const std::vector<double>& xi3 = {});

/// Names accepted by `generate`.
std::vector<std::string> bundled_names();

}  // namespace find
