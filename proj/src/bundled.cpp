#include "find/bundled.hpp"

#include <cmath>

#include "find/rng.hpp"

namespace find {

namespace {

Column col(std::string name, const char* unit, std::vector<double> v) {
  return {std::move(name), parse_unit(unit), std::move(v)};
}

std::vector<double> scaled(std::vector<double> v, double k) {
  for (auto& x : v) x *= k;
  return v;
}

}  // namespace

Dataset solar_system() {
  constexpr double km = 1e3, hour = 3600.0, day = 86400.0;
  std::vector<Column> c;
  c.push_back(col("m", "kg", scaled({0.330, 4.87, 5.97, 0.642, 1898, 568, 86.8, 102, 0.0130}, 1e24)));
  c.push_back(col("d", "m", scaled({4879.4, 12103.6, 12742, 6779, 139822, 116464, 50724, 49244, 2376.6}, km)));
  c.push_back(col("rho", "kg/m^3", {5429, 5243, 5514, 3934, 1326, 687, 1270, 1638, 1850}));
  c.push_back(col("g", "m/s^2", {3.7, 8.9, 9.8, 3.7, 23.1, 9.0, 8.7, 11.0, 0.7}));
  c.push_back(col("v_e", "m/s", scaled({4.3, 10.4, 11.2, 5.0, 59.5, 35.5, 21.3, 23.5, 1.3}, km)));
  c.push_back(col("t_r", "s", scaled({1407.6, -5832.5, 23.9, 24.6, 9.9, 10.7, -17.2, 16.1, -153.3}, hour)));
  c.push_back(col("t_d", "s", scaled({4222.6, 2802.0, 24.0, 24.7, 9.9, 10.7, 17.2, 16.1, 153.3}, hour)));
  c.push_back(col("r_s", "m", scaled({57.9, 108.2, 149.6, 228.0, 778.5, 1432.0, 2867.0, 4515.0, 5906.4}, 1e9)));
  c.push_back(col("r_p", "m", scaled({46.0, 107.5, 147.1, 206.7, 740.6, 1357.6, 2732.7, 4471.1, 4436.8}, 1e9)));
  c.push_back(col("r_a", "m", scaled({69.8, 108.9, 152.1, 249.3, 816.4, 1506.5, 3001.4, 4558.9, 7375.9}, 1e9)));
  c.push_back(col("t_o", "s", scaled({88.0, 224.7, 365.2, 687.0, 4331, 10747, 30589, 59800, 90560}, day)));
  c.push_back(col("v_o", "m/s", scaled({47.4, 35.0, 29.8, 24.1, 13.1, 9.7, 6.8, 5.4, 4.7}, km)));
  return Dataset(std::move(c), "planetary fact sheet (mean diameters), SI");
}

Dataset rlc_grid(std::size_t levels) {
  auto lin = [](double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
  };
  const auto R = lin(10, 15, levels), L = lin(0.06, 0.14, levels), C = lin(6e-4, 9.5e-4, levels),
             W = lin(100, 150, levels);
  const std::vector<double> U = {5, 10}, P = {0.1, 0.3};
  std::vector<double> cr, cl, cc, cw, cu, cp, cz;
  for (double r : R)
    for (double l : L)
      for (double c : C)
        for (double w : W)
          for (double u : U)
            for (double p : P) {
              cr.push_back(r);
              cl.push_back(l);
              cc.push_back(c);
              cw.push_back(w);
              cu.push_back(u);
              cp.push_back(p);
              const double x = w * l - 1.0 / (w * c);
              cz.push_back(std::sqrt(r * r + x * x));
            }
  std::vector<Column> cols;
  cols.push_back(col("R", "kg*m^2/(s^3*A^2)", cr));
  cols.push_back(col("L", "kg*m^2/(s^2*A^2)", cl));
  cols.push_back(col("C", "s^4*A^2/(kg*m^2)", cc));
  cols.push_back(col("omega", "1/s", cw));
  cols.push_back(col("U", "kg*m^2/(s^3*A)", cu));
  cols.push_back(col("phi1", "", cp));
  cols.push_back(col("Z", "kg*m^2/(s^3*A^2)", cz));
  return Dataset(std::move(cols), "synthetic RLC impedance grid");
}

Dataset kepler(std::size_t n) {
  constexpr double au = 1.495978707e11;
  constexpr double two_pi = 6.283185307179586;
  std::vector<double> r(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    r[i] = 0.3 * std::pow(40.0 / 0.3, f) * au;
    t[i] = two_pi * std::pow(r[i], 1.5) / std::sqrt(kGMSun);
  }
  std::vector<Column> cols;
  cols.push_back(col("r_o", "m", r));
  cols.push_back(col("t_o", "s", t));
  return Dataset(std::move(cols), "synthetic Kepler orbits");
}

Dataset knudsen(std::size_t n, std::uint64_t seed, double noise) {
  Rng rng(seed);
  std::vector<double> dT(n), l2(n), H(n), Tc(n), L(n), dp(n);
  for (std::size_t i = 0; i < n; ++i) {
    dT[i] = rng.uniform(20, 300);
    l2[i] = std::pow(10.0, rng.uniform(-7.5, -6.0));
    H[i] = std::pow(10.0, rng.uniform(-6.5, -5.0));
    Tc[i] = rng.uniform(250, 350);
    L[i] = std::pow(10.0, rng.uniform(-4.0, -2.0));
    const double z = std::sqrt(dT[i] * std::pow(l2[i], 3) / (std::pow(H[i], 3) * Tc[i]));
    dp[i] = (4.13e4 * z - 43.8) * (1.0 + noise * rng.normal());
  }
  std::vector<Column> cols;
  cols.push_back(col("dT", "K", dT));
  cols.push_back(col("lambda2", "m", l2));
  cols.push_back(col("H", "m", H));
  cols.push_back(col("T_c", "K", Tc));
  cols.push_back(col("L", "m", L));
  cols.push_back(col("dp", "kg/(m*s^2)", dp));
  return Dataset(std::move(cols), "synthetic Knudsen-compressor law");
}

std::vector<SmdParams> smd_parameter_sets(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SmdParams> out(n);
  for (auto& p : out) {
    p.c = rng.uniform(0.2, 2.0);
    p.k = rng.uniform(0.5, 4.0);
    p.m = rng.uniform(0.5, 3.0);
    p.delta = rng.uniform(0.5, 2.0);
  }
  return out;
}

Dataset series_dataset(const Series& s) {
  std::vector<Column> cols;
  cols.push_back(col("t", "s", std::vector<double>(s.t.data(), s.t.data() + s.t.size())));
  cols.push_back(col("x", "m", std::vector<double>(s.x.data(), s.x.data() + s.x.size())));
  return Dataset(std::move(cols), "spring-mass-damper RK4 series");
}

Dataset smd_parameter_table(const std::vector<SmdParams>& sets, const std::vector<double>& xi2,
                            const std::vector<double>& xi3) {
  std::vector<double> c, k, m, d;
  for (const auto& p : sets) {
    c.push_back(p.c);
    k.push_back(p.k);
    m.push_back(p.m);
    d.push_back(p.delta);
  }
  std::vector<Column> cols;
  cols.push_back(col("c", "kg/s", c));
  cols.push_back(col("k", "kg/s^2", k));
  cols.push_back(col("m", "kg", m));
  cols.push_back(col("delta", "m", d));
  if (!xi2.empty()) cols.push_back(col("xi2", "1/s", xi2));
  if (!xi3.empty()) cols.push_back(col("xi3", "s", xi3));
  return Dataset(std::move(cols), "spring-mass-damper parameter table");
}

std::vector<std::string> bundled_names() { return {"solar", "rlc", "kepler", "knudsen", "smd"}; }

}  // namespace find
