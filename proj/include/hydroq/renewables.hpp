#pragma once

#include <algorithm>
#include <cmath>

namespace hydroq {

struct PvParams {
  double eta_conv = 0.9;
  double p_rated = 3.0; // kW
};

struct WtParams {
  double p_rated = 1.0;   // kW
  double v_cut_in = 3.0;  // m/s
  double v_rated = 8.0;   // m/s
  double v_cut_out = 22.0; // m/s
};

/// PV output in kW. `insolation` is normalized (1 = rated irradiance).
/// The temperature derating is clamped so output never goes negative.
inline double pv_power(const PvParams& p, double ambient_temp_c, double insolation) {
  const double derate = 1.0 - 0.004 * (ambient_temp_c - 25.0);
  return std::max(0.0, p.eta_conv * p.p_rated * insolation * derate);
}

/// Wind-turbine output in kW. Piecewise: zero outside [cut-in, cut-out],
/// cubic ramp ((v - v_in) / (v_rated - v_in))^3 below rated speed, flat at
/// rated power up to and including cut-out.
///
/// Some references use (v^3 - v_in^3) / (v_rated^3 - v_in^3) for the ramp;
/// this uses the cubed linear ratio.
inline double wt_power(const WtParams& p, double wind_speed) {
  const double v = wind_speed;
  if (v < p.v_cut_in || v > p.v_cut_out) return 0.0;
  if (v < p.v_rated) {
    const double r = (v - p.v_cut_in) / (p.v_rated - p.v_cut_in);
    return p.p_rated * r * r * r;
  }
  return p.p_rated;
}

} // namespace hydroq
