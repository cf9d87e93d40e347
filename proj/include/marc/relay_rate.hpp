#pragma once

#include <cmath>
#include <numbers>

namespace marc {

// Rate of a single-antenna-receiver AF relay link whose relay input has
// effective signal power `signal` (largest eigenvalue of the received signal
// covariance), with ||h||^2 = receiver_gain. Bits per channel use.

/// log2(1 + g*s*Pr / (g*Pr + s + 1))
inline double relay_rate_ratio_form(double receiver_gain, double signal, double relay_power) {
    const double gp = receiver_gain * relay_power;
    return std::log1p(gp * signal / (gp + signal + 1.0)) / std::numbers::ln2;
}

/// log2(1 + g*Pr) - log2(1 + g*Pr / (1 + s))
inline double relay_rate(double receiver_gain, double signal, double relay_power) {
    const double gp = receiver_gain * relay_power;
    return (std::log1p(gp) - std::log1p(gp / (1.0 + signal))) / std::numbers::ln2;
}

}  // namespace marc
