#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "bmu/error.hpp"

namespace bmu {

// Synaptic time constant (in steps) whose one-step exponential decay equals gamma.
inline double gamma_to_tau(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("discount factor must lie in (0, 1)");
  return -1.0 / std::log(gamma);
}

inline double tau_to_gamma(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("time constant must be positive");
  return std::exp(-1.0 / tau);
}

// Post-synaptic current at step t: causal discrete convolution of the input
// train with exp(-(t - x) / tau).
inline double synaptic_filter(std::span<const double> spike_train, double tau, std::size_t t) {
  if (!(tau > 0.0)) throw DomainError("time constant must be positive");
  if (t >= spike_train.size()) throw PreconditionError("synaptic_filter: t beyond spike train");
  double current = 0.0;
  for (std::size_t x = 0; x <= t; ++x) {
    if (spike_train[x] != 0.0) {
      current += spike_train[x] * std::exp(-static_cast<double>(t - x) / tau);
    }
  }
  return current;
}

}  // namespace bmu
