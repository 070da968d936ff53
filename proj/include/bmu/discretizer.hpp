#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "bmu/cartpole.hpp"
#include "bmu/error.hpp"

namespace bmu {

inline constexpr std::size_t kStateDims = 4;

using Bins = std::array<int, kStateDims>;

// Per-dimension clamp bounds for (x, x_dot, theta, theta_dot).
struct BinSpec {
  std::array<double, kStateDims> lower{-2.4, -3.0, -0.418, -3.5};
  std::array<double, kStateDims> upper{2.4, 3.0, 0.418, 3.5};
  int n_bins = 10;

  void validate() const {
    if (n_bins < 2) throw DomainError("BinSpec.n_bins must be >= 2");
    for (std::size_t d = 0; d < kStateDims; ++d) {
      if (!(lower[d] < upper[d]) || !std::isfinite(lower[d]) || !std::isfinite(upper[d])) {
        throw DomainError("BinSpec bounds must satisfy lower < upper in dimension " +
                          std::to_string(d));
      }
    }
  }
};

struct DiscreteState {
  Bins bins{};
  std::string key;

  friend bool operator==(const DiscreteState&, const DiscreteState&) = default;
};

// Half-open bins [lo + i*w, lo + (i+1)*w); values are clamped into
// [lo, hi] first and hi itself lands in the last bin.
inline int bin_index(double v, double lo, double hi, int n_bins) {
  if (std::isnan(v)) throw DomainError("cannot discretize NaN");
  if (v <= lo) return 0;
  if (v >= hi) return n_bins - 1;
  const int b = static_cast<int>(std::floor(n_bins * (v - lo) / (hi - lo)));
  return b < 0 ? 0 : (b >= n_bins ? n_bins - 1 : b);
}

// "3_4_6_5_": every index followed by an underscore.
inline std::string key_of(const Bins& bins) {
  std::string key;
  for (int b : bins) {
    key += std::to_string(b);
    key += '_';
  }
  return key;
}

inline Bins parse_key(std::string_view key) {
  Bins bins{};
  std::size_t pos = 0;
  for (std::size_t d = 0; d < kStateDims; ++d) {
    const std::size_t sep = key.find('_', pos);
    if (sep == std::string_view::npos) {
      throw ParseError("state key '" + std::string(key) + "' has fewer than 4 fields");
    }
    const std::string_view token = key.substr(pos, sep - pos);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || value < 0) {
      throw ParseError("state key '" + std::string(key) + "' has invalid token '" +
                       std::string(token) + "'");
    }
    bins[d] = value;
    pos = sep + 1;
  }
  if (pos != key.size()) {
    throw ParseError("state key '" + std::string(key) + "' has trailing token '" +
                     std::string(key.substr(pos)) + "'");
  }
  return bins;
}

inline DiscreteState discretize(const CartState& s, const BinSpec& spec) {
  const auto v = s.components();
  DiscreteState out;
  for (std::size_t d = 0; d < kStateDims; ++d) {
    out.bins[d] = bin_index(v[d], spec.lower[d], spec.upper[d], spec.n_bins);
  }
  out.key = key_of(out.bins);
  return out;
}

}  // namespace bmu
