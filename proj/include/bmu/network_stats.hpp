#pragma once

#include <cstddef>
#include <optional>

namespace bmu {

// Size summary of an agent's learned structure.
struct NetworkStats {
  std::size_t neurons = 0;
  std::size_t edges = 0;
  std::optional<double> avg_fan_in;  // undefined for the Q-table
  std::size_t parameter_count = 0;
};

// Counting convention: per neuron, one word per action value, one for V and
// one for the gate.
inline constexpr std::size_t parameter_count(std::size_t neurons, int actions) {
  return neurons * static_cast<std::size_t>(actions + 2);
}

}  // namespace bmu
