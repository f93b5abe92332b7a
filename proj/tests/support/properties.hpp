#pragma once

// Randomized algebraic properties shared by the unit suite and the
// acceptance runner.

#include <cstdint>
#include <string>
#include <vector>

namespace kmsf::testing {

struct PropertyOutcome {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::vector<std::string> examples;  // first few failures
};

PropertyOutcome detour_closure_and_symmetry(std::uint64_t seed, int cases);
PropertyOutcome cocycle_additivity(std::uint64_t seed, int cases);
PropertyOutcome gcd_against_rational(std::uint64_t seed, int cases);
PropertyOutcome lambda_rescaling(std::uint64_t seed, int cases);
PropertyOutcome tail_shift_invariance(std::uint64_t seed, int cases);

/// All five with cases split evenly.
std::vector<PropertyOutcome> semigroup_algebra_suite(std::uint64_t seed, int total_cases);

}  // namespace kmsf::testing
