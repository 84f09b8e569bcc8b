// Prints the oracle's verdict vector for one generated scenario. The output
// for seed 0 is committed as tests/fixtures/golden_seed0.txt.

#include <cstdlib>
#include <iostream>

#include "oracle.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
  const auto run = rbac::oracle::run_scenario(rbac::oracle::generate(seed));
  std::cout << "seed " << seed << "\n";
  for (bool allowed : run.oracle_verdicts) std::cout << (allowed ? "allow" : "deny") << "\n";
  return 0;
}
