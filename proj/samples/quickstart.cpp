// Generates one apartment, runs the oracle pipeline on it, and prints the result.

#include <iostream>

#include "navkit/navkit.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 7;
  navkit::GeneratedScenario g = navkit::generate_scenario(seed, 0);
  navkit::RunConfig cfg;
  navkit::EpisodeResult r = navkit::run_episode(g.scenario, cfg);
  std::cout << navkit::to_json(r, false).dump(2) << "\n";
  return r.success ? 0 : 1;
}
