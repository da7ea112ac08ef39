// Littlewood-Paley norm next to the mollifier rate norm on a small family.
#include "besov/besov.hpp"

#include <cstdio>

int main() {
  using namespace besov;
  GridSpec grid(1, 8.0, 1024);
  FilterBank bank = build_filter_bank(grid);
  const int levels = FilterBank::nyquist_levels(grid);
  auto family = verify::build_family(verify::default_family_generators(), grid, verify::family_cutoff(levels));
  EpsilonGrid eps(levels, 4);
  BesovParams par(0.7, 2.0, 2.0);
  const auto battery = verify::standard_battery();

  for (const char* id : {"gaussian", "centered_cube"}) {
    const auto& rho = verify::battery_kernel(battery, id).rho;
    std::printf("kernel %s, s=0.7 p=q=2\n", id);
    std::printf("  %-18s %12s %12s %8s\n", "function", "lp_norm", "rate_norm", "ratio");
    for (const auto& m : family.members()) {
      double lp = besov_norm(m.f, bank, par).value;
      double rate = mollifier_functional(m.f, rho, par, eps).norm;
      std::printf("  %-18s %12.6g %12.6g %8.4f\n", m.id.c_str(), lp, rate, lp / rate);
    }
  }
}
