// Fitted decay slope of ||eta - eta*rho_eps||_1 for every battery kernel.
#include "besov/besov.hpp"

#include <cstdio>

int main() {
  using namespace besov;
  GridSpec grid(1, 16.0, 4096);
  GridFunction eta = synthesize(GaussianFunction{1.0, {}}, grid);
  EpsilonGrid eps(8, 4);

  std::printf("%-16s %4s %8s %8s\n", "kernel", "k0", "slope", "r2");
  for (const auto& b : verify::standard_battery()) {
    RateProfile prof = rate_profile(eta, b.rho, 1.0, eps, "gaussian");
    PowerLawFit fit = decay_exponent(prof, verify::default_taylor_range());
    std::printf("%-16s %4d %8.4f %8.6f\n", b.rho.id().c_str(), b.expected_k0, fit.slope, fit.r2);
  }
}
