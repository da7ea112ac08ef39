// Moments, k0 and admissible smoothness range of the standard kernels.
#include "besov/besov.hpp"

#include <cstdio>
#include <string>

int main() {
  using namespace besov;
  for (const auto& b : verify::standard_battery()) {
    GridSpec grid = detail::moment_grid(b.rho);
    MomentReport rep = analyze_moments(b.rho, grid);
    AdmissibilityVerdict v = classify_admissibility(b.rho, rep);
    std::string upper = v.upper ? report::number(*v.upper) : "inf";
    std::printf("%-16s k0=%-3s nonneg=%d  admissible s in (%g, %s)\n", b.rho.id().c_str(), rep.k0.str().c_str(),
                rep.nonnegative, v.lower, upper.c_str());
    for (const auto& t : rep.tensors) std::printf("    order %d moment %+.6e\n", t.order(), t.at(std::vector<int>(t.order(), 0)));
  }
}
