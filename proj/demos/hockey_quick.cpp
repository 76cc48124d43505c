// Minimal library tour: drive a small interval to its plateau and print the
// density curve next to the min(rho, zeta) profile.

#include <cstdio>

#include "arw/experiments.hpp"

int main() {
    const auto curve = arw::hockey_curve(/*n=*/400, /*lambda=*/0.8, /*rho_max=*/1.2,
                                         /*grid_step=*/0.05, /*seed=*/7);
    const double zeta = arw::hockey_plateau_level(curve);
    std::printf("%-8s %-10s %s\n", "rho", "D", "min(rho, plateau)");
    for (const auto& p : curve.points)
        std::printf("%-8.3f %-10.4f %.4f\n", p.rho, p.density, std::min(p.rho, zeta));
    std::printf("plateau estimate: %.4f\n", zeta);
    return 0;
}
