// Walks the layer-percolation toolkit on a tiny instance: minimal odometer,
// full infection-set enumeration, and a 2-greedy path.

#include <cstdio>

#include "arw/layerperc.hpp"

int main() {
    const arw::InstructionTape tape(/*seed=*/42, /*lambda=*/0.8);
    arw::BoundaryData bd;
    bd.n = 4;
    bd.sigma = {1, 1, 1, 1};

    const auto m = arw::minimal_odometer(tape, bd);
    std::printf("minimal odometer:");
    for (std::int64_t v = 0; v <= bd.n + 1; ++v)
        std::printf(" %lld", static_cast<long long>(m.odo.at(v)));
    std::printf("\n");

    const auto sets = arw::enumerate_infections(tape, bd, /*window_cap=*/20);
    for (std::size_t step = 0; step < sets.steps.size(); ++step)
        std::printf("step %zu: %zu cells, top row %lld\n", step, sets.steps[step].size(),
                    static_cast<long long>(sets.steps[step].empty() ? 0 : sets.steps[step].back().s));

    const auto g = arw::greedy_path(tape, bd, /*k=*/1, /*horizon=*/4, /*window_cap=*/20);
    std::printf("1-greedy end cell: r=%lld s=%lld\n",
                static_cast<long long>(g.path.cells.back().r),
                static_cast<long long>(g.path.cells.back().s));
    return 0;
}
