#ifndef V2G_TESTS_DISPATCH_DP_ORACLE_HPP
#define V2G_TESTS_DISPATCH_DP_ORACLE_HPP

// Exhaustive dynamic programme over a power lattice for a tiny depot: one
// bidirectional vehicle and one stationary battery, ample grid connection.
// Written independently of the dispatch code.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

struct MiniDepot {
    double dt = 0.25;
    std::vector<double> buy, feed, net_load;  // net_load = house - pv, kW

    int vehicle_steps = 0;  // vehicle at the depot during steps [0, vehicle_steps)
    double ev_power = 10.0;
    double ev_start = 15.0, ev_min = 1.0, ev_max = 20.0, ev_target = 20.0;

    double bess_power = 10.0;
    double bess_start = 10.0, bess_min = 1.0, bess_max = 19.0;

    int levels = 11;  // power levels per variable, evenly spaced over [-P, P]
};

struct DpResult {
    double best = std::numeric_limits<double>::infinity();
    double discretization_bound = 0.0;
};

inline double step_cost(const MiniDepot& d, int t, double ev_kw, double bess_kw) {
    const double net = d.net_load[static_cast<std::size_t>(t)] + ev_kw + bess_kw;
    const double price = net > 0 ? d.buy[static_cast<std::size_t>(t)] : d.feed[static_cast<std::size_t>(t)];
    return net * price * d.dt;
}

inline DpResult dp_search(const MiniDepot& d) {
    const int T = static_cast<int>(d.buy.size());
    const double ev_dp = 2.0 * d.ev_power / (d.levels - 1);
    const double b_dp = 2.0 * d.bess_power / (d.levels - 1);
    const double ev_de = ev_dp * d.dt, b_de = b_dp * d.dt;
    const int half = (d.levels - 1) / 2;

    // Lattice index ranges; energy = start + index * quantum.
    const int ev_lo = static_cast<int>(std::ceil((d.ev_min - d.ev_start) / ev_de - 1e-9));
    const int ev_hi = static_cast<int>(std::floor((d.ev_max - d.ev_start) / ev_de + 1e-9));
    const int b_lo = static_cast<int>(std::ceil((d.bess_min - d.bess_start) / b_de - 1e-9));
    const int b_hi = static_cast<int>(std::floor((d.bess_max - d.bess_start) / b_de + 1e-9));
    const int nev = ev_hi - ev_lo + 1, nb = b_hi - b_lo + 1;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> cost(static_cast<std::size_t>(nev * nb), inf), next(cost.size());
    const auto at = [&](int iev, int ib) { return static_cast<std::size_t>((iev - ev_lo) * nb + (ib - b_lo)); };
    cost[at(0, 0)] = 0.0;
    for (int t = 0; t < T; ++t) {
        std::fill(next.begin(), next.end(), inf);
        const bool ev_here = t < d.vehicle_steps;
        for (int iev = ev_lo; iev <= ev_hi; ++iev)
            for (int ib = b_lo; ib <= b_hi; ++ib) {
                const double c0 = cost[at(iev, ib)];
                if (c0 == inf) continue;
                for (int a = -half; a <= half; ++a) {
                    if (!ev_here && a != 0) continue;
                    const int jev = iev + a;
                    if (jev < ev_lo || jev > ev_hi) continue;
                    for (int bb = -half; bb <= half; ++bb) {
                        const int jb = ib + bb;
                        if (jb < b_lo || jb > b_hi) continue;
                        const double c = c0 + step_cost(d, t, a * ev_dp, bb * b_dp);
                        double& slot = next[at(jev, jb)];
                        slot = std::min(slot, c);
                    }
                }
            }
        std::swap(cost, next);
    }

    DpResult r;
    const int target = static_cast<int>(std::lround((d.ev_target - d.ev_start) / ev_de));
    if (std::abs(d.ev_start + target * ev_de - d.ev_target) > 1e-9) return r;  // target off the lattice
    for (int ib = b_lo; ib <= b_hi; ++ib) r.best = std::min(r.best, cost[at(target, ib)]);

    // A continuous optimum can be rounded onto the lattice with every power moving by
    // less than one level; the step cost is Lipschitz with the larger tariff.
    for (int t = 0; t < T; ++t) {
        const double lip = std::max(std::abs(d.buy[static_cast<std::size_t>(t)]), std::abs(d.feed[static_cast<std::size_t>(t)])) * d.dt;
        r.discretization_bound += ((t < d.vehicle_steps ? ev_dp : 0.0) + b_dp) * lip;
    }
    return r;
}

}  // namespace oracle

#endif  // V2G_TESTS_DISPATCH_DP_ORACLE_HPP
