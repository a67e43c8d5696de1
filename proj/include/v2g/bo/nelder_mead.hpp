#ifndef V2G_BO_NELDER_MEAD_HPP
#define V2G_BO_NELDER_MEAD_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace v2g::bo {

struct NelderMeadOptions {
    int max_evaluations = 400;
    double initial_step = 1.0;
    double f_tolerance = 1e-9;
    double x_tolerance = 1e-6;
};

/// Derivative-free minimization. Returns the best point found; `f_best` receives its value.
template <typename Scalar, typename Objective>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nelder_mead(Objective&& f, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0,
                                                     const NelderMeadOptions& opt, Scalar* f_best = nullptr) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = x0.size();
    std::vector<Vector> pts(static_cast<std::size_t>(n + 1), x0);
    std::vector<Scalar> val(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)][i] += Scalar(opt.initial_step);
    int evals = 0;
    for (std::size_t i = 0; i < pts.size(); ++i, ++evals) val[i] = f(pts[i]);

    std::vector<std::size_t> order(pts.size());
    while (evals < opt.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        Scalar spread = 0;
        for (const auto& p : pts) spread = std::max(spread, (p - pts[best]).cwiseAbs().maxCoeff());
        if (val[worst] - val[best] <= Scalar(opt.f_tolerance) * (Scalar(1) + std::abs(val[best])) && spread <= Scalar(opt.x_tolerance)) break;

        Vector centroid = Vector::Zero(n);
        for (std::size_t i : order)
            if (i != worst) centroid += pts[i];
        centroid /= Scalar(n);

        const Vector reflected = centroid + (centroid - pts[worst]);
        const Scalar fr = f(reflected);
        ++evals;
        if (fr < val[best]) {
            const Vector expanded = centroid + Scalar(2) * (centroid - pts[worst]);
            const Scalar fe = f(expanded);
            ++evals;
            if (fe < fr) {
                pts[worst] = expanded;
                val[worst] = fe;
            } else {
                pts[worst] = reflected;
                val[worst] = fr;
            }
            continue;
        }
        if (fr < val[second]) {
            pts[worst] = reflected;
            val[worst] = fr;
            continue;
        }
        const bool outside = fr < val[worst];
        const Vector contracted = outside ? Vector(centroid + Scalar(0.5) * (reflected - centroid))
                                          : Vector(centroid + Scalar(0.5) * (pts[worst] - centroid));
        const Scalar fc = f(contracted);
        ++evals;
        if (fc < (outside ? fr : val[worst])) {
            pts[worst] = contracted;
            val[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + Scalar(0.5) * (pts[i] - pts[best]);
            val[i] = f(pts[i]);
            ++evals;
        }
    }
    const auto it = std::min_element(val.begin(), val.end());
    if (f_best) *f_best = *it;
    return pts[static_cast<std::size_t>(it - val.begin())];
}

}  // namespace v2g::bo

#endif  // V2G_BO_NELDER_MEAD_HPP
