#include "v2g/bo/search_space.hpp"

#include <cmath>
#include <cstdio>

namespace v2g::bo {

int SearchSpace::encoded_dim() const {
    int d = continuous_dim();
    for (int c : categories) d += c;
    return d;
}

int SearchSpace::combination_count() const {
    int n = 1;
    for (int c : categories) n *= c;
    return n;
}

std::vector<int> SearchSpace::combination(int index) const {
    std::vector<int> out(categories.size());
    for (std::size_t k = categories.size(); k-- > 0;) {
        out[k] = index % categories[k];
        index /= categories[k];
    }
    return out;
}

std::vector<int> SearchSpace::length_scale_groups() const {
    std::vector<int> g;
    int next = 0;
    for (int d = 0; d < continuous_dim(); ++d) g.push_back(next++);
    for (int c : categories) {
        g.insert(g.end(), static_cast<std::size_t>(c), next);
        ++next;
    }
    return g;
}

void SearchSpace::validate() const {
    if (lower.size() != upper.size()) throw ConfigurationError("search space bounds differ in length");
    for (int d = 0; d < continuous_dim(); ++d)
        if (!(lower[d] < upper[d])) throw ConfigurationError("search space bounds must satisfy lower < upper");
    for (int c : categories)
        if (c < 1) throw ConfigurationError("categorical variable without options");
}

Eigen::VectorXd SearchSpace::encode_unit(const Eigen::VectorXd& unit, const std::vector<int>& categorical) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(encoded_dim());
    z.head(continuous_dim()) = unit;
    int offset = continuous_dim();
    for (std::size_t k = 0; k < categories.size(); ++k) {
        z[offset + categorical[k]] = 1.0;
        offset += categories[k];
    }
    return z;
}

Eigen::VectorXd SearchSpace::encode(const Candidate& c) const {
    if (c.continuous.size() != continuous_dim() || c.categorical.size() != categories.size())
        throw ConfigurationError("candidate does not match the search space");
    Eigen::VectorXd unit(continuous_dim());
    for (int d = 0; d < continuous_dim(); ++d) {
        const double v = c.continuous[d];
        if (!(v >= lower[d] && v <= upper[d])) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "coordinate %d = %g outside [%g, %g]", d, v, lower[d], upper[d]);
            throw ConfigurationError(buf);
        }
        unit[d] = (v - lower[d]) / (upper[d] - lower[d]);
    }
    for (std::size_t k = 0; k < categories.size(); ++k)
        if (c.categorical[k] < 0 || c.categorical[k] >= categories[k])
            throw ConfigurationError("categorical choice " + std::to_string(c.categorical[k]) + " out of range");
    return encode_unit(unit, c.categorical);
}

Candidate SearchSpace::decode(const Eigen::VectorXd& z) const {
    if (z.size() != encoded_dim()) throw ConfigurationError("encoded point has the wrong dimension");
    Candidate c;
    c.continuous = lower + (upper - lower).cwiseProduct(z.head(continuous_dim()).cwiseMax(0.0).cwiseMin(1.0));
    int offset = continuous_dim();
    for (int n : categories) {
        Eigen::Index best = 0;
        z.segment(offset, n).maxCoeff(&best);
        c.categorical.push_back(static_cast<int>(best));
        offset += n;
    }
    return c;
}

SearchSpace design_search_space(const DesignBounds& b, int use_cases) {
    SearchSpace s;
    s.lower = Eigen::Vector3d(b.pv_min, b.bess_min, b.grid_min);
    s.upper = Eigen::Vector3d(b.pv_max, b.bess_max, b.grid_max);
    s.categories.assign(static_cast<std::size_t>(use_cases), kEvseOptionCount);
    s.validate();
    return s;
}

Candidate to_candidate(const DesignPoint& d) {
    return {Eigen::Vector3d(d.p_pv_peak_kwp, d.e_bess_kwh, d.p_grid_max_kw), d.evse_choice};
}

DesignPoint to_design(const Candidate& c) {
    if (c.continuous.size() != 3) throw ConfigurationError("design candidates have three continuous coordinates");
    return {c.continuous[0], c.continuous[1], c.continuous[2], c.categorical};
}

}  // namespace v2g::bo
