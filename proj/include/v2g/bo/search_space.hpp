#ifndef V2G_BO_SEARCH_SPACE_HPP
#define V2G_BO_SEARCH_SPACE_HPP

#include <Eigen/Core>

#include <string>
#include <vector>

#include "v2g/design.hpp"

namespace v2g::bo {

/// A point of a mixed space: box-bounded continuous coordinates plus categorical choices.
struct Candidate {
    Eigen::VectorXd continuous;
    std::vector<int> categorical;

    bool operator==(const Candidate& o) const { return continuous == o.continuous && categorical == o.categorical; }
};

/// Encoding: continuous coordinates min-max scaled to [0, 1], followed by one one-hot
/// block per categorical variable.
struct SearchSpace {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::vector<int> categories;  // option count of each categorical variable

    int continuous_dim() const { return static_cast<int>(lower.size()); }
    int encoded_dim() const;
    /// Number of categorical combinations (1 without categorical variables).
    int combination_count() const;
    /// Mixed-radix decoding of a combination index; the first variable varies slowest.
    std::vector<int> combination(int index) const;
    /// Length-scale group of every encoded dimension: one per continuous coordinate,
    /// one shared per one-hot block.
    std::vector<int> length_scale_groups() const;

    /// Throws ConfigurationError for values outside the box or invalid choices.
    Eigen::VectorXd encode(const Candidate& c) const;
    Candidate decode(const Eigen::VectorXd& z) const;
    /// Continuous part only, already in unit coordinates.
    Eigen::VectorXd encode_unit(const Eigen::VectorXd& unit, const std::vector<int>& categorical) const;

    void validate() const;
};

/// Continuous (pv, bess, grid) plus one 8-way charger choice per use case.
SearchSpace design_search_space(const DesignBounds& bounds = {}, int use_cases = 3);
Candidate to_candidate(const DesignPoint& design);
DesignPoint to_design(const Candidate& candidate);

}  // namespace v2g::bo

#endif  // V2G_BO_SEARCH_SPACE_HPP
