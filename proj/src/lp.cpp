#include "v2g/lp/simplex.hpp"

namespace v2g::lp {

const char* to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

template class BoundedSimplex<double>;
template Solution<double> solve<double>(const LinearProgram<double>&, const SolverOptions&);

}  // namespace v2g::lp
