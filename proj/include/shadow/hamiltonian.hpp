#pragma once

#include <string>
#include <vector>

#include "shadow/pauli.hpp"

namespace shadow {

struct HamiltonianTerm {
    double coeff = 0.0;
    PauliString op;
};

/// Weighted sum of Pauli strings with real coefficients, all on the same
/// number of sites.
struct HamiltonianSpec {
    std::string name;
    int sites = 0;
    std::vector<HamiltonianTerm> terms;

    double abs_coeff_sum() const {
        double s = 0.0;
        for (const auto& t : terms) s += std::abs(t.coeff);
        return s;
    }

    int max_weight() const {
        int w = 0;
        for (const auto& t : terms) w = std::max(w, t.op.weight());
        return w;
    }
};

/// Pauli-sum expansion of H^2 with like terms merged. The +/-i cross-term
/// phases of the Hermitian square cancel pairwise, so all coefficients stay
/// real; terms that cancel exactly are dropped.
HamiltonianSpec expand_square(const HamiltonianSpec& h);

} // namespace shadow
