#pragma once

#include <cmath>

#include "common.hpp"

namespace spherefield {

/// Closed-form power-law family coeff * n^exponent.
struct PowerLaw {
    double coeff = 1.0;
    double exponent = 1.0;

    double operator()(int n) const { return coeff * std::pow(static_cast<double>(n), exponent); }
};

// Joint cutoff removal: sphere radii R_n, mollification scales Lambda_n,
// Lagrangian sup bounds M_n, and the collar constant alpha. The schedule is
// RP-valid when M_n R_n^D / Lambda_n -> 0.
struct CutoffSchedule {
    int D = 1;
    PowerLaw R{1.0, 1.0};
    PowerLaw Lambda{1.0, 3.0};
    PowerLaw M{1.0, 1.0};
    double alpha = 4.0;

    /// M_n R_n^D / Lambda_n.
    double ratio(int n) const {
        if (n < 1) throw Error("ratio: n must be >= 1");
        return M(n) * std::pow(R(n), static_cast<double>(D)) / Lambda(n);
    }

    double delta(int n) const { return 1.0 / Lambda(n); }

    /// Exact on power-law families: ratio(n) -> 0 iff the exponents satisfy
    /// M.exp + D * R.exp < Lambda.exp, with all scales increasing unbounded.
    bool rp_valid() const {
        const bool growing = R.coeff > 0 && R.exponent > 0 && Lambda.coeff > 0 && Lambda.exponent > 0;
        return growing && (M.exponent + D * R.exponent < Lambda.exponent);
    }

    static CutoffSchedule default_schedule(int D) {
        CutoffSchedule s;
        s.D = D;
        s.R = {1.0, 1.0};
        s.Lambda = {1.0, static_cast<double>(D + 2)};
        s.M = {1.0, 1.0};
        s.alpha = 4.0;
        return s;
    }
};

}  // namespace spherefield
