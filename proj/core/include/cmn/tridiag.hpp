#ifndef CMN_TRIDIAG_HPP
#define CMN_TRIDIAG_HPP

#include <cmath>
#include <vector>

namespace cmn {

/// Tridiagonal system solved in place by the Thomas algorithm.
/// lower[0] and upper[m-1] are ignored. Returns false on a vanishing pivot
/// (cannot happen for the strictly diagonally dominant systems assembled by
/// the solver, but callers treat it as a linear-solve failure anyway).
inline bool solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs) {
    const size_t m = diag.size();
    for (size_t i = 1; i < m; ++i) {
        const double piv = diag[i - 1];
        if (piv == 0.0 || !std::isfinite(piv)) return false;
        const double w = lower[i] / piv;
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[m - 1] == 0.0 || !std::isfinite(diag[m - 1])) return false;
    rhs[m - 1] /= diag[m - 1];
    for (size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    return true;
}

}  // namespace cmn

#endif
