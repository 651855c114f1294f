#ifndef CMN_TRANSFORM_HPP
#define CMN_TRANSFORM_HPP

#include <vector>

#include "cmn/grid.hpp"

namespace cmn {

/// Cumulative radial mass in the variable s = r^n:
///   z(s) = n * int_0^{s^(1/n)} rho^(n-1) u(rho) drho,
/// so z(r^n) = (1/|B1|) * integral of u over the ball of radius r, and the
/// slope z_s recovers u. With cell-wise constant u the transform is exact:
/// z is piecewise linear on the s-cells [faces^n] with slope u_i on cell i.
struct CumulativeMass {
    std::vector<double> s_nodes;  // faces^n, ascending, s_nodes[0] == 0
    std::vector<double> z_nodes;  // z at the nodes, z_nodes[0] == 0

    /// Piecewise-linear evaluation; s is clamped to [0, R^n].
    double eval(double s) const;
    /// z(R^n) = integral(u) / |B1|.
    double total() const { return z_nodes.back(); }
    /// Slope on s-cell i (equals the cell value of u).
    double slope(int i) const;
};

CumulativeMass cumulative_mass(const Field& u);

/// Moment functional y(r) = int_0^{r^n} s^(-eta) z(s) ds for eta in [0, 1).
/// The integrable singularity of the weight at s = 0 is handled by the
/// closed-form antiderivatives of s^(-eta) and s^(1-eta) per cell, never by
/// sampling. eta >= 1 makes the weight non-integrable and is rejected.
double radial_moment(const CumulativeMass& z, double r, double eta, int n);
double radial_moment(const Field& u, double r, double eta);

}  // namespace cmn

#endif
