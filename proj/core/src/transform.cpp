#include "cmn/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmn {

double CumulativeMass::eval(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= s_nodes.back()) return z_nodes.back();
    auto it = std::upper_bound(s_nodes.begin(), s_nodes.end(), s);
    const size_t i = static_cast<size_t>(it - s_nodes.begin()) - 1;
    const double a = s_nodes[i], b = s_nodes[i + 1];
    const double t = (s - a) / (b - a);
    return z_nodes[i] + t * (z_nodes[i + 1] - z_nodes[i]);
}

double CumulativeMass::slope(int i) const {
    const size_t j = static_cast<size_t>(i);
    return (z_nodes[j + 1] - z_nodes[j]) / (s_nodes[j + 1] - s_nodes[j]);
}

CumulativeMass cumulative_mass(const Field& u) {
    const auto& grid = *u.grid;
    const auto& sp = grid.face_powers();
    CumulativeMass z;
    z.s_nodes = sp;
    z.z_nodes.resize(sp.size());
    z.z_nodes[0] = 0.0;
    // n * int rho^(n-1) u drho over cell i is u_i * (s_{i+1} - s_i) exactly
    for (size_t i = 0; i + 1 < sp.size(); ++i)
        z.z_nodes[i + 1] = z.z_nodes[i] + u.values[i] * (sp[i + 1] - sp[i]);
    return z;
}

namespace {

// int_a^c s^(-eta) ds and int_a^c s^(1-eta) ds, 0 <= a <= c, eta in [0,1)
double w0_int(double a, double c, double eta) {
    const double e = 1.0 - eta;
    return (std::pow(c, e) - std::pow(a, e)) / e;
}
double w1_int(double a, double c, double eta) {
    const double e = 2.0 - eta;
    return (std::pow(c, e) - std::pow(a, e)) / e;
}

}  // namespace

double radial_moment(const CumulativeMass& z, double r, double eta, int n) {
    if (!(eta >= 0.0 && eta < 1.0))
        throw std::invalid_argument("radial_moment: eta must lie in [0, 1)");
    if (!(r > 0.0)) throw std::invalid_argument("radial_moment: r must be positive");
    double s_top = 1.0;
    for (int k = 0; k < n; ++k) s_top *= r;
    s_top = std::min(s_top, z.s_nodes.back());

    double acc = 0.0;
    for (size_t i = 0; i + 1 < z.s_nodes.size(); ++i) {
        const double a = z.s_nodes[i];
        if (a >= s_top) break;
        const double b = std::min(z.s_nodes[i + 1], s_top);
        const double slope = (z.z_nodes[i + 1] - z.z_nodes[i]) /
                             (z.s_nodes[i + 1] - z.s_nodes[i]);
        const double intercept = z.z_nodes[i] - slope * a;  // z(s) = intercept + slope * s
        acc += intercept * w0_int(a, b, eta) + slope * w1_int(a, b, eta);
    }
    return acc;
}

double radial_moment(const Field& u, double r, double eta) {
    return radial_moment(cumulative_mass(u), r, eta, u.grid->dimension());
}

}  // namespace cmn
