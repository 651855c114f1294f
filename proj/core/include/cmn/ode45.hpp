#ifndef CMN_ODE45_HPP
#define CMN_ODE45_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cmn {

/// Adaptive Dormand-Prince 5(4) integrator for small ODE systems; used as
/// the reference trajectory generator when cross-checking the PDE stepper
/// on spatially constant data.
///
/// Integrates y' = f(t, y) from t0 to t1 with per-step error control at
/// `tol` (mixed absolute/relative). Returns y(t1).
inline std::vector<double> integrate_ode45(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& f, double t0,
    double t1, std::vector<double> y, double tol = 1e-10) {
    if (t1 < t0) throw std::invalid_argument("integrate_ode45: t1 must be >= t0");
    const size_t d = y.size();

    // Dormand-Prince tableau
    static const double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double b5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                                 -2187.0 / 6784, 11.0 / 84, 0.0};
    static const double b4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                                 -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    double t = t0;
    double h = std::min(1e-3, (t1 - t0 > 0 ? t1 - t0 : 1e-3));
    std::array<std::vector<double>, 7> k;
    std::vector<double> ytmp(d), y5(d), y4(d);
    int guard = 0;
    while (t < t1) {
        if (++guard > 20'000'000) throw std::runtime_error("integrate_ode45: step limit reached");
        h = std::min(h, t1 - t);
        for (int s = 0; s < 7; ++s) {
            for (size_t j = 0; j < d; ++j) {
                double acc = y[j];
                for (int q = 0; q < s; ++q) acc += h * a[s][q] * k[static_cast<size_t>(q)][j];
                ytmp[j] = acc;
            }
            k[static_cast<size_t>(s)] = f(t + c[s] * h, ytmp);
        }
        double err = 0.0, scale = 0.0;
        for (size_t j = 0; j < d; ++j) {
            double s5 = y[j], s4 = y[j];
            for (int s = 0; s < 7; ++s) {
                s5 += h * b5[s] * k[static_cast<size_t>(s)][j];
                s4 += h * b4[s] * k[static_cast<size_t>(s)][j];
            }
            y5[j] = s5;
            y4[j] = s4;
            err = std::max(err, std::abs(s5 - s4));
            scale = std::max(scale, std::abs(s5));
        }
        const double bound = tol * std::max(1.0, scale);
        if (err <= bound) {
            t += h;
            y = y5;
        }
        const double ratio = err > 0.0 ? std::pow(bound / err, 0.2) : 4.0;
        h *= std::clamp(0.9 * ratio, 0.2, 4.0);
        if (h < 1e-15) throw std::runtime_error("integrate_ode45: step size underflow");
    }
    return y;
}

}  // namespace cmn

#endif
