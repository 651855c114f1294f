#include "cmn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cmn {

double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi / 3.0;
        default:
            if (n < 1) throw std::invalid_argument("unit_ball_volume: n must be >= 1");
            return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
    }
}

namespace {
double int_pow(double x, int n) {
    double p = 1.0;
    for (int k = 0; k < n; ++k) p *= x;
    return p;
}
}  // namespace

RadialGrid::RadialGrid(int n, double radius, std::vector<double> faces)
    : n_(n), radius_(radius), faces_(std::move(faces)) {
    if (n != 2 && n != 3) throw std::invalid_argument("RadialGrid: dimension must be 2 or 3");
    if (radius <= 0.0) throw std::invalid_argument("RadialGrid: radius must be positive");
    if (faces_.size() < 2) throw std::invalid_argument("RadialGrid: need at least one cell");

    const double ball = unit_ball_volume(n_);
    const size_t m = faces_.size() - 1;
    centers_.resize(m);
    measures_.resize(m);
    face_areas_.resize(m + 1);
    face_pow_n_.resize(m + 1);

    for (size_t i = 0; i <= m; ++i) {
        face_pow_n_[i] = int_pow(faces_[i], n_);
        face_areas_[i] = n_ * ball * int_pow(faces_[i], n_ - 1);
    }
    for (size_t i = 0; i < m; ++i) {
        if (!(faces_[i + 1] > faces_[i]))
            throw std::invalid_argument("RadialGrid: faces must be strictly increasing");
        centers_[i] = 0.5 * (faces_[i] + faces_[i + 1]);
        measures_[i] = ball * (face_pow_n_[i + 1] - face_pow_n_[i]);
    }
    domain_volume_ = ball * face_pow_n_[m];
}

std::shared_ptr<const RadialGrid> RadialGrid::uniform(int n, double radius, int cells) {
    if (cells < 1) throw std::invalid_argument("RadialGrid::uniform: cells must be >= 1");
    std::vector<double> faces(static_cast<size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i)
        faces[static_cast<size_t>(i)] = radius * static_cast<double>(i) / cells;
    faces.front() = 0.0;
    faces.back() = radius;
    return std::shared_ptr<const RadialGrid>(new RadialGrid(n, radius, std::move(faces)));
}

std::shared_ptr<const RadialGrid> RadialGrid::stretched(int n, double radius, int cells,
                                                        double growth) {
    if (cells < 1) throw std::invalid_argument("RadialGrid::stretched: cells must be >= 1");
    if (growth < 1.0) throw std::invalid_argument("RadialGrid::stretched: growth must be >= 1");
    if (growth == 1.0) return uniform(n, radius, cells);
    // widths h0 * growth^i, scaled so they sum to R
    std::vector<double> faces(static_cast<size_t>(cells) + 1, 0.0);
    double w = 1.0, sum = 0.0;
    for (int i = 0; i < cells; ++i) {
        sum += w;
        faces[static_cast<size_t>(i) + 1] = sum;
        w *= growth;
    }
    const double scale = radius / sum;
    for (auto& f : faces) f *= scale;
    faces.front() = 0.0;
    faces.back() = radius;
    return std::shared_ptr<const RadialGrid>(new RadialGrid(n, radius, std::move(faces)));
}

double RadialGrid::partial_measure(int i, double r) const {
    const double ball = unit_ball_volume(n_);
    return ball * (int_pow(r, n_) - face_pow_n_[static_cast<size_t>(i)]);
}

int RadialGrid::locate(double r) const {
    if (r < 0.0 || r > radius_)
        throw std::invalid_argument("RadialGrid::locate: r outside [0, R]");
    auto it = std::upper_bound(faces_.begin(), faces_.end(), r);
    int i = static_cast<int>(it - faces_.begin()) - 1;
    return std::clamp(i, 0, cells() - 1);
}

Field::Field(GridPtr g, double fill)
    : grid(std::move(g)), values(static_cast<size_t>(grid->cells()), fill) {}

Field::Field(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid->cells())
        throw std::invalid_argument("Field: value count must match grid cell count");
}

double integral(const Field& f) {
    const auto& w = f.grid->cell_measures();
    double s = 0.0;
    for (size_t i = 0; i < f.values.size(); ++i) s += w[i] * f.values[i];
    return s;
}

double lp_norm(const Field& f, double p) {
    if (std::isinf(p) && p > 0) return lp_norm_inf(f);
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1 or infinity");
    const auto& w = f.grid->cell_measures();
    double s = 0.0;
    for (size_t i = 0; i < f.values.size(); ++i) s += w[i] * std::pow(std::abs(f.values[i]), p);
    return std::pow(s, 1.0 / p);
}

double lp_norm_inf(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double ball_mass(const Field& f, double r) {
    const auto& grid = *f.grid;
    if (r < 0.0 || r > grid.radius())
        throw std::invalid_argument("ball_mass: r outside [0, R]");
    if (r == 0.0) return 0.0;
    const auto& w = grid.cell_measures();
    const auto& faces = grid.faces();
    double s = 0.0;
    for (int i = 0; i < grid.cells(); ++i) {
        if (faces[static_cast<size_t>(i) + 1] <= r) {
            s += w[static_cast<size_t>(i)] * f.values[static_cast<size_t>(i)];
        } else {
            s += grid.partial_measure(i, r) * f.values[static_cast<size_t>(i)];
            break;
        }
    }
    return s;
}

double min_value(const Field& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : f.values) m = std::min(m, v);
    return m;
}

double max_value(const Field& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : f.values) m = std::max(m, v);
    return m;
}

Field restrict_to(const Field& fine, const GridPtr& coarse) {
    const int mc = coarse->cells();
    const int mf = fine.grid->cells();
    if (mf % mc != 0)
        throw std::invalid_argument("restrict_to: fine cell count must be a multiple of coarse");
    const int ratio = mf / mc;
    Field out(coarse, 0.0);
    const auto& wf = fine.grid->cell_measures();
    for (int i = 0; i < mc; ++i) {
        double mass = 0.0, vol = 0.0;
        for (int k = 0; k < ratio; ++k) {
            const size_t j = static_cast<size_t>(i * ratio + k);
            mass += wf[j] * fine.values[j];
            vol += wf[j];
        }
        out[i] = mass / vol;
    }
    return out;
}

}  // namespace cmn
