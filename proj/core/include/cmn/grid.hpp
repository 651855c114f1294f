#ifndef CMN_GRID_HPP
#define CMN_GRID_HPP

#include <memory>
#include <vector>

namespace cmn {

/// Volume of the unit ball in R^n. Exact constants for n = 2, 3.
double unit_ball_volume(int n);

/// Cell-centered radial mesh on [0, R] carrying exact n-ball measures.
///
/// Cell i spans [faces[i], faces[i+1]]; its measure is the true volume of
/// the spherical shell, |B1| * (faces[i+1]^n - faces[i]^n), so the discrete
/// integral of 1 over the mesh is |B1| * R^n with no quadrature error.
/// The face area at r = 0 is exactly zero, which keeps the discrete radial
/// operator regular at the origin without any special casing.
class RadialGrid {
public:
    /// Uniform mesh with `cells` cells.
    static std::shared_ptr<const RadialGrid> uniform(int n, double radius, int cells);

    /// Geometrically graded mesh, finest near r = 0. `growth` > 1 is the
    /// cell-to-cell width ratio; growth == 1 reduces to the uniform mesh.
    static std::shared_ptr<const RadialGrid> stretched(int n, double radius, int cells,
                                                       double growth);

    int dimension() const { return n_; }
    double radius() const { return radius_; }
    int cells() const { return static_cast<int>(centers_.size()); }

    /// |Omega| = |B1| * R^n.
    double domain_volume() const { return domain_volume_; }

    const std::vector<double>& faces() const { return faces_; }
    const std::vector<double>& centers() const { return centers_; }
    const std::vector<double>& cell_measures() const { return measures_; }
    /// Area of face i (i in [0, cells]); face_areas()[0] == 0.
    const std::vector<double>& face_areas() const { return face_areas_; }
    /// faces^n; the natural abscissae of the cumulative-mass variable s = r^n.
    const std::vector<double>& face_powers() const { return face_pow_n_; }

    double face(int i) const { return faces_[static_cast<size_t>(i)]; }
    double center(int i) const { return centers_[static_cast<size_t>(i)]; }
    double measure(int i) const { return measures_[static_cast<size_t>(i)]; }
    double face_area(int i) const { return face_areas_[static_cast<size_t>(i)]; }

    /// Measure of the ball slice {face(i) <= |x| <= r} within cell i.
    double partial_measure(int i, double r) const;

    /// Index of the cell containing radius r (r in [0, R]).
    int locate(double r) const;

private:
    RadialGrid(int n, double radius, std::vector<double> faces);

    int n_;
    double radius_;
    double domain_volume_;
    std::vector<double> faces_;
    std::vector<double> centers_;
    std::vector<double> measures_;
    std::vector<double> face_areas_;
    std::vector<double> face_pow_n_;  // faces^n, reused by measures and ball_mass
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// One scalar value per cell of a radial grid.
struct Field {
    GridPtr grid;
    std::vector<double> values;

    Field() = default;
    Field(GridPtr g, double fill = 0.0);
    Field(GridPtr g, std::vector<double> v);

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int i) { return values[static_cast<size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<size_t>(i)]; }
};

/// Discrete integral over the whole ball: sum_i measure_i * f_i.
double integral(const Field& f);

/// L^p norm for p in [1, inf]. Pass std::numeric_limits<double>::infinity()
/// (or lp_norm_inf) for the sup norm. p < 1 is rejected.
double lp_norm(const Field& f, double p);
double lp_norm_inf(const Field& f);

/// Discrete integral of f over the ball of radius r, splitting the cell
/// containing r by its exact sub-cell measure. ball_mass(f, R) accumulates
/// the same terms as integral(f).
double ball_mass(const Field& f, double r);

double min_value(const Field& f);
double max_value(const Field& f);

/// Conservative restriction of a field on a 2x (or 4x, ...) refined uniform
/// mesh onto `coarse`: coarse value = measure-weighted mean of child cells.
Field restrict_to(const Field& fine, const GridPtr& coarse);

}  // namespace cmn

#endif
