#ifndef DISKFP_GRID_HPP
#define DISKFP_GRID_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diskfp/expr.hpp"

namespace diskfp {

class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Polar grid over the closed unit disk.  Radial nodes sit at cell centers
// r_j = (j + 1/2) h_r, so no node coincides with the origin or the
// boundary; the Dirichlet condition at r = 1 lives in ghost values only.
class Grid {
public:
    Grid(int nr, int ntheta) : nr_(nr), ntheta_(ntheta) {
        if (nr < 4) throw GridError("grid: Nr must be at least 4");
        if (ntheta < 8) throw GridError("grid: Ntheta must be at least 8");
        if (ntheta % 2 != 0) throw GridError("grid: Ntheta must be even");
        hr_ = 1.0 / nr;
        dtheta_ = 2.0 * kPi / ntheta;
    }

    int nr() const { return nr_; }
    int ntheta() const { return ntheta_; }
    int size() const { return nr_ * ntheta_; }
    double hr() const { return hr_; }
    double dtheta() const { return dtheta_; }

    double radius(int j) const { return (j + 0.5) * hr_; }
    double theta(int k) const { return k * dtheta_; }
    double x1(int j, int k) const { return radius(j) * std::cos(theta(k)); }
    double x2(int j, int k) const { return radius(j) * std::sin(theta(k)); }

    // cell measure r_j * h_r * dtheta; rows scaled by this make the
    // Laplacian symmetric and give the midpoint quadrature weight
    double cellMeasure(int j) const { return radius(j) * hr_ * dtheta_; }

    int index(int j, int k) const { return j * ntheta_ + k; }

    bool operator==(const Grid& other) const {
        return nr_ == other.nr_ && ntheta_ == other.ntheta_;
    }
    bool operator!=(const Grid& other) const { return !(*this == other); }

    static constexpr double kPi = 3.14159265358979323846;

private:
    int nr_;
    int ntheta_;
    double hr_;
    double dtheta_;
};

// Real-valued function sampled at the grid nodes, (j outer, k inner).
class GridFunction {
public:
    GridFunction(const Grid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != grid_.size())
            throw GridError("grid function: value count does not match the grid");
        for (double x : values_)
            if (!std::isfinite(x))
                throw GridError("grid function: values must be finite");
    }

    static GridFunction zeros(const Grid& grid) {
        return GridFunction(grid, std::vector<double>(grid.size(), 0.0));
    }

    static GridFunction constant(const Grid& grid, double c) {
        return GridFunction(grid, std::vector<double>(grid.size(), c));
    }

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double value(int j, int k) const { return values_[grid_.index(j, k)]; }
    double operator[](int i) const { return values_[i]; }
    int size() const { return grid_.size(); }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline double norm_inf(const GridFunction& gf) {
    double m = 0.0;
    for (double x : gf.values()) m = std::max(m, std::fabs(x));
    return m;
}

// Midpoint-rule integral over the disk: sum of value * r_j * h_r * dtheta.
inline double integrate(const GridFunction& gf) {
    const Grid& g = gf.grid();
    double sum = 0.0;
    for (int j = 0; j < g.nr(); ++j) {
        double ring = 0.0;
        for (int k = 0; k < g.ntheta(); ++k) ring += gf.value(j, k);
        sum += ring * g.cellMeasure(j);
    }
    return sum;
}

// sup over |x| = x_norm of the Green's integral of the constant 1 on the
// unit ball in R^n: the radial solution of -Delta w = 1, w(1) = 0, which
// is (1 - |x|^2) / (2n).
inline double greens_mass(double x_norm, int n) {
    if (!(x_norm >= 0.0 && x_norm <= 1.0))
        throw GridError("greens_mass: x_norm must lie in [0, 1]");
    if (n < 1) throw GridError("greens_mass: dimension must be at least 1");
    return (1.0 - x_norm * x_norm) / (2.0 * n);
}

// Pointwise evaluation of an expression at the grid nodes with
// x1 = r cos(theta), x2 = r sin(theta).  Grid functions for u and v are
// required exactly when the expression references them.
inline GridFunction sample(const Expr& expr, const Grid& grid,
                           const GridFunction* u = nullptr,
                           const GridFunction* v = nullptr) {
    if (expr.usesU() && u == nullptr)
        throw GridError("sample: expression references u but no grid function was supplied");
    if (expr.usesV() && v == nullptr)
        throw GridError("sample: expression references v but no grid function was supplied");
    if (u != nullptr && u->grid() != grid)
        throw GridError("sample: u lives on a different grid");
    if (v != nullptr && v->grid() != grid)
        throw GridError("sample: v lives on a different grid");

    std::vector<double> values(grid.size());
    for (int j = 0; j < grid.nr(); ++j) {
        const double r = grid.radius(j);
        for (int k = 0; k < grid.ntheta(); ++k) {
            const double th = grid.theta(k);
            const double x1 = r * std::cos(th);
            const double x2 = r * std::sin(th);
            const double uv = u ? u->value(j, k) : 0.0;
            const double vv = v ? v->value(j, k) : 0.0;
            try {
                values[grid.index(j, k)] = expr.eval(x1, x2, uv, vv);
            } catch (const EvalError& err) {
                std::ostringstream msg;
                msg << "sample: " << err.what() << " at node (j=" << j << ", k=" << k
                    << "), x=(" << x1 << ", " << x2 << ")";
                throw EvalError(msg.str());
            }
        }
    }
    return GridFunction(grid, std::move(values));
}

// CSV schema: header "x,y,value", one row per node in (j outer, k inner)
// order, 17 significant digits.
inline void write_csv(const GridFunction& gf, std::ostream& out) {
    const Grid& g = gf.grid();
    out << "x,y,value\n";
    char buf[128];
    for (int j = 0; j < g.nr(); ++j)
        for (int k = 0; k < g.ntheta(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n",
                          g.x1(j, k), g.x2(j, k), gf.value(j, k));
            out << buf;
        }
}

inline void write_csv(const GridFunction& gf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw GridError("cannot open '" + path + "' for writing");
    write_csv(gf, out);
    if (!out) throw GridError("failed while writing '" + path + "'");
}

inline GridFunction read_csv(std::istream& in, const Grid& grid) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,value", 0) != 0)
        throw GridError("grid CSV: missing 'x,y,value' header");
    std::vector<double> values;
    values.reserve(grid.size());
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= grid.size())
            throw GridError("grid CSV: more rows than grid nodes");
        const int j = row / grid.ntheta();
        const int k = row % grid.ntheta();
        double x, y, val;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &val) != 3)
            throw GridError("grid CSV: malformed row " + std::to_string(row + 2));
        if (std::fabs(x - grid.x1(j, k)) > 1e-9 || std::fabs(y - grid.x2(j, k)) > 1e-9)
            throw GridError("grid CSV: node coordinates at row " + std::to_string(row + 2) +
                            " do not match the grid");
        values.push_back(val);
        ++row;
    }
    if (row != grid.size())
        throw GridError("grid CSV: expected " + std::to_string(grid.size()) +
                        " rows, found " + std::to_string(row));
    return GridFunction(grid, std::move(values));
}

inline GridFunction read_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw GridError("cannot open '" + path + "' for reading");
    return read_csv(in, grid);
}

}  // namespace diskfp

#endif  // DISKFP_GRID_HPP
