#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

#include "flapopt/errors.hpp"

namespace flapopt {

/// Absolute slack allowed when testing parametric-domain membership.
inline constexpr double kDomainTol = 1e-12;

/// Non-decreasing knot sequence. Construction validates monotonicity.
class KnotVector {
public:
    KnotVector() = default;
    explicit KnotVector(Eigen::VectorXd knots);

    const Eigen::VectorXd& values() const { return knots_; }
    Eigen::Index size() const { return knots_.size(); }
    double operator[](Eigen::Index i) const { return knots_[i]; }

    /// Number of basis functions for a given degree: size - degree - 1.
    Eigen::Index basis_count(int degree) const;

    /// Parametric domain [xi_{p+1}, xi_{n+1}] for a given degree.
    double domain_start(int degree) const;
    double domain_end(int degree) const;

    /// Clamped (open) uniform knot vector for n control points of degree p.
    static KnotVector clamped_uniform(Eigen::Index n, int degree);

private:
    Eigen::VectorXd knots_;
};

/// All n basis values N_{1,p}(xi)..N_{n,p}(xi), Cox-de Boor with 0/0 -> 0.
/// Throws std::domain_error if xi is outside the domain (beyond kDomainTol).
Eigen::VectorXd basis_functions(const KnotVector& knots, int degree, double xi);

/// Greville abscissae (averages of p consecutive interior knots). A spline with
/// control values at these points reproduces linear functions exactly.
Eigen::VectorXd greville_abscissae(const KnotVector& knots, int degree);

/// Curve point: sum_i N_{i,p}(xi) P_i for control points given as columns.
Eigen::Vector3d evaluate_curve(const Eigen::Matrix3Xd& points, const KnotVector& knots,
                               int degree, double xi);

/// Tensor-product control net. Grids are chord-index by span-index
/// (x(i,j), y(i,j), z(i,j)); u runs chordwise, v spanwise.
struct ControlNet {
    Eigen::MatrixXd x, y, z;
    int degree_u = 0;
    int degree_v = 0;
    KnotVector knots_u, knots_v;

    Eigen::Index chord_count() const { return x.rows(); }
    Eigen::Index span_count() const { return x.cols(); }

    /// Throws ValidationError on inconsistent grid/degree/knot sizes.
    void validate() const;
};

/// Surface point S(xi, eta) = sum_ij N_i(xi) M_j(eta) P_ij.
Eigen::Vector3d evaluate_surface(const ControlNet& net, double xi, double eta);

/// Plain-text control-net table: header lines carry degrees and knot vectors,
/// then one row per control point with columns (i, j, x, y, z) where i is the
/// span station and j the chordwise index, mirroring the published table layout.
void write_control_net(std::ostream& os, const ControlNet& net);
void write_control_net_file(const std::string& path, const ControlNet& net);
ControlNet read_control_net(std::istream& is);
ControlNet read_control_net_file(const std::string& path);

} // namespace flapopt
