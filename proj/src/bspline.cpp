#include "flapopt/bspline.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace flapopt {

KnotVector::KnotVector(Eigen::VectorXd knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2)
        throw ValidationError("knot vector needs at least 2 knots");
    for (Eigen::Index i = 0; i + 1 < knots_.size(); ++i)
        if (knots_[i] > knots_[i + 1])
            throw ValidationError("knot vector is not non-decreasing at index " +
                                  std::to_string(i));
}

Eigen::Index KnotVector::basis_count(int degree) const {
    if (degree < 0) throw ValidationError("negative degree");
    Eigen::Index n = knots_.size() - degree - 1;
    if (n < 1)
        throw ValidationError("knot vector too short for degree " + std::to_string(degree));
    return n;
}

double KnotVector::domain_start(int degree) const {
    basis_count(degree);
    return knots_[degree];
}

double KnotVector::domain_end(int degree) const {
    return knots_[basis_count(degree)];
}

KnotVector KnotVector::clamped_uniform(Eigen::Index n, int degree) {
    if (degree < 0 || n < degree + 1)
        throw ValidationError("need at least degree+1 control points");
    Eigen::Index spans = n - degree;
    Eigen::VectorXd k(n + degree + 1);
    for (Eigen::Index i = 0; i <= degree; ++i) k[i] = 0.0;
    for (Eigen::Index i = 1; i < spans; ++i) k[degree + i] = double(i) / double(spans);
    for (Eigen::Index i = 0; i <= degree; ++i) k[n + i] = 1.0;
    return KnotVector(k);
}

Eigen::VectorXd basis_functions(const KnotVector& kv, int degree, double xi) {
    const Eigen::VectorXd& t = kv.values();
    const Eigen::Index n = kv.basis_count(degree);
    const double lo = t[degree], hi = t[n];
    if (xi < lo - kDomainTol || xi > hi + kDomainTol)
        throw std::domain_error("parameter " + std::to_string(xi) + " outside domain [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
    xi = std::min(std::max(xi, lo), hi);

    // Degree-0 seed: indicator of the containing half-open span; the last
    // nonempty span is closed on the right so the domain end evaluates.
    Eigen::VectorXd N = Eigen::VectorXd::Zero(t.size() - 1);
    if (xi >= hi) {
        for (Eigen::Index i = t.size() - 2; i >= 0; --i)
            if (t[i] < t[i + 1] && xi <= t[i + 1]) { N[i] = 1.0; break; }
    } else {
        for (Eigen::Index i = 0; i + 1 < t.size(); ++i)
            if (t[i] <= xi && xi < t[i + 1]) { N[i] = 1.0; break; }
    }
    for (int p = 1; p <= degree; ++p) {
        for (Eigen::Index i = 0; i + p + 1 < t.size(); ++i) {
            double a = 0.0, b = 0.0;
            if (t[i + p] > t[i]) a = (xi - t[i]) / (t[i + p] - t[i]) * N[i];
            if (t[i + p + 1] > t[i + 1])
                b = (t[i + p + 1] - xi) / (t[i + p + 1] - t[i + 1]) * N[i + 1];
            N[i] = a + b;
        }
    }
    return N.head(n);
}

Eigen::VectorXd greville_abscissae(const KnotVector& kv, int degree) {
    const Eigen::Index n = kv.basis_count(degree);
    Eigen::VectorXd g(n);
    if (degree == 0) {
        for (Eigen::Index i = 0; i < n; ++i) g[i] = 0.5 * (kv[i] + kv[i + 1]);
        return g;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 1; k <= degree; ++k) s += kv[i + k];
        g[i] = s / degree;
    }
    return g;
}

Eigen::Vector3d evaluate_curve(const Eigen::Matrix3Xd& points, const KnotVector& knots,
                               int degree, double xi) {
    if (points.cols() != knots.basis_count(degree))
        throw ValidationError("control point count does not match knot vector/degree");
    Eigen::VectorXd N = basis_functions(knots, degree, xi);
    return points * N;
}

void ControlNet::validate() const {
    const Eigen::Index n = x.rows(), m = x.cols();
    if (n == 0 || m == 0) throw ValidationError("empty control net");
    if (y.rows() != n || y.cols() != m || z.rows() != n || z.cols() != m)
        throw ValidationError("control net coordinate grids have mismatched shapes");
    if (n < degree_u + 1 || m < degree_v + 1)
        throw ValidationError("control net too small for its degrees");
    if (knots_u.size() != n + degree_u + 1)
        throw ValidationError("chordwise knot vector length must be n+p+1");
    if (knots_v.size() != m + degree_v + 1)
        throw ValidationError("spanwise knot vector length must be m+q+1");
}

Eigen::Vector3d evaluate_surface(const ControlNet& net, double xi, double eta) {
    Eigen::VectorXd Nu = basis_functions(net.knots_u, net.degree_u, xi);
    Eigen::VectorXd Nv = basis_functions(net.knots_v, net.degree_v, eta);
    return {Nu.dot(net.x * Nv), Nu.dot(net.y * Nv), Nu.dot(net.z * Nv)};
}

namespace {

void write_knots(std::ostream& os, const char* name, const KnotVector& kv) {
    os << "# " << name;
    for (Eigen::Index i = 0; i < kv.size(); ++i) os << ' ' << kv[i];
    os << '\n';
}

} // namespace

void write_control_net(std::ostream& os, const ControlNet& net) {
    net.validate();
    os << "# control-net\n";
    os << "# degrees " << net.degree_u << ' ' << net.degree_v << '\n';
    write_knots(os, "knots_u", net.knots_u);
    write_knots(os, "knots_v", net.knots_v);
    os << "# i j x y z\n";
    os << std::setprecision(6) << std::fixed;
    for (Eigen::Index i = 0; i < net.span_count(); ++i)
        for (Eigen::Index j = 0; j < net.chord_count(); ++j)
            os << i << ' ' << j << ' ' << net.x(j, i) << ' ' << net.y(j, i) << ' '
               << net.z(j, i) << '\n';
}

void write_control_net_file(const std::string& path, const ControlNet& net) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open " + path + " for writing");
    write_control_net(os, net);
}

ControlNet read_control_net(std::istream& is) {
    ControlNet net;
    bool have_degrees = false, have_ku = false, have_kv = false;
    std::vector<std::tuple<int, int, double, double, double>> rows;
    int max_i = -1, max_j = -1;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "degrees") {
                ls >> net.degree_u >> net.degree_v;
                have_degrees = true;
            } else if (key == "knots_u" || key == "knots_v") {
                std::vector<double> k;
                double v;
                while (ls >> v) k.push_back(v);
                Eigen::VectorXd kk = Eigen::Map<Eigen::VectorXd>(k.data(), k.size());
                (key == "knots_u" ? net.knots_u : net.knots_v) = KnotVector(kk);
                (key == "knots_u" ? have_ku : have_kv) = true;
            }
            continue;
        }
        int i, j;
        double x, y, z;
        if (!(ls >> i >> j >> x >> y >> z))
            throw ValidationError("malformed control-net row: " + line);
        rows.emplace_back(i, j, x, y, z);
        max_i = std::max(max_i, i);
        max_j = std::max(max_j, j);
    }
    if (!have_degrees || !have_ku || !have_kv)
        throw ValidationError("control-net table is missing degree/knot headers");
    if (rows.empty()) throw ValidationError("control-net table has no points");
    const Eigen::Index n = max_j + 1, m = max_i + 1;
    if (Eigen::Index(rows.size()) != n * m)
        throw ValidationError("control-net table is not a full rectangular grid");
    net.x.setZero(n, m);
    net.y.setZero(n, m);
    net.z.setZero(n, m);
    for (auto& [i, j, x, y, z] : rows) {
        net.x(j, i) = x;
        net.y(j, i) = y;
        net.z(j, i) = z;
    }
    net.validate();
    return net;
}

ControlNet read_control_net_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open " + path);
    return read_control_net(is);
}

} // namespace flapopt
