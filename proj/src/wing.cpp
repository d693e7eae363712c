#include "flapopt/wing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

namespace flapopt {

const Eigen::VectorXd& baseline_camber_profile() {
    static const Eigen::VectorXd z = [] {
        Eigen::VectorXd v(7);
        v << 0.0, 0.089250, 0.126467, 0.034380, 0.091453, 0.031200, 0.0;
        return v;
    }();
    return z;
}

ControlNet baseline_net(Eigen::Index n_chord_ctrl, Eigen::Index n_span_ctrl, int degree_u,
                        int degree_v, double semispan, bool cambered) {
    if (n_chord_ctrl < degree_u + 1 || n_span_ctrl < degree_v + 1)
        throw ValidationError("control counts incompatible with degrees");
    if (cambered && n_chord_ctrl != baseline_camber_profile().size())
        throw ValidationError("cambered baseline uses the 7-point section profile");
    if (semispan <= 0.0) throw ValidationError("semispan must be positive");

    ControlNet net;
    net.degree_u = degree_u;
    net.degree_v = degree_v;
    net.knots_u = KnotVector::clamped_uniform(n_chord_ctrl, degree_u);
    net.knots_v = KnotVector::clamped_uniform(n_span_ctrl, degree_v);

    // Greville placement makes x(xi) and y(eta) exactly linear.
    Eigen::VectorXd gx = greville_abscissae(net.knots_u, degree_u);
    Eigen::VectorXd gy = greville_abscissae(net.knots_v, degree_v) * semispan;
    net.x = gx.replicate(1, n_span_ctrl);
    net.y = gy.transpose().replicate(n_chord_ctrl, 1);
    net.z = cambered ? Eigen::MatrixXd(baseline_camber_profile().replicate(1, n_span_ctrl))
                     : Eigen::MatrixXd::Zero(n_chord_ctrl, n_span_ctrl);
    net.validate();
    return net;
}

namespace {

void add_row_dofs(std::vector<DofEntry>& dofs, int row, bool is_root, bool is_tip) {
    if (is_root) {
        // chordwise scale anchored at the fixed root trailing-edge point
        dofs.push_back({DofMode::ScaleX, row, -1, 1.0});
        return;
    }
    dofs.push_back({DofMode::ScaleX, row, -1, 0.5});
    dofs.push_back({DofMode::TranslateX, row, -1, 0.0});
    if (is_tip) dofs.push_back({DofMode::TranslateY, row, -1, 0.0});
}

} // namespace

WingParametrization baseline_wing(DofScheme scheme, int degree, double semispan, bool cambered) {
    WingParametrization param;
    param.chord = kBaselineChord;

    const Eigen::Index n_chord = 7;
    Eigen::Index n_span = 0;
    int deg_v = degree;
    switch (scheme) {
        case DofScheme::Baseline:
            n_span = 2;
            deg_v = 1;
            break;
        case DofScheme::SingleKnotSpan:
            if (degree < 1 || degree > 5)
                throw ValidationError("single-knot-span scheme supports degrees 1..5");
            n_span = degree + 1;
            break;
        case DofScheme::Fixed12:
        case DofScheme::Camber:
        case DofScheme::LeadingOnly:
        case DofScheme::TrailingOnly:
            if (degree < 1 || degree > 5)
                throw ValidationError("scheme supports spanwise degrees 1..5");
            n_span = 6;
            break;
    }
    param.baseline_net = baseline_net(n_chord, n_span, 6, deg_v, semispan, cambered);

    const int last = int(n_span) - 1;
    switch (scheme) {
        case DofScheme::Baseline:
            break;
        case DofScheme::SingleKnotSpan:
        case DofScheme::Fixed12:
            for (int r = 0; r <= last; ++r) add_row_dofs(param.dofs, r, r == 0, r == last);
            break;
        case DofScheme::Camber:
            for (int r = 0; r <= last; ++r) add_row_dofs(param.dofs, r, r == 0, r == last);
            for (int c = 1; c + 1 < n_chord; ++c)
                param.dofs.push_back({DofMode::TranslateZ, -1, c, 0.0});
            break;
        case DofScheme::LeadingOnly:
        case DofScheme::TrailingOnly: {
            const double anchor = scheme == DofScheme::LeadingOnly ? 1.0 : 0.0;
            for (int r = 0; r <= last; ++r)
                param.dofs.push_back({DofMode::ScaleX, r, -1, anchor});
            param.dofs.push_back({DofMode::TranslateY, last, -1, 0.0});
            break;
        }
    }
    return param;
}

ControlNet apply_design(const WingParametrization& param, const Eigen::VectorXd& x) {
    if (x.size() != param.dof_count())
        throw ValidationError("design vector size does not match the DOF map");
    const double b = param.bound();
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (std::abs(x[k]) > b + 1e-12)
            throw BoundViolationError(int(k), x[k], -b, b);

    const ControlNet& bl = param.baseline_net;
    ControlNet net = bl;
    std::set<int> mapped_rows;

    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const DofEntry& d = param.dofs[k];
        const double v = x[k];
        switch (d.mode) {
            case DofMode::ScaleX: {
                Eigen::ArrayXd rel = bl.x.col(d.span_row).array() - d.anchor;
                const double dmax = rel.abs().maxCoeff();
                if (dmax < 1e-12)
                    throw ValidationError("degenerate scale-x row " + std::to_string(d.span_row));
                net.x.col(d.span_row) += (v / dmax) * rel.matrix();
                mapped_rows.insert(d.span_row);
                break;
            }
            case DofMode::TranslateX:
                net.x.col(d.span_row).array() += v;
                mapped_rows.insert(d.span_row);
                break;
            case DofMode::ScaleY: {
                Eigen::ArrayXd rel = bl.y.col(d.span_row).array();
                const double dmax = rel.abs().maxCoeff();
                if (dmax < 1e-12)
                    throw ValidationError("degenerate scale-y row " + std::to_string(d.span_row));
                net.y.col(d.span_row) += (v / dmax) * rel.matrix();
                mapped_rows.insert(d.span_row);
                break;
            }
            case DofMode::TranslateY:
                net.y.col(d.span_row).array() += v;
                mapped_rows.insert(d.span_row);
                break;
            case DofMode::TranslateZ:
                net.z.row(d.chord_col).array() += v;
                break;
        }
    }

    // Proportional redistribution of unmapped interior rows between their
    // nearest repositioned neighbours (boundary rows act as anchors).
    const Eigen::Index m = bl.span_count();
    if (!mapped_rows.empty()) {
        auto is_anchor = [&](Eigen::Index r) {
            return r == 0 || r == m - 1 || mapped_rows.count(int(r)) > 0;
        };
        for (Eigen::Index r = 1; r + 1 < m; ++r) {
            if (is_anchor(r)) continue;
            Eigen::Index lo = r - 1, hi = r + 1;
            while (!is_anchor(lo)) --lo;
            while (!is_anchor(hi)) ++hi;
            const double f =
                (bl.y(0, r) - bl.y(0, lo)) / (bl.y(0, hi) - bl.y(0, lo));
            net.y.col(r) = (1.0 - f) * net.y.col(lo) + f * net.y.col(hi);
            const double le_lo = net.x.col(lo).minCoeff(), le_hi = net.x.col(hi).minCoeff();
            const double ch_lo = net.x.col(lo).maxCoeff() - le_lo;
            const double ch_hi = net.x.col(hi).maxCoeff() - le_hi;
            const double le = (1.0 - f) * le_lo + f * le_hi;
            const double ch = (1.0 - f) * ch_lo + f * ch_hi;
            const double le_bl = bl.x.col(r).minCoeff();
            const double ch_bl = bl.x.col(r).maxCoeff() - le_bl;
            net.x.col(r) = (le + (ch / ch_bl) * (bl.x.col(r).array() - le_bl)).matrix();
        }
    }
    return net;
}

void refresh_panel_geometry(PanelMesh& mesh) {
    const Eigen::Index np = Eigen::Index(mesh.nc) * mesh.ns;
    mesh.collocation.resize(3, np);
    mesh.normal.resize(3, np);
    mesh.area.resize(np);
    std::vector<Eigen::Index> degenerate;
    for (int i = 0; i < mesh.nc; ++i) {
        for (int j = 0; j < mesh.ns; ++j) {
            const int c = mesh.panel_col[j];
            const Eigen::Vector3d p00 = mesh.corner(i, c), p10 = mesh.corner(i + 1, c);
            const Eigen::Vector3d p01 = mesh.corner(i, c + 1), p11 = mesh.corner(i + 1, c + 1);
            const Eigen::Index k = mesh.panel_index(i, j);
            const double a = 0.5 * (p10 - p00).cross(p01 - p00).norm() +
                             0.5 * (p10 - p11).cross(p01 - p11).norm();
            mesh.area[k] = a;
            if (!(a > 1e-14)) degenerate.push_back(k);
            Eigen::Vector3d nrm = (p11 - p00).cross(p01 - p10);
            const double nn = nrm.norm();
            mesh.normal.col(k) = nn > 0 ? Eigen::Vector3d(nrm / nn) : Eigen::Vector3d(0, 0, 1);
            const Eigen::Vector3d fm = 0.5 * (p00 + p01), rm = 0.5 * (p10 + p11);
            mesh.collocation.col(k) = fm + 0.75 * (rm - fm);
        }
    }
    if (!degenerate.empty()) {
        std::ostringstream msg;
        msg << "degenerate panels:";
        for (Eigen::Index k : degenerate) msg << ' ' << k;
        throw MeshError(msg.str());
    }
}

namespace {

PanelMesh mesh_from_grid(int nc, int ns, int corner_cols, Eigen::Matrix3Xd corners,
                         Eigen::VectorXd corner_side, std::vector<int> panel_col) {
    PanelMesh mesh;
    mesh.nc = nc;
    mesh.ns = ns;
    mesh.corner_cols = corner_cols;
    mesh.corners = std::move(corners);
    mesh.corner_side = std::move(corner_side);
    mesh.panel_col = std::move(panel_col);
    mesh.panel_side.resize(Eigen::Index(nc) * ns);
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < ns; ++j) {
            const int c = mesh.panel_col[j];
            mesh.panel_side[mesh.panel_index(i, j)] =
                mesh.corner_side[c] + mesh.corner_side[c + 1] >= 0 ? 1.0 : -1.0;
        }
    refresh_panel_geometry(mesh);
    return mesh;
}

Eigen::Matrix3Xd sample_patch(const ControlNet& net, int nc, int ns) {
    net.validate();
    const double u0 = net.knots_u.domain_start(net.degree_u);
    const double u1 = net.knots_u.domain_end(net.degree_u);
    const double v0 = net.knots_v.domain_start(net.degree_v);
    const double v1 = net.knots_v.domain_end(net.degree_v);
    Eigen::Matrix3Xd pts(3, Eigen::Index(nc + 1) * (ns + 1));
    for (int i = 0; i <= nc; ++i) {
        const double u = u0 + (u1 - u0) * double(i) / nc;
        for (int j = 0; j <= ns; ++j) {
            const double v = v0 + (v1 - v0) * double(j) / ns;
            pts.col(Eigen::Index(i) * (ns + 1) + j) = evaluate_surface(net, u, v);
        }
    }
    return pts;
}

} // namespace

PanelMesh sample_mesh(const ControlNet& net, int n_chord, int n_span) {
    if (n_chord < 1 || n_span < 1) throw ValidationError("mesh needs at least one panel per direction");
    Eigen::Matrix3Xd pts = sample_patch(net, n_chord, n_span);
    Eigen::VectorXd side(Eigen::Index(n_chord + 1) * (n_span + 1));
    for (Eigen::Index k = 0; k < pts.cols(); ++k) side[k] = pts(1, k) < 0 ? -1.0 : 1.0;
    std::vector<int> pcol(n_span);
    for (int j = 0; j < n_span; ++j) pcol[j] = j;
    return mesh_from_grid(n_chord, n_span, n_span + 1, std::move(pts), std::move(side),
                          std::move(pcol));
}

PanelMesh generate_mesh(const ControlNet& net, int n_chord, int n_span) {
    if (n_chord < 1 || n_span < 1) throw ValidationError("mesh needs at least one panel per direction");
    Eigen::Matrix3Xd half = sample_patch(net, n_chord, n_span);
    const int h = n_span;                 // panels per half
    const int cols = 2 * (h + 1);         // one root corner column per half
    Eigen::Matrix3Xd pts(3, Eigen::Index(n_chord + 1) * cols);
    Eigen::VectorXd side(pts.cols());
    auto half_k = [&](int i, int j) { return Eigen::Index(i) * (h + 1) + j; };
    for (int i = 0; i <= n_chord; ++i) {
        for (int c = 0; c < cols; ++c) {
            const Eigen::Index k = Eigen::Index(i) * cols + c;
            if (c <= h) {   // left half, tip -> root, mirrored
                Eigen::Vector3d p = half.col(half_k(i, h - c));
                p.y() = -p.y();
                pts.col(k) = p;
                side[k] = -1.0;
            } else {        // right half, root -> tip
                pts.col(k) = half.col(half_k(i, c - h - 1));
                side[k] = 1.0;
            }
        }
    }
    std::vector<int> pcol(2 * h);
    for (int j = 0; j < 2 * h; ++j) pcol[j] = j < h ? j : j + 1;
    return mesh_from_grid(n_chord, 2 * h, cols, std::move(pts), std::move(side), std::move(pcol));
}

double wing_area(const PanelMesh& mesh) { return mesh.area.sum(); }

double panel_corner_angles(const PanelMesh& mesh) {
    double worst = 0.0;
    for (int i = 0; i < mesh.nc; ++i) {
        for (int j = 0; j < mesh.ns; ++j) {
            const int c = mesh.panel_col[j];
            Eigen::Vector2d q[4] = {mesh.corner(i, c).head<2>(), mesh.corner(i + 1, c).head<2>(),
                                    mesh.corner(i + 1, c + 1).head<2>(),
                                    mesh.corner(i, c + 1).head<2>()};
            for (int k = 0; k < 4; ++k) {
                const Eigen::Vector2d a = q[(k + 3) % 4] - q[k];
                const Eigen::Vector2d b = q[(k + 1) % 4] - q[k];
                const double na = a.norm(), nb = b.norm();
                if (na < 1e-14 || nb < 1e-14)
                    throw GeometryError("zero-length projected edge at panel " +
                                        std::to_string(mesh.panel_index(i, j)));
                const double cosang = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
                worst = std::max(worst, std::abs(std::acos(cosang) - M_PI / 2));
            }
        }
    }
    return worst;
}

void write_mesh_csv(std::ostream& os, const PanelMesh& mesh) {
    os << "panel,c1x,c1y,c1z,c2x,c2y,c2z,c3x,c3y,c3z,c4x,c4y,c4z,"
          "collx,colly,collz,nx,ny,nz,area\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.6g%c", v, sep);
        os << buf;
    };
    for (int i = 0; i < mesh.nc; ++i) {
        for (int j = 0; j < mesh.ns; ++j) {
            const int c = mesh.panel_col[j];
            const Eigen::Index k = mesh.panel_index(i, j);
            os << k << ',';
            for (const Eigen::Vector3d& p :
                 {mesh.corner(i, c), mesh.corner(i + 1, c), mesh.corner(i + 1, c + 1),
                  mesh.corner(i, c + 1)})
                for (int d = 0; d < 3; ++d) put(p[d], ',');
            for (int d = 0; d < 3; ++d) put(mesh.collocation(d, k), ',');
            for (int d = 0; d < 3; ++d) put(mesh.normal(d, k), ',');
            put(mesh.area[k], '\n');
        }
    }
}

} // namespace flapopt
