#include "flapopt/uvlm.hpp"

#include <cmath>
#include <thread>

namespace flapopt {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * M_PI);

/// Contiguous per-axis copies of a point set; the hot kernels stream these.
struct Batch {
    std::vector<double> x, y, z;
    Eigen::Index n = 0;

    explicit Batch(const Eigen::Matrix3Xd& pts) : n(pts.cols()) {
        x.resize(n); y.resize(n); z.resize(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            x[k] = pts(0, k); y[k] = pts(1, k); z[k] = pts(2, k);
        }
    }
};

/// v += induced velocity of one segment at targets [lo, hi).
void segment_kernel(double p1x, double p1y, double p1z, double p2x, double p2y, double p2z,
                    double gamma, const Batch& t, Eigen::Index lo, Eigen::Index hi,
                    double core, double* vx, double* vy, double* vz) {
    const double r0x = p2x - p1x, r0y = p2y - p1y, r0z = p2z - p1z;
    const double l02 = r0x * r0x + r0y * r0y + r0z * r0z;
    if (l02 <= 0.0) return;  // zero-length (collapsed) segment induces nothing
    const double cut2 = core * core * l02;
    const double core2 = core * core;
    const double g4pi = gamma * kInv4Pi;
    for (Eigen::Index k = lo; k < hi; ++k) {
        const double r1x = t.x[k] - p1x, r1y = t.y[k] - p1y, r1z = t.z[k] - p1z;
        const double r2x = t.x[k] - p2x, r2y = t.y[k] - p2y, r2z = t.z[k] - p2z;
        const double cx = r1y * r2z - r1z * r2y;
        const double cy = r1z * r2x - r1x * r2z;
        const double cz = r1x * r2y - r1y * r2x;
        const double cr2 = cx * cx + cy * cy + cz * cz;
        const double n1sq = r1x * r1x + r1y * r1y + r1z * r1z;
        const double n2sq = r2x * r2x + r2y * r2y + r2z * r2z;
        if (cr2 <= cut2 || n1sq <= core2 || n2sq <= core2) continue;
        const double in1 = 1.0 / std::sqrt(n1sq);
        const double in2 = 1.0 / std::sqrt(n2sq);
        const double dot = r0x * (r1x * in1 - r2x * in2) + r0y * (r1y * in1 - r2y * in2) +
                           r0z * (r1z * in1 - r2z * in2);
        const double kf = g4pi * dot / cr2;
        vx[k] += kf * cx;
        vy[k] += kf * cy;
        vz[k] += kf * cz;
    }
}

void ring_kernel(const RingSet& rings, Eigen::Index r, double gamma, const Batch& t,
                 Eigen::Index lo, Eigen::Index hi, double core, double* vx, double* vy,
                 double* vz) {
    const double a0 = rings.c0(0, r), a1 = rings.c0(1, r), a2 = rings.c0(2, r);
    const double b0 = rings.c1(0, r), b1 = rings.c1(1, r), b2 = rings.c1(2, r);
    const double d0 = rings.c2(0, r), d1 = rings.c2(1, r), d2 = rings.c2(2, r);
    const double e0 = rings.c3(0, r), e1 = rings.c3(1, r), e2 = rings.c3(2, r);
    segment_kernel(a0, a1, a2, b0, b1, b2, gamma, t, lo, hi, core, vx, vy, vz);
    segment_kernel(b0, b1, b2, d0, d1, d2, gamma, t, lo, hi, core, vx, vy, vz);
    segment_kernel(d0, d1, d2, e0, e1, e2, gamma, t, lo, hi, core, vx, vy, vz);
    segment_kernel(e0, e1, e2, a0, a1, a2, gamma, t, lo, hi, core, vx, vy, vz);
}

/// Run fn(lo, hi) over a partition of [0, n); per-target sums keep a fixed
/// source order, so results do not depend on the worker count.
void parallel_ranges(Eigen::Index n, int workers, const std::function<void(Eigen::Index, Eigen::Index)>& fn) {
    if (workers <= 1 || n < 256) {
        fn(0, n);
        return;
    }
    const int w = std::min<int>(workers, int((n + 255) / 256));
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int i = 0; i < w; ++i) {
        const Eigen::Index lo = n * i / w, hi = n * (i + 1) / w;
        pool.emplace_back([&, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

} // namespace

Eigen::Vector3d segment_induced_velocity(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                                         double gamma, const Eigen::Vector3d& target,
                                         double core_radius) {
    if ((p2 - p1).norm() < 1e-15) throw GeometryError("vortex segment endpoints coincide");
    Eigen::Matrix3Xd t(3, 1);
    t.col(0) = target;
    Batch batch(t);
    double vx = 0, vy = 0, vz = 0;
    segment_kernel(p1.x(), p1.y(), p1.z(), p2.x(), p2.y(), p2.z(), gamma, batch, 0, 1,
                   core_radius, &vx, &vy, &vz);
    return {vx, vy, vz};
}

void RingSet::resize(Eigen::Index n) {
    c0.resize(3, n);
    c1.resize(3, n);
    c2.resize(3, n);
    c3.resize(3, n);
    gamma.resize(n);
}

Eigen::Vector3d RingSet::induced_velocity(Eigen::Index r, const Eigen::Vector3d& target,
                                          double core_radius) const {
    Eigen::Matrix3Xd t(3, 1);
    t.col(0) = target;
    Batch batch(t);
    double vx = 0, vy = 0, vz = 0;
    ring_kernel(*this, r, gamma[r], batch, 0, 1, core_radius, &vx, &vy, &vz);
    return {vx, vy, vz};
}

void add_induced_velocities(const RingSet& rings, const Eigen::Matrix3Xd& targets,
                            Eigen::Matrix3Xd& out, double core_radius, int workers) {
    const Eigen::Index m = targets.cols();
    if (out.cols() != m) throw ValidationError("output size mismatch");
    if (rings.size() == 0 || m == 0) return;
    Batch t(targets);
    std::vector<double> vx(m, 0.0), vy(m, 0.0), vz(m, 0.0);
    parallel_ranges(m, workers, [&](Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index r = 0; r < rings.size(); ++r)
            ring_kernel(rings, r, rings.gamma[r], t, lo, hi, core_radius, vx.data(), vy.data(),
                        vz.data());
    });
    for (Eigen::Index k = 0; k < m; ++k) {
        out(0, k) += vx[k];
        out(1, k) += vy[k];
        out(2, k) += vz[k];
    }
}

Eigen::MatrixXd influence_matrix(const RingSet& rings, const Eigen::Matrix3Xd& collocation,
                                 const Eigen::Matrix3Xd& normals, double core_radius,
                                 int workers) {
    const Eigen::Index m = collocation.cols(), n = rings.size();
    Eigen::MatrixXd A(m, n);
    Batch t(collocation);
    std::vector<double> vx(m), vy(m), vz(m);
    const auto fill = [&](Eigen::Index lo, Eigen::Index hi, Eigen::Index r) {
        std::fill(vx.begin() + lo, vx.begin() + hi, 0.0);
        std::fill(vy.begin() + lo, vy.begin() + hi, 0.0);
        std::fill(vz.begin() + lo, vz.begin() + hi, 0.0);
        ring_kernel(rings, r, 1.0, t, lo, hi, core_radius, vx.data(), vy.data(), vz.data());
        for (Eigen::Index k = lo; k < hi; ++k)
            A(k, r) = normals(0, k) * vx[k] + normals(1, k) * vy[k] + normals(2, k) * vz[k];
    };
    parallel_ranges(m, workers, [&](Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index r = 0; r < n; ++r) fill(lo, hi, r);
    });
    return A;
}

Eigen::VectorXd solve_circulations(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs) {
    if (A.rows() != A.cols() || A.rows() != rhs.size())
        throw ValidationError("influence system must be square and match the rhs");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rc = lu.rcond();
    if (!std::isfinite(rc) || rc < 1e-13)
        throw SolverError("no-penetration system is singular or near-singular", rc);
    Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite())
        throw SolverError("direct solve produced non-finite circulations", rc);
    const double resid = (A * x - rhs).norm();
    const double scale = A.norm() * x.norm();
    if (!(resid <= 1e-10 * scale + 1e-14))
        throw SolverError("direct solve residual " + std::to_string(resid) +
                              " exceeds tolerance", rc);
    return x;
}

Eigen::Matrix3Xd BoundLattice::trailing_line() const {
    Eigen::Matrix3Xd line(3, corner_cols);
    for (int c = 0; c < corner_cols; ++c) line.col(c) = ring_grid.col(grid_index(nc, c));
    return line;
}

BoundLattice build_lattice(const PanelMesh& mesh) {
    // The vortex system must stay continuous spanwise even where the panel
    // mesh is split at the root: mesh corner columns that back the same panel
    // edge collapse onto one lattice column (positions averaged), so no
    // spurious free edge appears inside the wing or its wake.
    BoundLattice lat;
    lat.nc = mesh.nc;
    lat.ns = mesh.ns;
    lat.corner_cols = mesh.ns + 1;
    lat.panel_col.resize(mesh.ns);
    for (int j = 0; j < mesh.ns; ++j) lat.panel_col[j] = j;

    std::vector<std::vector<int>> sources(lat.corner_cols);
    for (int j = 0; j < mesh.ns; ++j) {
        sources[j].push_back(mesh.panel_col[j]);
        sources[j + 1].push_back(mesh.panel_col[j] + 1);
    }
    for (auto& s : sources) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }

    lat.grid_side.resize(Eigen::Index(lat.nc + 1) * lat.corner_cols);
    lat.ring_grid.resize(3, lat.grid_side.size());
    for (int c = 0; c < lat.corner_cols; ++c) {
        for (int i = 0; i <= lat.nc; ++i) {
            Eigen::Vector3d pos = Eigen::Vector3d::Zero();
            double side = 0.0;
            for (int cc : sources[c]) {
                const Eigen::Vector3d g = mesh.corner(i, cc);
                // quarter-panel shift; the trailing line extrapolates past the TE
                const Eigen::Vector3d step =
                    i < lat.nc ? Eigen::Vector3d(mesh.corner(i + 1, cc) - g)
                               : Eigen::Vector3d(g - mesh.corner(i - 1, cc));
                pos += g + 0.25 * step;
                side += mesh.corner_side[mesh.corner_index(i, cc)];
            }
            const Eigen::Index k = lat.grid_index(i, c);
            lat.ring_grid.col(k) = pos / double(sources[c].size());
            lat.grid_side[k] = side > 0 ? 1.0 : (side < 0 ? -1.0 : 0.0);
        }
    }
    lat.rings.resize(Eigen::Index(lat.nc) * lat.ns);
    lat.rings.gamma.setZero();
    for (int i = 0; i < lat.nc; ++i) {
        for (int j = 0; j < lat.ns; ++j) {
            const Eigen::Index k = Eigen::Index(i) * lat.ns + j;
            lat.rings.c0.col(k) = lat.ring_grid.col(lat.grid_index(i, j));
            lat.rings.c1.col(k) = lat.ring_grid.col(lat.grid_index(i, j + 1));
            lat.rings.c2.col(k) = lat.ring_grid.col(lat.grid_index(i + 1, j + 1));
            lat.rings.c3.col(k) = lat.ring_grid.col(lat.grid_index(i + 1, j));
        }
    }
    return lat;
}

RingSet WakeState::active_rings(const Eigen::Vector3d& reference, double radius) const {
    const Eigen::Index rows = row_count();
    const double r2 = radius * radius;
    std::vector<std::pair<Eigen::Index, int>> keep;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Matrix3Xd& a = lines[r];
        const Eigen::Matrix3Xd& b = lines[r + 1];
        for (size_t j = 0; j < panel_col.size(); ++j) {
            const int c = panel_col[j];
            const Eigen::Vector3d cen = 0.25 * (a.col(c) + a.col(c + 1) + b.col(c) + b.col(c + 1)) -
                                        reference;
            if (cen.squaredNorm() <= r2) keep.emplace_back(r, int(j));
        }
    }
    RingSet set;
    set.resize(Eigen::Index(keep.size()));
    for (Eigen::Index k = 0; k < set.size(); ++k) {
        const auto [r, j] = keep[k];
        const int c = panel_col[j];
        set.c0.col(k) = lines[r].col(c);
        set.c1.col(k) = lines[r].col(c + 1);
        set.c2.col(k) = lines[r + 1].col(c + 1);
        set.c3.col(k) = lines[r + 1].col(c);
        set.gamma[k] = gammas[r][j];
    }
    return set;
}

void SimConfig::validate() const {
    motion.validate();
    if (n_ts < 8) throw ValidationError("n_ts must be at least 8");
    if (cycles < 1) throw ValidationError("cycles must be at least 1");
    if (!(truncation_radius > 0.0)) throw ValidationError("truncation radius must be positive");
    if (!(core_radius > 0.0)) throw ValidationError("core radius must be positive");
    if (workers < 1) throw ValidationError("workers must be at least 1");
}

namespace {

/// Net bound vortex segments for the Joukowski force sum. The trailing ring
/// line is omitted: it is cancelled by the wake row pinned there.
struct NetSegments {
    Eigen::Matrix3Xd p1, p2, mid;
    Eigen::VectorXd side;
    std::vector<std::pair<int, int>> chord_panel;  // (upper panel k, lower panel k) per segment
    std::vector<int> owner;                        // one adjacent panel (for gamma diff sign)
    // net gamma built per step from the panel circulation grid
};

} // namespace

SimResult simulate(const PanelMesh& body_mesh, const SimConfig& config,
                   const std::function<void(const SimFrame&)>& on_step) {
    config.validate();
    const FlappingMotion& motion = config.motion;
    const int nc = body_mesh.nc, ns = body_mesh.ns;
    const Eigen::Index np = Eigen::Index(nc) * ns;
    const double dt = motion.period() / config.n_ts;
    const int steps = config.n_ts * config.cycles;
    const Eigen::Vector3d u_inf(motion.u_inf, 0.0, 0.0);

    // the lattice (and the wake shed from it) uses contiguous spanwise columns
    const int ccols = ns + 1;

    SimResult out;
    out.steps.reserve(steps);
    WakeState& wake = out.wake;
    wake.corner_cols = ccols;
    wake.panel_col.resize(ns);
    for (int j = 0; j < ns; ++j) wake.panel_col[j] = j;

    // A mirrored wing under symmetric flapping stays symmetric in exact
    // arithmetic; projecting the wake onto that subspace keeps rounding noise
    // from being amplified by close vortex passages.
    const bool mirror_symmetric = [&] {
        if (ccols % 2 != 0) return false;
        for (int i = 0; i <= nc; ++i)
            for (int c = 0; c < ccols; ++c) {
                const Eigen::Vector3d a = body_mesh.corner(i, c);
                const Eigen::Vector3d b = body_mesh.corner(i, ccols - 1 - c);
                if (a.x() != b.x() || a.y() != -b.y() || a.z() != b.z()) return false;
            }
        return true;
    }();
    auto symmetrize_line = [&](Eigen::Matrix3Xd& l) {
        for (int c = 0; c < ccols / 2; ++c) {
            const int d = ccols - 1 - c;
            const double x = 0.5 * (l(0, c) + l(0, d));
            const double y = 0.5 * (l(1, c) - l(1, d));
            const double z = 0.5 * (l(2, c) + l(2, d));
            l.col(c) = Eigen::Vector3d(x, y, z);
            l.col(d) = Eigen::Vector3d(x, -y, z);
        }
        if (ccols % 2 == 1) l(1, ccols / 2) = 0.0;  // root line stays on the plane
    };
    auto symmetrize_row = [&](Eigen::VectorXd& g) {
        for (int j = 0; j < ns / 2; ++j) {
            const double v = 0.5 * (g[j] + g[ns - 1 - j]);
            g[j] = v;
            g[ns - 1 - j] = v;
        }
    };

    Eigen::VectorXd gamma_prev = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd gamma_te_prev;

    for (int step = 1; step <= steps; ++step) {
        const double t = step * dt;
        const PanelMesh mesh = transform_mesh(body_mesh, motion, t);
        const BoundLattice lat = build_lattice(mesh);

        // pin the newest wake line at the current trailing ring line
        wake.lines.insert(wake.lines.begin(), lat.trailing_line());
        if (gamma_te_prev.size() > 0) wake.gammas.insert(wake.gammas.begin(), gamma_te_prev);
        const RingSet wake_rings = wake.active_rings(config.wake_reference,
                                                     config.truncation_radius);

        // no-penetration system
        const Eigen::MatrixXd A =
            influence_matrix(lat.rings, mesh.collocation, mesh.normal, config.core_radius,
                             config.workers);
        const Eigen::Matrix3Xd v_body = grid_velocity(mesh, motion, t);
        Eigen::Matrix3Xd v_wake = Eigen::Matrix3Xd::Zero(3, np);
        add_induced_velocities(wake_rings, mesh.collocation, v_wake, config.core_radius,
                               config.workers);
        Eigen::VectorXd rhs(np);
        for (Eigen::Index k = 0; k < np; ++k) {
            const Eigen::Vector3d v = u_inf - v_body.col(k) + v_wake.col(k);
            rhs[k] = -v.dot(mesh.normal.col(k));
        }
        Eigen::VectorXd gamma;
        try {
            gamma = solve_circulations(A, rhs);
        } catch (const SolverError& e) {
            throw SolverError("step " + std::to_string(step) + ": " + e.what(), e.rcond);
        }

        RingSet bound = lat.rings;
        bound.gamma = gamma;
        auto gm = [&](int i, int j) -> double {
            return (i >= 0 && j >= 0) ? gamma[Eigen::Index(i) * ns + j] : 0.0;
        };

        // --- net bound segments (trailing line excluded, see wake pinning) ---
        const Eigen::Index n_chordline = Eigen::Index(nc) * ns;        // spanwise-oriented
        const Eigen::Index n_sideline = Eigen::Index(nc) * ccols;     // chordwise-oriented
        Eigen::Matrix3Xd segs_mid(3, n_chordline + n_sideline);
        Eigen::Matrix3Xd segs_l(3, n_chordline + n_sideline);
        Eigen::VectorXd segs_g(n_chordline + n_sideline);
        Eigen::VectorXd segs_side(n_chordline + n_sideline);
        Eigen::Index s = 0;
        for (int i = 0; i < nc; ++i) {
            for (int j = 0; j < ns; ++j, ++s) {
                const Eigen::Vector3d a = lat.ring_grid.col(lat.grid_index(i, j));
                const Eigen::Vector3d b = lat.ring_grid.col(lat.grid_index(i, j + 1));
                segs_mid.col(s) = 0.5 * (a + b);
                segs_l.col(s) = b - a;
                segs_g[s] = gm(i, j) - gm(i - 1, j);
                segs_side[s] = mesh.panel_side[mesh.panel_index(i, j)];
            }
        }
        for (int i = 0; i < nc; ++i) {
            for (int c = 0; c < ccols; ++c, ++s) {
                const Eigen::Vector3d a = lat.ring_grid.col(lat.grid_index(i, c));
                const Eigen::Vector3d b = lat.ring_grid.col(lat.grid_index(i + 1, c));
                segs_mid.col(s) = 0.5 * (a + b);
                segs_l.col(s) = b - a;
                segs_g[s] = (c > 0 ? gm(i, c - 1) : 0.0) - (c < ns ? gm(i, c) : 0.0);
                segs_side[s] = lat.grid_side[lat.grid_index(i, c)];
            }
        }

        Eigen::Matrix3Xd u_mid(3, segs_mid.cols());
        u_mid.colwise() = u_inf;
        u_mid -= velocity_at_points(segs_mid, segs_side, motion, t);
        add_induced_velocities(bound, segs_mid, u_mid, config.core_radius, config.workers);
        add_induced_velocities(wake_rings, segs_mid, u_mid, config.core_radius, config.workers);

        const Eigen::VectorXd dgdt = (gamma - gamma_prev) / dt;

        StepResult res;
        res.t = t;
        res.phi = flap_angle(motion, t).phi;
        res.gamma = gamma;
        Eigen::Vector3d force = Eigen::Vector3d::Zero();
        double power = 0.0;
        const Eigen::Matrix3Xd v_seg = velocity_at_points(segs_mid, segs_side, motion, t);
        for (Eigen::Index k = 0; k < segs_mid.cols(); ++k) {
            const Eigen::Vector3d f =
                motion.rho * segs_g[k] * u_mid.col(k).cross(segs_l.col(k));
            force += f;
            power -= f.dot(v_seg.col(k));
        }
        for (Eigen::Index k = 0; k < np; ++k) {
            const Eigen::Vector3d f = motion.rho * dgdt[k] * mesh.area[k] * mesh.normal.col(k);
            force += f;
            power -= f.dot(v_body.col(k));
        }
        res.lift = force.z();
        res.thrust = -force.x();
        res.side_force = force.y();
        res.power = power;

        // unsteady-Bernoulli pressure jump (diagnostic field / snapshots)
        res.dp.resize(np);
        for (int i = 0; i < nc; ++i) {
            for (int j = 0; j < ns; ++j) {
                const Eigen::Index k = mesh.panel_index(i, j);
                const int c = body_mesh.panel_col[j];
                const Eigen::Vector3d fm =
                    0.5 * (mesh.corner(i, c) + mesh.corner(i, c + 1));
                const Eigen::Vector3d rm =
                    0.5 * (mesh.corner(i + 1, c) + mesh.corner(i + 1, c + 1));
                const Eigen::Vector3d lm =
                    0.5 * (mesh.corner(i, c) + mesh.corner(i + 1, c));
                const Eigen::Vector3d rmm =
                    0.5 * (mesh.corner(i, c + 1) + mesh.corner(i + 1, c + 1));
                const Eigen::Vector3d tau_c = (rm - fm).normalized();
                const Eigen::Vector3d tau_s = (rmm - lm).normalized();
                const double dc = (rm - fm).norm(), db = (rmm - lm).norm();
                const Eigen::Vector3d v = u_inf - v_body.col(k) + v_wake.col(k);
                res.dp[k] = motion.rho * (v.dot(tau_c) * (gm(i, j) - gm(i - 1, j)) / dc +
                                          v.dot(tau_s) * (gm(i, j) - gm(i, j - 1)) / db +
                                          dgdt[k]);
            }
        }

        out.steps.push_back(std::move(res));
        if (on_step) on_step(SimFrame{step, out.steps.back(), lat, wake, config});

        // convect every wake line point with the local fluid velocity
        Eigen::Index n_wpts = 0;
        for (const auto& l : wake.lines) n_wpts += l.cols();
        Eigen::Matrix3Xd wpts(3, n_wpts);
        Eigen::Index ofs = 0;
        for (const auto& l : wake.lines) {
            wpts.middleCols(ofs, l.cols()) = l;
            ofs += l.cols();
        }
        Eigen::Matrix3Xd v_conv(3, n_wpts);
        v_conv.colwise() = u_inf;
        if (!config.frozen_wake) {
            add_induced_velocities(bound, wpts, v_conv, config.core_radius, config.workers);
            add_induced_velocities(wake_rings, wpts, v_conv, config.core_radius,
                                   config.workers);
        }
        ofs = 0;
        for (auto& l : wake.lines) {
            l += dt * v_conv.middleCols(ofs, l.cols());
            if (mirror_symmetric) symmetrize_line(l);
            ofs += l.cols();
        }

        // drop oldest rows once every ring in them is outside the sphere
        while (wake.row_count() > 1) {
            const Eigen::Matrix3Xd& a = wake.lines[wake.lines.size() - 2];
            const Eigen::Matrix3Xd& b = wake.lines.back();
            double dmin = std::numeric_limits<double>::max();
            for (int j = 0; j < ns; ++j) {
                const Eigen::Vector3d cen =
                    0.25 * (a.col(j) + a.col(j + 1) + b.col(j) + b.col(j + 1)) -
                    config.wake_reference;
                dmin = std::min(dmin, cen.norm());
            }
            if (dmin > config.truncation_radius) {
                wake.lines.pop_back();
                wake.gammas.pop_back();
            } else {
                break;
            }
        }

        gamma_prev = gamma;
        gamma_te_prev = gamma.tail(ns);
        if (mirror_symmetric) symmetrize_row(gamma_te_prev);
    }
    return out;
}

} // namespace flapopt
