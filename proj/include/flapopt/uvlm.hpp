#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "flapopt/kinematics.hpp"
#include "flapopt/wing.hpp"

namespace flapopt {

/// Default vortex-core cutoff radius (chord units): induced velocity is zeroed
/// when the evaluation point falls inside it.
inline constexpr double kDefaultCoreRadius = 1e-4;
inline constexpr double kDefaultTruncationRadius = 10.0;

/// Velocity induced at `target` by the straight vortex segment p1->p2 carrying
/// circulation gamma (finite-segment Biot-Savart). Throws GeometryError when
/// the endpoints coincide.
Eigen::Vector3d segment_induced_velocity(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                                         double gamma, const Eigen::Vector3d& target,
                                         double core_radius = kDefaultCoreRadius);

/// Quadrilateral vortex rings, one circulation each, corners in loop order.
struct RingSet {
    Eigen::Matrix3Xd c0, c1, c2, c3;
    Eigen::VectorXd gamma;

    Eigen::Index size() const { return gamma.size(); }
    void resize(Eigen::Index n);
    Eigen::Vector3d centroid(Eigen::Index r) const {
        return 0.25 * (c0.col(r) + c1.col(r) + c2.col(r) + c3.col(r));
    }
    Eigen::Vector3d induced_velocity(Eigen::Index r, const Eigen::Vector3d& target,
                                     double core_radius = kDefaultCoreRadius) const;
};

/// Accumulate the velocity induced by every ring at every target (summed over
/// rings in index order per target; deterministic for any worker count).
void add_induced_velocities(const RingSet& rings, const Eigen::Matrix3Xd& targets,
                            Eigen::Matrix3Xd& out, double core_radius = kDefaultCoreRadius,
                            int workers = 1);

/// Normal-velocity influence matrix: entry (k, l) is the velocity induced at
/// collocation point k by ring l with unit circulation, dotted with normal k.
Eigen::MatrixXd influence_matrix(const RingSet& rings, const Eigen::Matrix3Xd& collocation,
                                 const Eigen::Matrix3Xd& normals,
                                 double core_radius = kDefaultCoreRadius, int workers = 1);

/// Dense direct solve of the no-penetration system with conditioning and
/// residual checks. Throws SolverError (with rcond estimate) on breakdown.
Eigen::VectorXd solve_circulations(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs);

/// Bound vortex lattice: rings shifted a quarter panel-chord downstream of the
/// mesh, so each ring's center sits at its panel's three-quarter-chord line.
struct BoundLattice {
    int nc = 0, ns = 0, corner_cols = 0;
    std::vector<int> panel_col;
    Eigen::Matrix3Xd ring_grid;  // (nc+1) * corner_cols ring corner points
    Eigen::VectorXd grid_side;
    RingSet rings;

    Eigen::Index grid_index(int i, int col) const {
        return Eigen::Index(i) * corner_cols + col;
    }
    /// Trailing ring corner line (the wake attachment line).
    Eigen::Matrix3Xd trailing_line() const;
};

BoundLattice build_lattice(const PanelMesh& positioned);

/// Shed wake rows. lines.front() is pinned at the wing's current trailing ring
/// line; row r spans lines[r] -> lines[r+1] with a circulation frozen at shed
/// time. Rings whose centroid leaves the truncation sphere are excluded from
/// every influence and load computation; fully-distant oldest rows are dropped.
struct WakeState {
    std::vector<Eigen::Matrix3Xd> lines;
    std::vector<Eigen::VectorXd> gammas;
    int corner_cols = 0;
    std::vector<int> panel_col;

    Eigen::Index row_count() const { return Eigen::Index(gammas.size()); }
    RingSet active_rings(const Eigen::Vector3d& reference, double radius) const;
};

struct StepResult {
    double t = 0.0;
    double phi = 0.0;
    Eigen::VectorXd gamma;  // bound circulations, one per panel
    Eigen::VectorXd dp;     // unsteady-Bernoulli pressure jump, one per panel
    double lift = 0.0;
    double thrust = 0.0;    // -x force component
    double power = 0.0;     // aerodynamic power
    double side_force = 0.0;
};

struct SimConfig {
    FlappingMotion motion;
    int n_ts = 120;
    int cycles = 3;
    double truncation_radius = kDefaultTruncationRadius;
    double core_radius = kDefaultCoreRadius;
    int workers = 1;
    Eigen::Vector3d wake_reference = Eigen::Vector3d::Zero();
    bool frozen_wake = false;  // convect with the freestream only (no rollup)

    void validate() const;
};

struct SimFrame {
    int step;
    const StepResult& result;
    const BoundLattice& lattice;
    const WakeState& wake;
    const SimConfig& config;
};

struct SimResult {
    std::vector<StepResult> steps;
    WakeState wake;
};

/// March the impulsively-started unsteady vortex lattice over
/// cycles * n_ts uniform steps of the body-frame mesh under the given motion.
SimResult simulate(const PanelMesh& body_mesh, const SimConfig& config,
                   const std::function<void(const SimFrame&)>& on_step = {});

} // namespace flapopt
