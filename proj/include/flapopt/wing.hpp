#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "flapopt/bspline.hpp"

namespace flapopt {

/// Chordwise camber control heights of the baseline section (7 points,
/// uniformly spaced in x over one chord).
const Eigen::VectorXd& baseline_camber_profile();

inline constexpr double kBaselineSemispan = 3.0;
inline constexpr double kBaselineChord = 1.0;

enum class DofMode { ScaleX, TranslateX, ScaleY, TranslateY, TranslateZ };

/// One design variable. All variables are lengths in chord units and map to
/// control-point displacements: a ScaleX value delta moves each point of its
/// row by delta * (x - anchor) / d_max (d_max = farthest baseline offset from
/// the anchor, so no point travels more than |delta|); translations displace
/// the whole selection. TranslateZ selects a chordwise column (shared across
/// the span); the other modes select one span-station row.
struct DofEntry {
    DofMode mode = DofMode::TranslateX;
    int span_row = -1;
    int chord_col = -1;
    double anchor = 0.0;  // ScaleX: chordwise point held fixed (baseline coords)
};

/// Named deformation schemes. Spanwise row DOFs follow the pattern
/// [root: anchored scale | interior: scale+translate | tip: scale+translate-x+translate-y];
/// Camber adds z-perturbations of the interior chordwise controls; the edge
/// variants anchor every row's scale at one edge so that edge stays straight.
enum class DofScheme { Baseline, SingleKnotSpan, Fixed12, Camber, LeadingOnly, TrailingOnly };

struct WingParametrization {
    ControlNet baseline_net;
    std::vector<DofEntry> dofs;
    double chord = kBaselineChord;

    int dof_count() const { return int(dofs.size()); }
    double bound() const { return 0.5 * chord; }
};

/// Cambered (or flat) rectangular half wing: chordwise controls uniform in x
/// carrying the camber profile, span rows at Greville abscissae so the surface
/// parameterization is exactly linear in both directions.
/// Throws ValidationError for counts incompatible with the degrees (or a
/// cambered wing without the 7-point section).
ControlNet baseline_net(Eigen::Index n_chord_ctrl, Eigen::Index n_span_ctrl, int degree_u,
                        int degree_v, double semispan = kBaselineSemispan, bool cambered = true);

/// Baseline wing plus the DOF map of a named scheme. `degree` is the spanwise
/// polynomial degree (for SingleKnotSpan it also fixes the row count).
WingParametrization baseline_wing(DofScheme scheme, int degree,
                                  double semispan = kBaselineSemispan, bool cambered = true);

/// Deformed control net. Displacement superposition keeps the map affine in x.
/// Unmapped interior span rows are redistributed between their mapped
/// neighbours (y linearly, x re-spaced with the baseline's relative spacing).
/// Throws BoundViolationError when a component leaves [-c/2, c/2].
ControlNet apply_design(const WingParametrization& param, const Eigen::VectorXd& x);

/// Structured lattice of quadrilateral panels. A mirrored full-wing mesh keeps
/// one corner column per half at the root plane (the halves are separate rigid
/// bodies under flapping), so panel column j maps to corner columns
/// (panel_col(j), panel_col(j)+1).
struct PanelMesh {
    int nc = 0;                    // chordwise panel count
    int ns = 0;                    // spanwise panel count (full wing if mirrored)
    int corner_cols = 0;           // spanwise corner-column count
    Eigen::Matrix3Xd corners;      // (nc+1) * corner_cols, k = i*corner_cols + col
    Eigen::VectorXd corner_side;   // body-frame half of each corner column (+-1)
    Eigen::Matrix3Xd collocation;  // per panel, k = i*ns + j (three-quarter chord)
    Eigen::Matrix3Xd normal;       // unit, from panel diagonal cross product
    Eigen::VectorXd area;          // two-triangle quad areas
    Eigen::VectorXd panel_side;    // +-1 per panel
    std::vector<int> panel_col;    // panel column -> left corner column

    Eigen::Index corner_index(int i, int col) const {
        return Eigen::Index(i) * corner_cols + col;
    }
    Eigen::Index panel_index(int i, int j) const { return Eigen::Index(i) * ns + j; }
    Eigen::Vector3d corner(int i, int col) const { return corners.col(corner_index(i, col)); }
};

/// Recompute collocation points, normals and areas from corner positions.
/// Throws MeshError listing degenerate (zero-area) panels.
void refresh_panel_geometry(PanelMesh& mesh);

/// Sample a net at uniform parametric spacing into an (nc x ns) single-patch
/// mesh (no mirroring); used for oracles and one-off geometry checks.
PanelMesh sample_mesh(const ControlNet& net, int n_chord, int n_span);

/// Full-wing mesh: the half-wing net sampled at uniform parametric spacing and
/// mirrored about the root plane; n_span counts panels per half.
PanelMesh generate_mesh(const ControlNet& net, int n_chord, int n_span);

/// Sum of curved-surface panel areas.
double wing_area(const PanelMesh& mesh);

/// Max deviation of the planform-projected interior panel angles from pi/2
/// (radians). Throws GeometryError on zero-length projected edges.
double panel_corner_angles(const PanelMesh& mesh);

/// CSV: panel id, corners, collocation point, normal, area.
void write_mesh_csv(std::ostream& os, const PanelMesh& mesh);

} // namespace flapopt
