#pragma once

#include <string>
#include <vector>

#include "flapopt/optimizer.hpp"

namespace flapopt {

/// Flat key-value run configuration with one section per module. Every field
/// has the published converged setup as its default; any CLI flag overrides
/// the matching key.
struct RunConfig {
    // [kinematics]
    double kappa = 0.1;
    double omega = 0.0;  // when positive, takes precedence over kappa
    double amplitude_deg = 45.0;
    double pitch_deg = 5.0;
    double u_inf = 1.0;
    double rho = 1.0;

    // [geometry]
    std::string scheme = "baseline";
    int degree = 3;
    double semispan = kBaselineSemispan;
    bool cambered = true;

    // [discretization]
    int n_chord = 24;
    int n_span = 20;  // panels per half wing
    int n_ts = 120;
    int cycles = 3;
    double truncation_radius = kDefaultTruncationRadius;
    double core_radius = kDefaultCoreRadius;

    // [optimizer]
    std::string constraints = "lift,thrust,area,angle";
    int max_outer = 30;
    int max_inner = 8;
    double kkt_tol = 1e-4;
    double step_tol = 1e-4;
    double fd_step = 1e-3;
    double theta_cr_deg = 15.0;

    // [output]
    std::string out_dir = ".";
    int snapshot_stride = 0;
    int workers = 1;

    void set(const std::string& key, const std::string& value);  // "section.key" or "key"
    void validate() const;

    FlappingMotion motion() const;
    EvalSettings eval_settings() const;
    DofScheme dof_scheme() const;
    WingParametrization wing() const;
    std::vector<std::string> constraint_list() const;
    bool power_constrained() const;
};

/// INI-style file: [section] headers, key = value lines, # or ; comments.
RunConfig load_config_file(const std::string& path);
void merge_config_stream(RunConfig& config, std::istream& is);

} // namespace flapopt
