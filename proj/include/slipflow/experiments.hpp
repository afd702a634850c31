#pragma once

#include "slipflow/forms.hpp"
#include "slipflow/mesh.hpp"
#include "slipflow/solver.hpp"
#include "slipflow/stability.hpp"
#include "slipflow/verify.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace slipflow {

/// Resolved run configuration. parse_config fills every field, applying the
/// per-experiment defaults for whatever the file leaves out.
struct ExperimentConfig {
    std::string experiment = "smooth_nonmonotone";
    int n = 75;
    Diagonal diagonal = Diagonal::right;
    double nu = 1;
    double dt = 0.005;
    double final_time = 0;
    std::optional<double> alpha = 10.0; ///< nullopt: automatic rule
    NitscheVariant variant = NitscheVariant::symmetric;
    MeanPressureMode mean_pressure = MeanPressureMode::multiplier;
    bool convection = true;
    bool boundary_correction = false;
    std::string solution;
    std::string law;
    std::map<std::string, double> law_params;
    std::vector<double> amplitudes;
    std::vector<double> beta_sweep;
    std::vector<double> gamma_sweep;
    std::vector<double> snapshots;
    std::vector<Vec2> probes;
    std::vector<int> levels;
    double continuation_step = 2; ///< largest amplitude increment per continuation stage (0: one stage)
    std::vector<std::string> slip_walls{"top"};
    std::string output_dir = "output";
    NewtonConfig newton;
};

/// Flat JSON object; keys not recognised raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);

/// Applies `key=value` overrides (value parsed as JSON, else taken as a string)
/// on top of the file contents before parsing.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Single-line JSON echo of the resolved configuration.
std::string config_json(const ExperimentConfig& config);

struct RunArtifacts {
    std::vector<std::string> files;
    std::vector<std::pair<std::string, std::string>> summary;

    const std::string* find(const std::string& key) const;
};

/// Runs the configured experiment, writing CSV, SVG and summary.txt into
/// output_dir. `log` receives the Newton convergence lines.
RunArtifacts run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Magnitude of the unregularized constitutive relation at slip speed s (the
/// upper end of the set-valued branch at s = 0).
double exact_relation_magnitude(const SlipLaw& law, double speed);

/// Penalty actually used by a run: the configured alpha, or the automatic rule
/// evaluated on `space`.
double effective_alpha(const ExperimentConfig& config, const TaylorHoodSpace& space, const SlipLaw& law);

SlipLaw configured_law(const ExperimentConfig& config, const std::map<std::string, double>& extra = {});

} // namespace slipflow
