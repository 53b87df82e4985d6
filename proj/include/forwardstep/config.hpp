#pragma once

#include "forwardstep/delay.hpp"
#include "forwardstep/graph.hpp"
#include "forwardstep/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fstep {

enum class ScenarioKind {
    ConsensusLagrangian,
    ConsensusTpv,
    PointmassTracking,
    TaskspaceTracking,
    SpacecraftTracking,
    DistributedTracking,
    BaselineComparison,
};

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

using Matrix = std::vector<std::vector<double>>;

struct IntegratorConfig {
    double step = 1e-3;
    double horizon = 10.0;
    int stride = 100;
    bool parallel = true;

    bool operator==(const IntegratorConfig&) const = default;
};

struct PlantConfig {
    std::string model;            // two_link_arm | point_mass | tpv | spacecraft
    double mass = 1.0;            // point mass and TPV
    int dim = 1;                  // point-mass dimension
    double gravity = 9.81;        // TPV
    Matrix inertia;               // spacecraft
    std::vector<double> momentum; // spacecraft, inertial frame

    bool operator==(const PlantConfig&) const = default;
};

/// Initial conditions. Empty q0 selects a deterministic lattice; `randomize` adds a seeded
/// uniform perturbation of half-width `spread`.
struct AgentsConfig {
    int count = 1;
    Matrix q0;
    Matrix qd0;
    double spread = 0.5;
    bool randomize = false;

    bool operator==(const AgentsConfig&) const = default;
};

/// Either a fixed graph (graphs[0], no switch times), a cyclic rotation through `graphs`
/// every `rotation` seconds, or an explicit schedule.
struct TopologyConfig {
    std::vector<Matrix> graphs;
    double rotation = 0.0;
    std::vector<double> switch_times;
    std::vector<int> active;
    double dwell = 0.0;

    bool operator==(const TopologyConfig&) const = default;
};

struct DelaySpec {
    double base = 0.0;
    double amplitude = 0.0;
    double rate = 1.0;
    std::vector<std::pair<double, double>> jumps;   // (time, value)
    double bound = 0.0;                             // 0 resolves to the profile maximum

    bool operator==(const DelaySpec&) const = default;
};

struct EdgeDelay {
    int i = 0;
    int j = 0;
    DelaySpec spec;

    bool operator==(const EdgeDelay&) const = default;
};

struct DelaysConfig {
    DelaySpec common;
    std::vector<EdgeDelay> edges;

    bool operator==(const DelaysConfig&) const = default;
};

struct RefdynConfig {
    std::string variant;
    std::vector<double> roots;
    double lambda_m = 0.0;
    double alpha = 1.0;
    double beta = 2.0;
    double gamma = 0.0;
    double gamma_factor = 0.0;   // gamma = factor * leader bound when gamma is left at 0
    double alpha1 = 1.0;
    double alpha2 = 1.0;

    bool operator==(const RefdynConfig&) const = default;
};

struct ControlConfig {
    std::string law;           // TPV: continuous | exact | adaptive
    Matrix k;                  // joint damping K, or the spacecraft filter gain K (4x4)
    Matrix gamma;              // dynamic adaptation gain
    double param_error = 0.0;  // initial estimate = (1 - param_error) * truth
    Matrix k_star;
    Matrix lambda;             // kinematic adaptation gain
    double kappa = 1.0;
    double kin_error = 0.0;    // initial kinematic estimate = (1 - kin_error) * truth
    Matrix lambda_f;           // spacecraft filter
    double gain = 1.0;         // point-mass k, TPV k
    double filter = 1.0;       // point-mass filter bandwidth
    double gamma_star = 1.0;
    double alpha_star = 1.0;
    double mass_error = 0.0;   // initial mass estimate = (1 + mass_error) * m
    double clamp = 1e6;
    double condition_cap = 1e6;
    double sigma_min_ratio = 0.1;

    bool operator==(const ControlConfig&) const = default;
};

/// Leader / desired trajectory. Sinusoid amplitude * sin(frequency t) for the leader and
/// the point mass; circle (center, radius, period) for the task space; attitude uses
/// axis, amplitude, period (and amplitude2, period2 for the two-axis profile).
struct ReferenceConfig {
    std::string profile;
    double amplitude = 0.5;
    double frequency = 1.0;
    std::vector<double> center;
    double radius = 0.1;
    double period = 5.0;
    std::vector<double> axis;
    double amplitude2 = 0.0;
    double period2 = 1.0;

    bool operator==(const ReferenceConfig&) const = default;
};

struct Thresholds {
    std::map<std::string, double> max;
    std::map<std::string, double> min;

    bool operator==(const Thresholds&) const = default;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::ConsensusLagrangian;
    std::string name;
    std::uint64_t seed = 1;
    IntegratorConfig integrator;
    PlantConfig plant;
    AgentsConfig agents;
    TopologyConfig topology;
    DelaysConfig delays;
    RefdynConfig refdyn;
    ControlConfig control;
    ReferenceConfig reference;
    Thresholds thresholds;

    bool operator==(const ScenarioConfig&) const = default;
};

struct LoadedConfig {
    ScenarioConfig config;
    std::vector<std::string> warnings;
};

/// Parses YAML text into a config with every default filled in. Structural errors carry
/// `source:line:column`. Does not validate.
ScenarioConfig parse_config(const std::string& text, const std::string& source);
/// Resolved YAML text; parse_config(emit_config(c)) == c.
std::string emit_config(const ScenarioConfig& c);
/// Applies `key.path=value` assignments onto the resolved tree. Keys must already exist.
std::string apply_overrides(const std::string& resolved_yaml, const std::vector<std::string>& sets);
/// Throws ConfigError naming the violated invariant. Rounds switch and delay-jump times onto
/// the step grid, reporting each rounding as a warning.
std::vector<std::string> validate_config(ScenarioConfig& c);

/// parse -> emit -> overrides -> parse -> validate.
LoadedConfig load_config_text(const std::string& text, const std::string& source,
                              const std::vector<std::string>& sets = {});
LoadedConfig load_config_file(const std::string& path, const std::vector<std::string>& sets = {});

/// Leader bound the discontinuous gain must dominate, by tracking variant.
double tracking_leader_bound(const ScenarioConfig& c);

Mat as_matrix(const Matrix& m);
Vec as_vector(const std::vector<double>& v);

/// Plant degrees of freedom implied by kind and model.
int plant_dof(const ScenarioConfig& c);
/// Vertex count of the interaction graphs (followers plus the leader for tracking).
int graph_size(const ScenarioConfig& c);
bool uses_network(const ScenarioConfig& c);

SwitchingSchedule build_schedule(const ScenarioConfig& c);
/// delays[i][j] is the profile of edge (i, j); the common profile unless overridden.
std::vector<std::vector<DelayProfile>> build_delays(const ScenarioConfig& c);

}  // namespace fstep
