#include "forwardstep/config.hpp"

#include "forwardstep/refdyn.hpp"

#include <yaml-cpp/yaml.h>

#include <Eigen/Cholesky>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fstep {

namespace {

const std::vector<std::pair<ScenarioKind, std::string>>& kind_names() {
    static const std::vector<std::pair<ScenarioKind, std::string>> names{
        {ScenarioKind::ConsensusLagrangian, "consensus-lagrangian"},
        {ScenarioKind::ConsensusTpv, "consensus-tpv"},
        {ScenarioKind::PointmassTracking, "pointmass-tracking"},
        {ScenarioKind::TaskspaceTracking, "taskspace-tracking"},
        {ScenarioKind::SpacecraftTracking, "spacecraft-tracking"},
        {ScenarioKind::DistributedTracking, "distributed-tracking"},
        {ScenarioKind::BaselineComparison, "baseline-comparison"},
    };
    return names;
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        const auto m = n.Mark();
        std::ostringstream os;
        os << source_;
        if (!m.is_null()) os << ":" << m.line + 1 << ":" << m.column + 1;
        os << ": " << msg;
        throw ConfigError(os.str());
    }

    void keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> allowed) const {
        if (!n.IsMap()) fail(n, where + " must be a mapping");
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                fail(kv.first, "unknown key '" + key + "' in " + where);
        }
    }

    double num(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, what + " must be a number");
        try {
            return n.as<double>();
        } catch (const YAML::Exception&) {
            fail(n, what + " must be a number, got '" + n.Scalar() + "'");
        }
    }

    long integer(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, what + " must be an integer");
        try {
            return n.as<long>();
        } catch (const YAML::Exception&) {
            fail(n, what + " must be an integer, got '" + n.Scalar() + "'");
        }
    }

    bool boolean(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, what + " must be true or false");
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            fail(n, what + " must be true or false, got '" + n.Scalar() + "'");
        }
    }

    std::string str(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, what + " must be a string");
        return n.Scalar();
    }

    std::vector<double> vec(const YAML::Node& n, const std::string& what) const {
        if (n.IsNull()) return {};
        if (!n.IsSequence()) fail(n, what + " must be a list of numbers");
        std::vector<double> out;
        for (const auto& e : n) out.push_back(num(e, what + " entry"));
        return out;
    }

    Matrix mat(const YAML::Node& n, const std::string& what) const {
        if (n.IsNull()) return {};
        if (!n.IsSequence()) fail(n, what + " must be a list of rows");
        Matrix out;
        for (const auto& row : n) out.push_back(vec(row, what + " row"));
        return out;
    }

    /// Gain given as scalar (times identity), list (diagonal) or matrix, resolved to dim x dim.
    Matrix gain(const YAML::Node& n, const std::string& what, int dim) const {
        if (!n || n.IsNull()) return identity(dim, 1.0);
        if (n.IsScalar()) return identity(dim, num(n, what));
        if (!n.IsSequence()) fail(n, what + " must be a scalar, a list or a matrix");
        if (n.size() == 0) return identity(dim, 1.0);
        if (n[0].IsScalar()) {
            const auto d = vec(n, what);
            if (static_cast<int>(d.size()) != dim)
                fail(n, what + " diagonal needs " + std::to_string(dim) + " entries");
            Matrix out = identity(dim, 0.0);
            for (int i = 0; i < dim; ++i) out[i][i] = d[i];
            return out;
        }
        const auto m = mat(n, what);
        if (static_cast<int>(m.size()) != dim)
            fail(n, what + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
        for (const auto& row : m)
            if (static_cast<int>(row.size()) != dim)
                fail(n, what + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
        return m;
    }

    static Matrix identity(int dim, double s) {
        Matrix out(dim, std::vector<double>(dim, 0.0));
        for (int i = 0; i < dim; ++i) out[i][i] = s;
        return out;
    }

private:
    std::string source_;
};

// Visit only the keys present; everything else keeps its default.
template <class F>
void each(const YAML::Node& n, F&& f) {
    for (const auto& kv : n) f(kv.first.as<std::string>(), kv.second);
}

DelaySpec parse_delay(const Reader& r, const YAML::Node& n, const std::string& where) {
    DelaySpec d;
    r.keys(n, where, {"base", "amplitude", "rate", "jumps", "bound", "i", "j"});
    each(n, [&](const std::string& k, const YAML::Node& v) {
        if (k == "base") d.base = r.num(v, where + ".base");
        else if (k == "amplitude") d.amplitude = r.num(v, where + ".amplitude");
        else if (k == "rate") d.rate = r.num(v, where + ".rate");
        else if (k == "bound") d.bound = r.num(v, where + ".bound");
        else if (k == "jumps") {
            for (const auto& row : r.mat(v, where + ".jumps")) {
                if (row.size() != 2) r.fail(v, where + ".jumps entries must be [time, value]");
                d.jumps.emplace_back(row[0], row[1]);
            }
        }
    });
    return d;
}

void emit_vec(YAML::Emitter& e, const std::vector<double>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << fmt(x);
    e << YAML::EndSeq;
}

void emit_mat(YAML::Emitter& e, const Matrix& m) {
    e << YAML::BeginSeq;
    for (const auto& row : m) emit_vec(e, row);
    e << YAML::EndSeq;
}

void emit_delay(YAML::Emitter& e, const DelaySpec& d) {
    e << YAML::Key << "base" << YAML::Value << fmt(d.base);
    e << YAML::Key << "amplitude" << YAML::Value << fmt(d.amplitude);
    e << YAML::Key << "rate" << YAML::Value << fmt(d.rate);
    e << YAML::Key << "jumps" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& [t, v] : d.jumps) emit_vec(e, {t, v});
    e << YAML::EndSeq;
    e << YAML::Key << "bound" << YAML::Value << fmt(d.bound);
}

bool is_spd(const Matrix& m) {
    if (m.empty()) return false;
    const Mat a = as_matrix(m);
    if (a.rows() != a.cols()) return false;
    if ((a - a.transpose()).norm() > 1e-12 * std::max(1.0, a.norm())) return false;
    Eigen::LLT<Mat> llt(a);
    return llt.info() == Eigen::Success;
}

bool is_zero(const Matrix& m) {
    for (const auto& row : m)
        for (double v : row)
            if (v != 0.0) return false;
    return true;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void require_spd(const Matrix& m, const std::string& name) {
    require(is_spd(m), name + " must be symmetric positive definite");
}

bool is_lagrangian_plant(const ScenarioConfig& c) {
    return c.plant.model == "two_link_arm" || c.plant.model == "point_mass";
}

int param_count(const ScenarioConfig& c) {
    return c.plant.model == "two_link_arm" ? 5 : 1;
}

std::string default_model(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::ConsensusTpv: return "tpv";
        case ScenarioKind::PointmassTracking: return "point_mass";
        case ScenarioKind::SpacecraftTracking: return "spacecraft";
        default: return "two_link_arm";
    }
}

double round_to_grid(double t, double h) { return std::round(t / h) * h; }

double delay_max(const DelaySpec& d) {
    double jump = 0.0;
    for (const auto& j : d.jumps) jump = std::max(jump, j.second);
    return d.base + std::abs(d.amplitude) + jump;
}

}  // namespace

std::string to_string(ScenarioKind k) {
    for (const auto& [kind, name] : kind_names())
        if (kind == k) return name;
    return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kind_names())
        if (name == s) return kind;
    throw ConfigError("unknown scenario kind '" + s + "'");
}

Mat as_matrix(const Matrix& m) {
    const int rows = static_cast<int>(m.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(m.front().size());
    Mat out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(m[i].size()) != cols) throw ConfigError("ragged matrix");
        for (int j = 0; j < cols; ++j) out(i, j) = m[i][j];
    }
    return out;
}

Vec as_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int plant_dof(const ScenarioConfig& c) {
    if (c.plant.model == "two_link_arm") return 2;
    if (c.plant.model == "point_mass") return c.plant.dim;
    return 3;
}

int graph_size(const ScenarioConfig& c) {
    return c.kind == ScenarioKind::DistributedTracking ? c.agents.count + 1 : c.agents.count;
}

bool uses_network(const ScenarioConfig& c) {
    return c.kind == ScenarioKind::ConsensusLagrangian || c.kind == ScenarioKind::ConsensusTpv ||
           c.kind == ScenarioKind::DistributedTracking || c.kind == ScenarioKind::BaselineComparison;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    const Reader r(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << source << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": " << e.msg;
        throw ConfigError(os.str());
    }
    if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
    r.keys(root, "config", {"scenario", "name", "seed", "integrator", "plant", "agents", "topology",
                            "delays", "refdyn", "control", "reference", "thresholds"});
    ScenarioConfig c;
    if (!root["scenario"]) r.fail(root, "missing required key 'scenario'");
    try {
        c.kind = scenario_kind_from_string(r.str(root["scenario"], "scenario"));
    } catch (const ConfigError& e) {
        r.fail(root["scenario"], e.what());
    }
    if (root["name"]) c.name = r.str(root["name"], "name");
    if (root["seed"]) {
        const long s = r.integer(root["seed"], "seed");
        if (s < 0) r.fail(root["seed"], "seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    }

    if (const auto n = root["integrator"]) {
        r.keys(n, "integrator", {"step", "horizon", "stride", "parallel"});
        each(n, [&](const std::string& k, const YAML::Node& v) {
            if (k == "step") c.integrator.step = r.num(v, "integrator.step");
            else if (k == "horizon") c.integrator.horizon = r.num(v, "integrator.horizon");
            else if (k == "stride") c.integrator.stride = static_cast<int>(r.integer(v, "integrator.stride"));
            else if (k == "parallel") c.integrator.parallel = r.boolean(v, "integrator.parallel");
        });
    }

    c.plant.model = default_model(c.kind);
    if (const auto n = root["plant"]) {
        r.keys(n, "plant", {"model", "mass", "dim", "gravity", "inertia", "momentum"});
        each(n, [&](const std::string& k, const YAML::Node& v) {
            if (k == "model") c.plant.model = r.str(v, "plant.model");
            else if (k == "mass") c.plant.mass = r.num(v, "plant.mass");
            else if (k == "dim") c.plant.dim = static_cast<int>(r.integer(v, "plant.dim"));
            else if (k == "gravity") c.plant.gravity = r.num(v, "plant.gravity");
            else if (k == "momentum") c.plant.momentum = r.vec(v, "plant.momentum");
        });
        if (c.plant.model == "spacecraft") c.plant.inertia = r.gain(n["inertia"], "plant.inertia", 3);
    } else if (c.plant.model == "spacecraft") {
        c.plant.inertia = Reader::identity(3, 1.0);
    }
    if (c.plant.model == "spacecraft" && c.plant.momentum.empty()) c.plant.momentum = {0.0, 0.0, 0.0};

    if (const auto n = root["agents"]) {
        r.keys(n, "agents", {"count", "q0", "qd0", "spread", "randomize"});
        each(n, [&](const std::string& k, const YAML::Node& v) {
            if (k == "count") c.agents.count = static_cast<int>(r.integer(v, "agents.count"));
            else if (k == "q0") c.agents.q0 = r.mat(v, "agents.q0");
            else if (k == "qd0") c.agents.qd0 = r.mat(v, "agents.qd0");
            else if (k == "spread") c.agents.spread = r.num(v, "agents.spread");
            else if (k == "randomize") c.agents.randomize = r.boolean(v, "agents.randomize");
        });
    }

    if (const auto n = root["topology"]) {
        r.keys(n, "topology", {"graphs", "rotation", "switch_times", "active", "dwell"});
        each(n, [&](const std::string& k, const YAML::Node& v) {
            if (k == "graphs") {
                if (!v.IsSequence()) r.fail(v, "topology.graphs must be a list of matrices");
                for (const auto& g : v) c.topology.graphs.push_back(r.mat(g, "topology.graphs"));
            } else if (k == "rotation") c.topology.rotation = r.num(v, "topology.rotation");
            else if (k == "switch_times") c.topology.switch_times = r.vec(v, "topology.switch_times");
            else if (k == "active") {
                for (double a : r.vec(v, "topology.active")) c.topology.active.push_back(static_cast<int>(a));
            } else if (k == "dwell") c.topology.dwell = r.num(v, "topology.dwell");
        });
    }

    if (const auto n = root["delays"]) {
        r.keys(n, "delays", {"common", "edges"});
        if (n["common"]) c.delays.common = parse_delay(r, n["common"], "delays.common");
        if (const auto e = n["edges"]) {
            if (!e.IsSequence()) r.fail(e, "delays.edges must be a list");
            for (const auto& item : e) {
                EdgeDelay ed;
                ed.spec = parse_delay(r, item, "delays.edges");
                if (!item["i"] || !item["j"]) r.fail(item, "delays.edges entries need i and j");
                ed.i = static_cast<int>(r.integer(item["i"], "delays.edges.i"));
                ed.j = static_cast<int>(r.integer(item["j"], "delays.edges.j"));
                c.delays.edges.push_back(ed);
            }
        }
    }

    if (const auto n = root["refdyn"]) {
        r.keys(n, "refdyn", {"variant", "roots", "lambda_m", "alpha", "beta", "gamma", "gamma_factor",
                             "alpha1", "alpha2"});
        each(n, [&](const std::string& k, const YAML::Node& v) {
            auto& d = c.refdyn;
            if (k == "variant") d.variant = r.str(v, "refdyn.variant");
            else if (k == "roots") d.roots = r.vec(v, "refdyn.roots");
            else if (k == "lambda_m") d.lambda_m = r.num(v, "refdyn.lambda_m");
            else if (k == "alpha") d.alpha = r.num(v, "refdyn.alpha");
            else if (k == "beta") d.beta = r.num(v, "refdyn.beta");
            else if (k == "gamma") d.gamma = r.num(v, "refdyn.gamma");
            else if (k == "gamma_factor") d.gamma_factor = r.num(v, "refdyn.gamma_factor");
            else if (k == "alpha1") d.alpha1 = r.num(v, "refdyn.alpha1");
            else if (k == "alpha2") d.alpha2 = r.num(v, "refdyn.alpha2");
        });
    }

    const YAML::Node ctl = root["control"] ? root["control"] : YAML::Node(YAML::NodeType::Map);
    r.keys(ctl, "control", {"law", "k", "gamma", "param_error", "k_star", "lambda", "kappa", "kin_error",
                            "lambda_f", "gain", "filter", "gamma_star", "alpha_star", "mass_error",
                            "clamp", "condition_cap", "sigma_min_ratio"});
    each(ctl, [&](const std::string& k, const YAML::Node& v) {
        auto& d = c.control;
        if (k == "law") d.law = r.str(v, "control.law");
        else if (k == "param_error") d.param_error = r.num(v, "control.param_error");
        else if (k == "kappa") d.kappa = r.num(v, "control.kappa");
        else if (k == "kin_error") d.kin_error = r.num(v, "control.kin_error");
        else if (k == "gain") d.gain = r.num(v, "control.gain");
        else if (k == "filter") d.filter = r.num(v, "control.filter");
        else if (k == "gamma_star") d.gamma_star = r.num(v, "control.gamma_star");
        else if (k == "alpha_star") d.alpha_star = r.num(v, "control.alpha_star");
        else if (k == "mass_error") d.mass_error = r.num(v, "control.mass_error");
        else if (k == "clamp") d.clamp = r.num(v, "control.clamp");
        else if (k == "condition_cap") d.condition_cap = r.num(v, "control.condition_cap");
        else if (k == "sigma_min_ratio") d.sigma_min_ratio = r.num(v, "control.sigma_min_ratio");
    });
    if (c.plant.model == "spacecraft") {
        c.control.k = r.gain(ctl["k"], "control.k", 4);
        c.control.lambda_f = r.gain(ctl["lambda_f"], "control.lambda_f", 4);
    } else if (is_lagrangian_plant(c)) {
        c.control.k = r.gain(ctl["k"], "control.k", plant_dof(c));
        c.control.gamma = r.gain(ctl["gamma"], "control.gamma", param_count(c));
    }
    if (c.kind == ScenarioKind::TaskspaceTracking) {
        c.control.k_star = r.gain(ctl["k_star"], "control.k_star", 2);
        c.control.lambda = r.gain(ctl["lambda"], "control.lambda", 2);
    }

    if (const auto n = root["reference"]) {
        r.keys(n, "reference", {"profile", "amplitude", "frequency", "center", "radius", "period", "axis",
                                "amplitude2", "period2"});
        each(n, [&](const std::string& k, const YAML::Node& v) {
            auto& d = c.reference;
            if (k == "profile") d.profile = r.str(v, "reference.profile");
            else if (k == "amplitude") d.amplitude = r.num(v, "reference.amplitude");
            else if (k == "frequency") d.frequency = r.num(v, "reference.frequency");
            else if (k == "center") d.center = r.vec(v, "reference.center");
            else if (k == "radius") d.radius = r.num(v, "reference.radius");
            else if (k == "period") d.period = r.num(v, "reference.period");
            else if (k == "axis") d.axis = r.vec(v, "reference.axis");
            else if (k == "amplitude2") d.amplitude2 = r.num(v, "reference.amplitude2");
            else if (k == "period2") d.period2 = r.num(v, "reference.period2");
        });
    }
    if (c.kind == ScenarioKind::TaskspaceTracking && c.reference.center.empty()) c.reference.center = {0.55, 0.2};
    if (c.kind == ScenarioKind::SpacecraftTracking) {
        if (c.reference.axis.empty()) c.reference.axis = {0.0, 0.0, 1.0};
        if (c.reference.profile.empty()) c.reference.profile = "single_axis";
    }

    if (const auto n = root["thresholds"]) {
        r.keys(n, "thresholds", {"max", "min"});
        for (const char* side : {"max", "min"}) {
            const auto t = n[side];
            if (!t || t.IsNull()) continue;
            if (!t.IsMap()) r.fail(t, std::string("thresholds.") + side + " must be a mapping");
            auto& dst = std::string(side) == "max" ? c.thresholds.max : c.thresholds.min;
            each(t, [&](const std::string& k, const YAML::Node& v) {
                dst[k] = r.num(v, std::string("thresholds.") + side + "." + k);
            });
        }
    }
    return c;
}

std::string emit_config(const ScenarioConfig& c) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "scenario" << YAML::Value << to_string(c.kind);
    e << YAML::Key << "name" << YAML::Value << c.name;
    e << YAML::Key << "seed" << YAML::Value << c.seed;

    e << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "step" << YAML::Value << fmt(c.integrator.step);
    e << YAML::Key << "horizon" << YAML::Value << fmt(c.integrator.horizon);
    e << YAML::Key << "stride" << YAML::Value << c.integrator.stride;
    e << YAML::Key << "parallel" << YAML::Value << c.integrator.parallel;
    e << YAML::EndMap;

    e << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "model" << YAML::Value << c.plant.model;
    e << YAML::Key << "mass" << YAML::Value << fmt(c.plant.mass);
    e << YAML::Key << "dim" << YAML::Value << c.plant.dim;
    e << YAML::Key << "gravity" << YAML::Value << fmt(c.plant.gravity);
    e << YAML::Key << "inertia" << YAML::Value;
    emit_mat(e, c.plant.inertia);
    e << YAML::Key << "momentum" << YAML::Value;
    emit_vec(e, c.plant.momentum);
    e << YAML::EndMap;

    e << YAML::Key << "agents" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "count" << YAML::Value << c.agents.count;
    e << YAML::Key << "q0" << YAML::Value;
    emit_mat(e, c.agents.q0);
    e << YAML::Key << "qd0" << YAML::Value;
    emit_mat(e, c.agents.qd0);
    e << YAML::Key << "spread" << YAML::Value << fmt(c.agents.spread);
    e << YAML::Key << "randomize" << YAML::Value << c.agents.randomize;
    e << YAML::EndMap;

    e << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "graphs" << YAML::Value << YAML::BeginSeq;
    for (const auto& g : c.topology.graphs) emit_mat(e, g);
    e << YAML::EndSeq;
    e << YAML::Key << "rotation" << YAML::Value << fmt(c.topology.rotation);
    e << YAML::Key << "switch_times" << YAML::Value;
    emit_vec(e, c.topology.switch_times);
    e << YAML::Key << "active" << YAML::Value << YAML::Flow << c.topology.active;
    e << YAML::Key << "dwell" << YAML::Value << fmt(c.topology.dwell);
    e << YAML::EndMap;

    e << YAML::Key << "delays" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "common" << YAML::Value << YAML::BeginMap;
    emit_delay(e, c.delays.common);
    e << YAML::EndMap;
    e << YAML::Key << "edges" << YAML::Value << YAML::BeginSeq;
    for (const auto& ed : c.delays.edges) {
        e << YAML::BeginMap << YAML::Key << "i" << YAML::Value << ed.i << YAML::Key << "j" << YAML::Value
          << ed.j;
        emit_delay(e, ed.spec);
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::EndMap;

    const auto& d = c.refdyn;
    e << YAML::Key << "refdyn" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "variant" << YAML::Value << d.variant;
    e << YAML::Key << "roots" << YAML::Value;
    emit_vec(e, d.roots);
    e << YAML::Key << "lambda_m" << YAML::Value << fmt(d.lambda_m);
    e << YAML::Key << "alpha" << YAML::Value << fmt(d.alpha);
    e << YAML::Key << "beta" << YAML::Value << fmt(d.beta);
    e << YAML::Key << "gamma" << YAML::Value << fmt(d.gamma);
    e << YAML::Key << "gamma_factor" << YAML::Value << fmt(d.gamma_factor);
    e << YAML::Key << "alpha1" << YAML::Value << fmt(d.alpha1);
    e << YAML::Key << "alpha2" << YAML::Value << fmt(d.alpha2);
    e << YAML::EndMap;

    const auto& k = c.control;
    e << YAML::Key << "control" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "law" << YAML::Value << k.law;
    auto matrix = [&](const char* name, const Matrix& m) {
        if (m.empty()) return;
        e << YAML::Key << name << YAML::Value;
        emit_mat(e, m);
    };
    auto scalar = [&](const char* name, double v) { e << YAML::Key << name << YAML::Value << fmt(v); };
    matrix("k", k.k);
    matrix("gamma", k.gamma);
    scalar("param_error", k.param_error);
    matrix("k_star", k.k_star);
    matrix("lambda", k.lambda);
    scalar("kappa", k.kappa);
    scalar("kin_error", k.kin_error);
    matrix("lambda_f", k.lambda_f);
    scalar("gain", k.gain);
    scalar("filter", k.filter);
    scalar("gamma_star", k.gamma_star);
    scalar("alpha_star", k.alpha_star);
    scalar("mass_error", k.mass_error);
    scalar("clamp", k.clamp);
    scalar("condition_cap", k.condition_cap);
    scalar("sigma_min_ratio", k.sigma_min_ratio);
    e << YAML::EndMap;

    const auto& rf = c.reference;
    e << YAML::Key << "reference" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "profile" << YAML::Value << rf.profile;
    scalar("amplitude", rf.amplitude);
    scalar("frequency", rf.frequency);
    e << YAML::Key << "center" << YAML::Value;
    emit_vec(e, rf.center);
    scalar("radius", rf.radius);
    scalar("period", rf.period);
    e << YAML::Key << "axis" << YAML::Value;
    emit_vec(e, rf.axis);
    scalar("amplitude2", rf.amplitude2);
    scalar("period2", rf.period2);
    e << YAML::EndMap;

    e << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap;
    for (const auto& [side, m] : {std::pair{"max", &c.thresholds.max}, std::pair{"min", &c.thresholds.min}}) {
        e << YAML::Key << side << YAML::Value << YAML::BeginMap;
        for (const auto& [name, v] : *m) scalar(name.c_str(), v);
        e << YAML::EndMap;
    }
    e << YAML::EndMap;

    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::string apply_overrides(const std::string& resolved_yaml, const std::vector<std::string>& sets) {
    YAML::Node root = YAML::Load(resolved_yaml);
    for (const auto& assignment : sets) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override '" + assignment + "' must have the form key=value");
        const std::string key = assignment.substr(0, eq);
        const std::string value = assignment.substr(eq + 1);
        std::vector<std::string> path;
        std::stringstream ss(key);
        for (std::string part; std::getline(ss, part, '.');) path.push_back(part);
        YAML::Node cur = root;
        for (std::size_t p = 0; p + 1 < path.size(); ++p) {
            YAML::Node next;
            if (cur.IsSequence()) {
                const auto idx = static_cast<std::size_t>(std::stoul(path[p]));
                if (idx >= cur.size()) throw ConfigError("override key '" + key + "' does not exist");
                next.reset(cur[idx]);
            } else if (cur.IsMap() && cur[path[p]]) {
                next.reset(cur[path[p]]);
            } else {
                throw ConfigError("override key '" + key + "' does not exist");
            }
            cur.reset(next);
        }
        const std::string& leaf = path.back();
        YAML::Node parsed;
        try {
            parsed = YAML::Load(value);
        } catch (const YAML::Exception& e) {
            throw ConfigError("override '" + assignment + "': " + e.msg);
        }
        if (cur.IsSequence()) {
            std::size_t idx = 0;
            try {
                idx = static_cast<std::size_t>(std::stoul(leaf));
            } catch (const std::exception&) {
                throw ConfigError("override key '" + key + "' does not exist");
            }
            if (idx >= cur.size()) throw ConfigError("override key '" + key + "' does not exist");
            cur[idx] = parsed;
        } else {
            // Optional gain entries are emitted only for kinds that use them.
            if (!cur.IsMap() || !cur[leaf]) throw ConfigError("override key '" + key + "' does not exist");
            cur[leaf] = parsed;
        }
    }
    YAML::Emitter e;
    e << root;
    return std::string(e.c_str()) + "\n";
}

double tracking_leader_bound(const ScenarioConfig& c) {
    const auto& d = c.refdyn;
    if (d.variant == "first") return leader_xi_dot_sup(c.reference.amplitude, c.reference.frequency, d.alpha);
    return leader_xi_star_dot_sup(c.reference.amplitude, c.reference.frequency, d.alpha, d.beta);
}

SwitchingSchedule build_schedule(const ScenarioConfig& c) {
    const auto& t = c.topology;
    std::vector<DirectedGraph> graphs;
    for (const auto& g : t.graphs) graphs.emplace_back(as_matrix(g));
    if (graphs.empty()) return SwitchingSchedule::fixed(DirectedGraph::empty(graph_size(c)));
    const double h = c.integrator.step;
    if (t.rotation > 0.0) {
        std::vector<double> times;
        std::vector<std::size_t> active;
        const long period_steps = std::lround(t.rotation / h);
        for (long k = 0;; ++k) {
            const double ts = static_cast<double>(k * period_steps) * h;
            if (k > 0 && ts > c.integrator.horizon) break;
            times.push_back(ts);
            active.push_back(static_cast<std::size_t>(k) % graphs.size());
        }
        return SwitchingSchedule(graphs, times, active, t.dwell > 0.0 ? t.dwell : t.rotation);
    }
    if (t.switch_times.empty()) return SwitchingSchedule::fixed(graphs.front());
    std::vector<std::size_t> active;
    for (int a : t.active) {
        if (a < 0) throw ConfigError("topology.active entries must be nonnegative");
        active.push_back(static_cast<std::size_t>(a));
    }
    double dwell = t.dwell;
    if (!(dwell > 0.0)) {
        dwell = 1.0;
        for (std::size_t k = 1; k < t.switch_times.size(); ++k)
            dwell = k == 1 ? t.switch_times[1] - t.switch_times[0]
                           : std::min(dwell, t.switch_times[k] - t.switch_times[k - 1]);
    }
    return SwitchingSchedule(graphs, t.switch_times, active, dwell);
}

std::vector<std::vector<DelayProfile>> build_delays(const ScenarioConfig& c) {
    const int n = graph_size(c);
    auto make = [](const DelaySpec& d) {
        return DelayProfile(d.base, d.amplitude, d.rate, d.jumps, d.bound);
    };
    std::vector<std::vector<DelayProfile>> out(n, std::vector<DelayProfile>(n, make(c.delays.common)));
    for (const auto& e : c.delays.edges) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
            throw ConfigError("delays.edges entry (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                              ") is outside the graph");
        out[e.i][e.j] = make(e.spec);
    }
    return out;
}

std::vector<std::string> validate_config(ScenarioConfig& c) {
    std::vector<std::string> warnings;
    const auto& ig = c.integrator;
    require(ig.step > 0.0 && std::isfinite(ig.step), "integrator.step must be positive");
    require(ig.horizon >= 0.0 && std::isfinite(ig.horizon), "integrator.horizon must be nonnegative");
    require(ig.stride >= 1, "integrator.stride must be at least 1");
    const double h = ig.step;
    const double steps = ig.horizon / h;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
        throw ConfigError("integrator.horizon must be a multiple of integrator.step");

    const auto& p = c.plant;
    static const std::set<std::string> models{"two_link_arm", "point_mass", "tpv", "spacecraft"};
    require(models.count(p.model) == 1, "plant.model '" + p.model + "' is not supported");
    switch (c.kind) {
        case ScenarioKind::ConsensusLagrangian:
        case ScenarioKind::BaselineComparison:
        case ScenarioKind::DistributedTracking:
            require(is_lagrangian_plant(c), "plant.model must be two_link_arm or point_mass for " +
                                                to_string(c.kind));
            break;
        case ScenarioKind::TaskspaceTracking:
            require(p.model == "two_link_arm", "plant.model must be two_link_arm for taskspace-tracking");
            break;
        case ScenarioKind::PointmassTracking:
            require(p.model == "point_mass", "plant.model must be point_mass for pointmass-tracking");
            break;
        case ScenarioKind::ConsensusTpv:
            require(p.model == "tpv", "plant.model must be tpv for consensus-tpv");
            break;
        case ScenarioKind::SpacecraftTracking:
            require(p.model == "spacecraft", "plant.model must be spacecraft for spacecraft-tracking");
            break;
    }
    require(p.mass > 0.0, "plant.mass must be positive");
    require(p.dim >= 1, "plant.dim must be at least 1");
    require(p.gravity >= 0.0, "plant.gravity must be nonnegative");
    if (p.model == "spacecraft") {
        require_spd(p.inertia, "plant.inertia");
        require(p.momentum.size() == 3, "plant.momentum needs 3 entries");
    }

    const auto& a = c.agents;
    require(a.count >= 1, "agents.count must be at least 1");
    if (!uses_network(c)) require(a.count == 1, to_string(c.kind) + " runs a single agent");
    const int q_dim = p.model == "spacecraft" ? 4 : plant_dof(c);
    const int qd_dim = plant_dof(c);
    auto check_rows = [&](const Matrix& m, int dim, const std::string& name) {
        if (m.empty()) return;
        require(static_cast<int>(m.size()) == a.count,
                name + " needs one row per agent (" + std::to_string(a.count) + ")");
        for (const auto& row : m)
            require(static_cast<int>(row.size()) == dim, name + " rows need " + std::to_string(dim) + " entries");
    };
    check_rows(a.q0, q_dim, "agents.q0");
    check_rows(a.qd0, qd_dim, "agents.qd0");
    require(a.spread >= 0.0, "agents.spread must be nonnegative");

    // Grid alignment of switch and jump instants.
    auto align = [&](double& t, const std::string& what) {
        const double r = round_to_grid(t, h);
        if (r != t) {
            std::ostringstream os;
            os << what << " " << t << " rounded to the step grid (" << r << ")";
            warnings.push_back(os.str());
            t = r;
        }
    };
    auto& topo = c.topology;
    if (uses_network(c)) {
        require(!topo.graphs.empty(), "topology.graphs must list at least one graph");
        for (const auto& g : topo.graphs) {
            const Mat w = as_matrix(g);
            require(w.rows() == graph_size(c) && w.cols() == graph_size(c),
                    "topology graphs must be " + std::to_string(graph_size(c)) + "x" +
                        std::to_string(graph_size(c)));
            if (c.kind == ScenarioKind::DistributedTracking)
                require(w.row(0).isZero(0.0), "leader row (vertex 0) of every graph must be zero");
        }
        require(topo.rotation >= 0.0, "topology.rotation must be nonnegative");
        require(topo.rotation == 0.0 || topo.switch_times.empty(),
                "topology.rotation and topology.switch_times are mutually exclusive");
        if (topo.rotation > 0.0) align(topo.rotation, "topology.rotation");
        require(topo.rotation == 0.0 || topo.rotation >= h, "topology.rotation must be at least one step");
        for (auto& t : topo.switch_times) align(t, "switch time");
    }
    const auto schedule = build_schedule(c);

    auto& common = c.delays.common;
    auto resolve_delay = [&](DelaySpec& d) {
        for (auto& j : d.jumps) align(j.first, "delay jump time");
        if (d.bound == 0.0) d.bound = std::max(delay_max(d), h);
    };
    resolve_delay(common);
    for (auto& e : c.delays.edges) resolve_delay(e.spec);
    if (c.kind == ScenarioKind::DistributedTracking) {
        require(delay_max(common) == 0.0 && c.delays.edges.empty(),
                "distributed-tracking exchanges undelayed signals; delays must be zero");
    }
    if (uses_network(c)) {
        for (const auto& row : build_delays(c))
            for (const auto& prof : row) prof.validate(ig.horizon, h);
    }

    auto& d = c.refdyn;
    switch (c.kind) {
        case ScenarioKind::ConsensusLagrangian: {
            static const std::map<std::string, ConsensusVariant> variants{
                {"first_order", ConsensusVariant::FirstOrder},
                {"second_order_fixed", ConsensusVariant::SecondOrderFixed},
                {"second_order_switching", ConsensusVariant::SecondOrderSwitching},
                {"general_velocity", ConsensusVariant::GeneralVelocity},
                {"general_position", ConsensusVariant::GeneralPosition},
            };
            const auto it = variants.find(d.variant);
            require(it != variants.end(), "refdyn.variant '" + d.variant + "' is not a consensus variant");
            const auto spec = hurwitz_from_roots(d.roots);
            check_variant(it->second, spec, schedule.switches());
            require(d.lambda_m >= 0.0, "refdyn.lambda_m must be nonnegative");
            require(d.lambda_m == 0.0 || it->second == ConsensusVariant::SecondOrderFixed,
                    "refdyn.lambda_m applies to second_order_fixed only");
            break;
        }
        case ScenarioKind::ConsensusTpv: {
            static const std::set<std::string> laws{"continuous", "exact", "adaptive"};
            require(laws.count(c.control.law) == 1, "control.law must be continuous, exact or adaptive");
            const std::size_t need = c.control.law == "continuous" ? 2 : 3;
            require(d.roots.size() == need,
                    "refdyn.roots needs " + std::to_string(need) + " entries for the " + c.control.law + " law");
            hurwitz_from_roots(d.roots);
            break;
        }
        case ScenarioKind::PointmassTracking:
            require(d.roots.size() == 3, "refdyn.roots needs 3 entries for pointmass-tracking");
            hurwitz_from_roots(d.roots);
            break;
        case ScenarioKind::TaskspaceTracking:
            require(d.alpha > 0.0, "refdyn.alpha must be positive");
            break;
        case ScenarioKind::SpacecraftTracking:
            require(d.alpha1 > 0.0 && d.alpha2 > 0.0, "refdyn.alpha1 and refdyn.alpha2 must be positive");
            break;
        case ScenarioKind::DistributedTracking: {
            require(d.variant == "first" || d.variant == "second" || d.variant == "noaccel",
                    "refdyn.variant must be first, second or noaccel for distributed-tracking");
            require(d.alpha > 0.0, "refdyn.alpha must be positive");
            require(d.variant == "first" || d.beta > 0.0, "refdyn.beta must be positive");
            const double bound = tracking_leader_bound(c);
            if (d.gamma == 0.0 && d.gamma_factor > 0.0) d.gamma = d.gamma_factor * bound;
            if (!(d.gamma > bound)) {
                std::ostringstream os;
                os << "gamma must exceed " << (d.variant == "first" ? "sup|xi0_dot|" : "sup|xi0_star_dot|")
                   << " = " << bound;
                throw ConfigError(os.str());
            }
            break;
        }
        case ScenarioKind::BaselineComparison:
            break;
    }

    const auto& k = c.control;
    if (is_lagrangian_plant(c)) {
        require_spd(k.k, "control.k");
        require(is_zero(k.gamma) || is_spd(k.gamma), "control.gamma must be zero or symmetric positive definite");
        require(k.param_error < 1.0, "control.param_error must be below 1");
    }
    if (c.kind == ScenarioKind::TaskspaceTracking) {
        require_spd(k.k_star, "control.k_star");
        require_spd(k.lambda, "control.lambda");
        require(k.kappa > 0.0, "control.kappa must be positive");
        require(k.kin_error < 1.0, "control.kin_error must be below 1");
        require(k.condition_cap > 1.0, "control.condition_cap must exceed 1");
        require(c.reference.center.size() == 2, "reference.center needs 2 entries");
    }
    if (p.model == "spacecraft") {
        require_spd(k.k, "control.k");
        require_spd(k.lambda_f, "control.lambda_f");
        require(c.reference.axis.size() == 3 && as_vector(c.reference.axis).norm() > 0.0,
                "reference.axis must be a nonzero 3-vector");
        static const std::set<std::string> profiles{"constant", "single_axis", "two_axis"};
        require(profiles.count(c.reference.profile) == 1,
                "reference.profile must be constant, single_axis or two_axis");
    }
    if (c.kind == ScenarioKind::PointmassTracking || c.kind == ScenarioKind::ConsensusTpv) {
        require(k.gain > 0.0, "control.gain must be positive");
        require(k.gamma_star > 0.0, "control.gamma_star must be positive");
        require(k.mass_error > -1.0, "control.mass_error must exceed -1");
    }
    if (c.kind == ScenarioKind::PointmassTracking) require(k.filter > 0.0, "control.filter must be positive");
    if (c.kind == ScenarioKind::ConsensusTpv) {
        require(k.alpha_star > 0.0, "control.alpha_star must be positive");
        require(k.sigma_min_ratio > 0.0 && k.sigma_min_ratio < 1.0, "control.sigma_min_ratio must lie in (0, 1)");
    }
    if (c.kind == ScenarioKind::BaselineComparison) require(k.clamp > 0.0, "control.clamp must be positive");
    require(c.reference.period > 0.0 && c.reference.period2 > 0.0, "reference periods must be positive");
    return warnings;
}

LoadedConfig load_config_text(const std::string& text, const std::string& source,
                              const std::vector<std::string>& sets) {
    ScenarioConfig parsed = parse_config(text, source);
    if (!sets.empty()) parsed = parse_config(apply_overrides(emit_config(parsed), sets), source + " (overridden)");
    LoadedConfig out;
    out.config = std::move(parsed);
    out.warnings = validate_config(out.config);
    return out;
}

LoadedConfig load_config_file(const std::string& path, const std::vector<std::string>& sets) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str(), path, sets);
}

}  // namespace fstep
