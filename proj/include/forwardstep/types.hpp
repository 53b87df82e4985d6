#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fstep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;

/// Raised when a scenario description or a constructed object violates an invariant.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for misuse of a runtime object (non-monotone history, out-of-range queries).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised inside a run when the closed loop leaves its admissible region (singular Jacobian
/// estimate, thrust below the floor). The runner turns it into an abort event.
class AbortError : public std::runtime_error {
public:
    AbortError(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

/// How the per-agent loops inside a closed-loop derivative are executed.
/// Both policies perform identical arithmetic per agent, so results are bitwise equal.
enum class ExecPolicy { Serial, Parallel };

inline const Vec3& e3() {
    static const Vec3 v(0.0, 0.0, 1.0);
    return v;
}

/// Componentwise signum with sgn(0) = 0.
inline Vec sgn(const Vec& v) {
    return v.unaryExpr([](double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); });
}

}  // namespace fstep
