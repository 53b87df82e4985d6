#pragma once

// Seeded generators shared by the property tests.

#include "forwardstep/so3.hpp"
#include "forwardstep/types.hpp"

#include <random>

namespace fstep::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Vec vec(int n, double lo = -1.0, double hi = 1.0) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
        return v;
    }
    Vec3 vec3(double lo = -1.0, double hi = 1.0) { return vec(3, lo, hi); }

    Mat spd(int n, double floor = 0.5) {
        const Mat a = Eigen::MatrixXd(vec(n * n).reshaped(n, n));
        return a * a.transpose() + floor * Mat::Identity(n, n);
    }

    EulerParam quaternion() {
        Vec4 v;
        do {
            v = Vec4(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
        } while (v.norm() < 0.1);
        return EulerParam::from_vec4(v.normalized());
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(const Vec& a, const Vec& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace fstep::testing
