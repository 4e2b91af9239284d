#pragma once
// Shared small utilities: error types, vector helpers, angle wrapping, RNG.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace arnold {

/// Bad input or a request outside an operation's domain.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A solver or accuracy failure (non-convergence, tolerance breach, ...).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A configured budget (points, steps, time horizon) was exhausted.
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

using Vec = std::vector<double>;

constexpr double PI = 3.14159265358979323846264338327950288;
constexpr double TWO_PI = 2.0 * PI;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline Vec operator+(Vec a, const Vec& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec operator-(Vec a, const Vec& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec operator*(double s, Vec a) {
    for (double& x : a) x *= s;
    return a;
}

/// Wrap to (-pi, pi].
inline double wrap_pi(double x) {
    x = std::fmod(x, TWO_PI);
    if (x <= -PI) x += TWO_PI;
    if (x > PI) x -= TWO_PI;
    return x;
}

/// Wrap to [0, 2*pi).
inline double wrap_2pi(double x) {
    x = std::fmod(x, TWO_PI);
    if (x < 0) x += TWO_PI;
    return x;
}

/// Distance of x to the lattice period*Z, component count from vector size.
inline double dist_mod(const Vec& x, double period) {
    double s = 0.0;
    for (double xi : x) {
        double r = std::remainder(xi, period);
        s += r * r;
    }
    return std::sqrt(s);
}

/// Deterministic RNG for tests and studies.
inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

}  // namespace arnold
