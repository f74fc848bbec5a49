#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace jha {

inline constexpr double kPi = std::numbers::pi;

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// thrown for kernel evaluations too close to the diagonal to be meaningful
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tolerances {
    double identity = 1e-10;
    double finite_difference = 1e-6;
    double theta_margin = 1e-8;
    double critical = 1e-12;
};

inline constexpr Tolerances kDefaultTolerances{};

class ParamPair {
public:
    ParamPair() = default;
    ParamPair(double alpha, double beta) : alpha_(alpha), beta_(beta)
    {
        if (!(alpha > -1.0) || !(beta > -1.0))
            throw DomainError("Jacobi parameters must satisfy alpha > -1 and beta > -1");
    }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    // lambda = alpha + beta + 1
    double lambda() const { return alpha_ + beta_ + 1.0; }
    bool dk_valid() const { return alpha_ >= -0.5 && beta_ >= -0.5; }
    bool critical(double tol = kDefaultTolerances.critical) const
    {
        return std::abs(alpha_ + beta_ + 1.0) <= tol;
    }

    ParamPair shifted(double da, double db) const { return ParamPair(alpha_ + da, beta_ + db); }

    std::string str() const;

    friend bool operator==(const ParamPair&, const ParamPair&) = default;

private:
    double alpha_ = -0.5;
    double beta_ = -0.5;
};

} // namespace jha
