#pragma once

#include "slipflow/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace slipflow {

/// Time at which a law is evaluated. `dt == 0` means a steady evaluation, in
/// which case difference quotients of the wall velocity vanish.
struct SlipTime {
    double t = 0;
    double dt = 0;
};

// Concrete laws. Each exposes traction(v, time) templated on the scalar type
// and an analytic jacobian(v, time) = d traction / d v.

/// Linear Navier friction, sigma = gamma v.
struct NavierLaw {
    double gamma;

    template <typename Scalar>
    Vector2<Scalar> traction(const Vector2<Scalar>& v, SlipTime) const
    {
        return Scalar(gamma) * v;
    }
    Mat2 jacobian(const Vec2&, SlipTime) const { return gamma * Mat2::Identity(); }
};

/// Nonmonotone smooth law sigma = (a (1 + b |v|^2)^theta + c) v.
struct LeRouxRajagopalLaw {
    double a, b, c, theta;

    template <typename Scalar>
    Vector2<Scalar> traction(const Vector2<Scalar>& v, SlipTime) const
    {
        using std::pow;
        return (Scalar(a) * pow(Scalar(1) + Scalar(b) * v.squaredNorm(), Scalar(theta)) + Scalar(c)) * v;
    }
    Mat2 jacobian(const Vec2& v, SlipTime) const
    {
        const double s = v.squaredNorm();
        const double g = a * std::pow(1 + b * s, theta) + c;
        const double dg = a * b * theta * std::pow(1 + b * s, theta - 1);
        return g * Mat2::Identity() + 2 * dg * v * v.transpose();
    }
};

/// Regularized stick-slip friction, sigma = gamma v + mu v / sqrt(|v|^2 + eps^2).
/// gamma = 0 is regularized Tresca friction.
struct StickSlipLaw {
    double gamma_star, mu_star, epsilon;

    template <typename Scalar>
    Vector2<Scalar> traction(const Vector2<Scalar>& v, SlipTime) const
    {
        using std::sqrt;
        const Scalar root = sqrt(v.squaredNorm() + Scalar(epsilon * epsilon));
        return (Scalar(gamma_star) + Scalar(mu_star) / root) * v;
    }
    Mat2 jacobian(const Vec2& v, SlipTime) const
    {
        const double q = v.squaredNorm() + epsilon * epsilon;
        const double root = std::sqrt(q);
        return (gamma_star + mu_star / root) * Mat2::Identity() - mu_star / (q * root) * v * v.transpose();
    }
};

/// Regularized nonmonotone Tresca law with velocity-dependent threshold
/// mu(|v|) = (a - b) exp(-beta_exp |v|) + b:
/// sigma = mu(|v|) v / sqrt(|v|^2 + eps^2).
struct FangLaw {
    double a, b, beta_exp, epsilon;

    template <typename Scalar>
    Scalar threshold(Scalar speed) const
    {
        using std::exp;
        return Scalar(a - b) * exp(-Scalar(beta_exp) * speed) + Scalar(b);
    }

    template <typename Scalar>
    Vector2<Scalar> traction(const Vector2<Scalar>& v, SlipTime) const
    {
        using std::sqrt;
        const Scalar s2 = v.squaredNorm();
        return threshold(sqrt(s2)) / sqrt(s2 + Scalar(epsilon * epsilon)) * v;
    }
    Mat2 jacobian(const Vec2& v, SlipTime) const
    {
        const double speed = v.norm();
        const double q = speed * speed + epsilon * epsilon;
        const double root = std::sqrt(q);
        const double mu = threshold(speed);
        Mat2 j = mu / root * Mat2::Identity() - mu / (q * root) * v * v.transpose();
        if (speed > 0) {
            const double dmu = -beta_exp * (a - b) * std::exp(-beta_exp * speed);
            j += dmu / (root * speed) * v * v.transpose();
        }
        return j;
    }
};

/// Dynamic slip against a wall accelerating to unit speed over theta_star:
/// wall velocity (min(t / theta_star, 1), 0). The traction returned here is
/// gamma (v - u_wall(t)) - beta d_t u_wall(t); the beta d_t v part enters the
/// boundary mass of the time derivative.
struct MovingWallLaw {
    double gamma_star, beta_star, theta_star;

    Vec2 wall_velocity(double t) const { return {std::clamp(t / theta_star, 0.0, 1.0), 0.0}; }
    /// Backward difference quotient of the wall velocity over [t - dt, t].
    Vec2 wall_rate(SlipTime time) const
    {
        if (time.dt <= 0)
            return Vec2::Zero();
        return (wall_velocity(time.t) - wall_velocity(time.t - time.dt)) / time.dt;
    }

    template <typename Scalar>
    Vector2<Scalar> traction(const Vector2<Scalar>& v, SlipTime time) const
    {
        const Vec2 wall = wall_velocity(time.t);
        const Vec2 rate = wall_rate(time);
        return Scalar(gamma_star) * (v - wall.cast<Scalar>()) - Scalar(beta_star) * rate.cast<Scalar>();
    }
    Mat2 jacobian(const Vec2&, SlipTime) const { return gamma_star * Mat2::Identity(); }
};

/// Time-dependent tangential slip law with its structural metadata.
///
/// `lambda` is the monotonicity defect: (sigma(v1) - sigma(v2)) . (v1 - v2)
/// >= -lambda |v1 - v2|^2. It only feeds penalty selection and certification;
/// traction() always returns the full sigma.
class SlipLaw {
public:
    using Variant = std::variant<NavierLaw, LeRouxRajagopalLaw, StickSlipLaw, FangLaw, MovingWallLaw>;

    struct Properties {
        std::string name;
        double growth_exponent = 2; ///< r
        double lambda = 0;
        double beta_star = 0;
        bool coercive = true; ///< sigma + lambda v is coercive (implicit/coercive case)
    };

    SlipLaw(Variant law, Properties props) : law_(std::move(law)), props_(std::move(props)) {}

    Vec2 traction(const Vec2& v, SlipTime time) const
    {
        return std::visit([&](const auto& l) { return l.template traction<double>(v, time); }, law_);
    }
    Mat2 jacobian(const Vec2& v, SlipTime time) const
    {
        return std::visit([&](const auto& l) { return l.jacobian(v, time); }, law_);
    }

    const std::string& name() const { return props_.name; }
    double growth_exponent() const { return props_.growth_exponent; }
    double lambda() const { return props_.lambda; }
    double beta_star() const { return props_.beta_star; }
    bool coercive() const { return props_.coercive; }
    bool monotone() const { return props_.lambda == 0; }

    bool has_wall_velocity() const { return std::holds_alternative<MovingWallLaw>(law_); }
    Vec2 wall_velocity(double t) const;

    /// Upper bound on |sigma(v)| over |v| <= radius for bounded (r = 1 type)
    /// laws; std::nullopt when the law has no such closed-form bound.
    std::optional<double> traction_bound(double radius) const;

    /// Same law with a different declared monotonicity defect.
    SlipLaw with_lambda(double lambda) const;

    const Variant& variant() const { return law_; }

private:
    Variant law_;
    Properties props_;
};

SlipLaw navier(double gamma);
SlipLaw leroux_rajagopal(double a, double b, double c, double theta);
SlipLaw tresca_regularized(double mu_star, double epsilon);
SlipLaw stick_slip_regularized(double gamma_star, double mu_star, double epsilon);
SlipLaw fang_regularized(double a, double b, double beta_exp, double epsilon);
SlipLaw dynamic_moving_wall(double gamma_star, double beta_star, double theta_star);

/// Builds a law from its name and a parameter map (config-file route).
/// Names: navier, leroux_rajagopal, tresca, stick_slip, fang, dynamic.
SlipLaw make_slip_law(const std::string& name, const std::map<std::string, double>& params);

/// Smallest lambda >= 0 making a rotationally equivariant law lambda-monotone,
/// from the minimum over |v| <= radius of the smallest eigenvalue of the
/// symmetric Jacobian (radial and tangential slopes).
double fitted_monotonicity_defect(const SlipLaw& law, double radius = 1e3);

struct CertificateClause {
    std::string name;
    bool passed = false;
    double value = 0;    ///< worst observed margin (>= 0 when passed)
    std::string detail;  ///< witness points on failure
};

struct Certificate {
    std::vector<CertificateClause> clauses;
    double lambda = 0;
    double coercivity_constant = 0;

    bool passed() const
    {
        return std::all_of(clauses.begin(), clauses.end(), [](const auto& c) { return c.passed; });
    }
    const CertificateClause* find(const std::string& name) const;
};

struct CertifyOptions {
    int samples = 2000;
    double radius = 10;
    std::optional<double> lambda; ///< overrides the law's declared lambda
    std::uint64_t seed = 12345;
};

/// Samples the structural assumptions on a law: sigma(0) = 0, lambda-monotonicity,
/// coercivity of sigma + lambda v (or linear growth for noncoercive laws), and the
/// traction bound for bounded laws. Laws with a wall velocity are rejected.
Certificate certify(const SlipLaw& law, const CertifyOptions& options = {});

} // namespace slipflow
