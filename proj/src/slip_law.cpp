#include "slipflow/slip_law.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace slipflow {

Vec2 SlipLaw::wall_velocity(double t) const
{
    if (const auto* wall = std::get_if<MovingWallLaw>(&law_))
        return wall->wall_velocity(t);
    return Vec2::Zero();
}

std::optional<double> SlipLaw::traction_bound(double radius) const
{
    if (const auto* l = std::get_if<StickSlipLaw>(&law_))
        return l->gamma_star * radius + l->mu_star;
    return std::nullopt;
}

SlipLaw SlipLaw::with_lambda(double lambda) const
{
    SlipLaw copy = *this;
    copy.props_.lambda = lambda;
    return copy;
}

const CertificateClause* Certificate::find(const std::string& name) const
{
    for (const auto& c : clauses)
        if (c.name == name)
            return &c;
    return nullptr;
}

SlipLaw navier(double gamma)
{
    return SlipLaw(NavierLaw{gamma}, {"navier", 2.0, std::max(0.0, -gamma), 0.0, gamma > 0});
}

SlipLaw leroux_rajagopal(double a, double b, double c, double theta)
{
    if (a <= 0 || b <= 0 || c <= 0)
        throw ConfigError("leroux_rajagopal requires a, b, c > 0");
    SlipLaw law(LeRouxRajagopalLaw{a, b, c, theta}, {"leroux_rajagopal", 2.0, 0.0, 0.0, true});
    return law.with_lambda(fitted_monotonicity_defect(law));
}

SlipLaw stick_slip_regularized(double gamma_star, double mu_star, double epsilon)
{
    if (epsilon <= 0)
        throw ConfigError("regularization parameter epsilon must be positive");
    if (mu_star < 0 || gamma_star < 0)
        throw ConfigError("stick-slip law requires gamma_star, mu_star >= 0");
    const double r = gamma_star == 0 ? 1.0 : 2.0;
    return SlipLaw(StickSlipLaw{gamma_star, mu_star, epsilon},
                   {gamma_star == 0 ? "tresca" : "stick_slip", r, 0.0, 0.0, true});
}

SlipLaw tresca_regularized(double mu_star, double epsilon)
{
    return stick_slip_regularized(0.0, mu_star, epsilon);
}

SlipLaw fang_regularized(double a, double b, double beta_exp, double epsilon)
{
    if (epsilon <= 0)
        throw ConfigError("regularization parameter epsilon must be positive");
    if (!(a > b) || b < 0 || beta_exp < 0)
        throw ConfigError("fang law requires a > b >= 0 and beta_exp >= 0");
    return SlipLaw(FangLaw{a, b, beta_exp, epsilon}, {"fang", 2.0, beta_exp * (a - b), 0.0, true});
}

SlipLaw dynamic_moving_wall(double gamma_star, double beta_star, double theta_star)
{
    if (gamma_star < 0 || beta_star < 0 || theta_star <= 0)
        throw ConfigError("dynamic law requires gamma_star, beta_star >= 0 and theta_star > 0");
    return SlipLaw(MovingWallLaw{gamma_star, beta_star, theta_star},
                   {"dynamic", 2.0, 0.0, beta_star, gamma_star > 0});
}

SlipLaw make_slip_law(const std::string& name, const std::map<std::string, double>& params)
{
    std::set<std::string> used;
    const auto get = [&](const std::string& key, std::optional<double> fallback = std::nullopt) {
        used.insert(key);
        if (auto it = params.find(key); it != params.end())
            return it->second;
        if (!fallback)
            throw ConfigError("slip law '" + name + "' requires parameter '" + key + "'");
        return *fallback;
    };

    std::optional<SlipLaw> law;
    if (name == "navier") {
        law = navier(get("gamma"));
    } else if (name == "leroux_rajagopal") {
        law = leroux_rajagopal(get("a", 1.0), get("b", 0.1), get("c", 0.001), get("theta", -0.75));
    } else if (name == "tresca") {
        law = tresca_regularized(get("mu_star", 1.0), get("epsilon", 2e-4));
    } else if (name == "stick_slip") {
        law = stick_slip_regularized(get("gamma_star", 0.0), get("mu_star", 1.0), get("epsilon", 2e-4));
    } else if (name == "fang") {
        law = fang_regularized(get("a", 1.6), get("b", 1.5), get("beta_exp", 10.0), get("epsilon", 2e-4));
    } else if (name == "dynamic") {
        law = dynamic_moving_wall(get("gamma_star", 1.0), get("beta_star", 0.0), get("theta_star", 0.01));
    } else {
        throw ConfigError("unknown slip law '" + name + "'");
    }
    for (const auto& [key, value] : params)
        if (!used.contains(key))
            throw ConfigError("unknown parameter '" + key + "' for slip law '" + name + "'");
    return *law;
}

namespace {

double min_symmetric_eigenvalue(const Mat2& j)
{
    return Eigen::SelfAdjointEigenSolver<Mat2>(sym(j), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double slope_at(const SlipLaw& law, double r)
{
    return min_symmetric_eigenvalue(law.jacobian(Vec2(r, 0), {}));
}

std::string format_point(const Vec2& v)
{
    std::ostringstream os;
    os.precision(6);
    os << '(' << v.x() << ", " << v.y() << ')';
    return os.str();
}

} // namespace

double fitted_monotonicity_defect(const SlipLaw& law, double radius)
{
    constexpr int grid = 4000;
    const double lo = 1e-8;
    double best_r = 0, best = slope_at(law, 0.0);
    for (int i = 0; i <= grid; ++i) {
        const double r = lo * std::pow(radius / lo, double(i) / grid);
        const double s = slope_at(law, r);
        if (s < best) {
            best = s;
            best_r = r;
        }
    }
    if (best_r > 0) {
        // Golden-section refinement between the neighbouring grid points.
        const double step = std::pow(radius / lo, 1.0 / grid);
        double a = best_r / step, b = std::min(best_r * step, radius);
        const double g = (std::sqrt(5.0) - 1) / 2;
        for (int it = 0; it < 100; ++it) {
            const double c = b - g * (b - a), d = a + g * (b - a);
            if (slope_at(law, c) < slope_at(law, d))
                b = d;
            else
                a = c;
        }
        best = std::min(best, slope_at(law, 0.5 * (a + b)));
    }
    return std::max(0.0, -best);
}

Certificate certify(const SlipLaw& law, const CertifyOptions& options)
{
    if (law.has_wall_velocity())
        throw ConfigError("certify requires a law without wall velocity");

    Certificate cert;
    cert.lambda = options.lambda.value_or(law.lambda());
    const double lambda = cert.lambda;
    const double radius = options.radius;
    const SlipTime time{};
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto random_direction = [&] {
        const double phi = 2 * std::numbers::pi * unit(rng);
        return Vec2(std::cos(phi), std::sin(phi));
    };
    const auto random_in_disk = [&] { return radius * std::sqrt(unit(rng)) * random_direction(); };
    const auto log_radius = [&] { return 1e-6 * std::pow(radius / 1e-6, unit(rng)); };

    // Sample set: uniform in the disk plus log-distributed magnitudes, so the
    // regularization scale near the origin is resolved.
    std::vector<Vec2> samples;
    for (int i = 0; i < options.samples; ++i)
        samples.push_back(i % 2 == 0 ? random_in_disk() : Vec2(log_radius() * random_direction()));

    // (i) sigma(0) = 0
    {
        const double s0 = law.traction(Vec2::Zero(), time).norm();
        cert.clauses.push_back({"zero_at_origin", s0 <= 1e-14, -s0, s0 > 1e-14 ? "|sigma(0)| = " + std::to_string(s0) : ""});
    }

    // (ii) lambda-monotonicity on random, radial and nearby pairs; margins are
    // normalized by |v1 - v2|^2.
    {
        constexpr double tol = 1e-8;
        double worst = std::numeric_limits<double>::infinity();
        Vec2 w1 = Vec2::Zero(), w2 = Vec2::Zero();
        const auto check = [&](const Vec2& v1, const Vec2& v2) {
            const Vec2 dv = v1 - v2;
            const double d2 = dv.squaredNorm();
            if (d2 == 0)
                return;
            const double m = ((law.traction(v1, time) - law.traction(v2, time)).dot(dv) + lambda * d2) / d2;
            if (m < worst) {
                worst = m;
                w1 = v1;
                w2 = v2;
            }
        };
        for (int i = 0; i < options.samples; ++i) {
            check(random_in_disk(), random_in_disk());
            const Vec2 dir = random_direction();
            check(log_radius() * dir, log_radius() * dir);
            const Vec2 v = samples[i];
            check(v, v + 1e-3 * (v.norm() + 1e-6) * random_direction());
        }
        CertificateClause c{"lambda_monotone", worst >= -tol, worst, ""};
        if (!c.passed)
            c.detail = "v1 = " + format_point(w1) + ", v2 = " + format_point(w2);
        cert.clauses.push_back(c);
    }

    // (iii) coercivity of s(v) = sigma(v) + lambda v, or linear growth for
    // noncoercive laws.
    const double r = law.growth_exponent();
    if (law.coercive()) {
        double upper = std::numeric_limits<double>::infinity(), lower = 0;
        Vec2 witness = Vec2::Zero();
        for (const Vec2& v : samples) {
            const Vec2 s = law.traction(v, time) + lambda * v;
            const double lhs = s.dot(v);
            const double rhs = r > 1 ? std::pow(s.norm(), r / (r - 1)) + std::pow(v.norm(), r) - 1 : v.norm() - 1;
            if (rhs > 0 && lhs / rhs < upper) {
                upper = lhs / rhs;
                witness = v;
            } else if (rhs < 0) {
                lower = std::max(lower, lhs / rhs);
            }
        }
        cert.coercivity_constant = upper;
        CertificateClause c{"coercivity", upper > 0 && lower <= upper, upper, ""};
        if (!c.passed)
            c.detail = "no positive constant; tightest sample v = " + format_point(witness);
        cert.clauses.push_back(c);
    } else {
        double growth = 0;
        for (const Vec2& v : samples)
            growth = std::max(growth, law.traction(v, time).norm() / (1 + std::pow(v.norm(), r - 1)));
        cert.clauses.push_back({"growth", std::isfinite(growth), growth, ""});
    }

    // (iv) traction bound for bounded laws.
    if (const auto bound = law.traction_bound(radius)) {
        double worst = std::numeric_limits<double>::infinity();
        Vec2 witness = Vec2::Zero();
        for (const Vec2& v : samples) {
            const double margin = *bound - law.traction(v, time).norm();
            if (margin < worst) {
                worst = margin;
                witness = v;
            }
        }
        CertificateClause c{"bounded_traction", worst > 0, worst, ""};
        if (!c.passed)
            c.detail = "bound exceeded at v = " + format_point(witness);
        cert.clauses.push_back(c);
    }
    return cert;
}

} // namespace slipflow
