// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--out DIR] N...   run the listed criteria (default: all)

#include "slipflow/experiments.hpp"
#include "slipflow/forms.hpp"
#include "slipflow/solver.hpp"
#include "slipflow/stability.hpp"
#include "slipflow/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace slipflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
};

fs::path g_out = "acceptance_output";

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

/// Collects named checks into one outcome line.
class Checks {
public:
    void add(const std::string& label, bool ok, const std::string& values)
    {
        pass_ = pass_ && ok;
        if (!text_.empty())
            text_ += "; ";
        text_ += label + (ok ? " ok" : " FAILED") + " (" + values + ")";
    }
    Outcome outcome() const { return {pass_, text_}; }

private:
    bool pass_ = true;
    std::string text_;
};

TaylorHoodSpace top_slip_space(int n, Diagonal diag = Diagonal::right)
{
    return TaylorHoodSpace(build_unit_square(n, diag).tag_boundary(top_wall_predicate()));
}

VectorX random_vector(int size, std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> dist(-scale, scale);
    VectorX v(size);
    for (auto& x : v)
        x = dist(rng);
    return v;
}

double summary_value(const RunArtifacts& art, const std::string& key)
{
    const std::string* v = art.find(key);
    if (!v)
        throw std::runtime_error("summary has no key " + key);
    return std::stod(*v);
}

ExperimentConfig experiment(const std::string& json, const std::string& subdir)
{
    ExperimentConfig c = parse_config(json);
    c.output_dir = (g_out / subdir).string();
    return c;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::string kDynamicConfig = R"({"experiment": "dynamic", "n": 50, "T": 1.0, "dt": 0.005,
    "law.gamma_star": 1.0, "law.theta_star": 0.01, "beta_sweep": [0, 2]})";

Outcome rest_state()
{
    Checks checks;
    const auto space = top_slip_space(32);
    for (const SlipLaw& law : {navier(1.0), leroux_rajagopal(1, 0.1, 0.001, -0.75), tresca_regularized(1, 2e-4),
                               stick_slip_regularized(2, 1, 2e-4), fang_regularized(1.6, 1.5, 10, 2e-4)}) {
        Stopwatch clock;
        FlowProblem pb;
        pb.law = law;
        const NitscheOperator op(space, pb);
        MarchOptions mo;
        mo.final_time = 10 * 0.005;
        mo.dt = 0.005;
        mo.record_wall = false;
        mo.record_energy = false;
        const Trajectory t = time_march(op, SystemState::zero(space), mo, NewtonConfig{});
        const double l2 = std::sqrt(t.final_state.u.dot(velocity_mass_matrix(space) * t.final_state.u));
        const double secs = clock.seconds();
        checks.add(law.name(), l2 <= 1e-12 && secs < 5, "|u|=" + fmt(l2) + ", " + fmt(secs) + " s");
    }
    return checks.outcome();
}

Outcome skew_symmetry()
{
    const auto space = top_slip_space(8);
    std::mt19937_64 rng(2024);
    double worst = 0, antisym = 0, smallest_cross = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 50; ++k) {
        const VectorX u = random_vector(space.num_velocity_dofs(), rng, 1.0);
        const VectorX v = random_vector(space.num_velocity_dofs(), rng, 1.0);
        const VectorX w = random_vector(space.num_velocity_dofs(), rng, 1.0);
        const double scale = u.norm() * v.norm() * w.norm();
        worst = std::max(worst, std::abs(trilinear_skew(space, u, v, v)) / (u.norm() * v.squaredNorm()));
        // The form is not trivially zero: it is antisymmetric in its last two arguments.
        const double bvw = trilinear_skew(space, u, v, w);
        antisym = std::max(antisym, std::abs(bvw + trilinear_skew(space, u, w, v)) / scale);
        smallest_cross = std::min(smallest_cross, std::abs(bvw) / scale);
    }
    Checks checks;
    checks.add("b(u,v,v)", worst <= 1e-12, "max |b(u,v,v)| / (|u| |v|^2) = " + fmt(worst) + " over 50 pairs");
    checks.add("b(u,v,w) = -b(u,w,v) and nonzero", antisym <= 1e-12 && smallest_cross > 1e-8,
               "asymmetry " + fmt(antisym) + ", smallest |b(u,v,w)| " + fmt(smallest_cross));
    return checks.outcome();
}

double jacobian_fd_error(const NitscheOperator& op, const VectorX& x, const StepContext& step)
{
    const MatrixX j = MatrixX(op.jacobian(x, step));
    MatrixX fd(op.size(), op.size());
    for (int c = 0; c < op.size(); ++c) {
        const double h = 1e-7 * std::max(1.0, std::abs(x(c)));
        VectorX xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        fd.col(c) = (op.residual(xp, step) - op.residual(xm, step)) / (2 * h);
    }
    return (j - fd).norm() / std::max(1.0, fd.norm());
}

Outcome jacobian_check()
{
    const auto space = top_slip_space(3);
    std::mt19937_64 rng(99);
    Checks checks;
    for (const SlipLaw& law : {navier(1.0), leroux_rajagopal(1, 0.1, 0.001, -0.75), tresca_regularized(1, 2e-4),
                               stick_slip_regularized(2, 1, 2e-4), fang_regularized(1.6, 1.5, 10, 2e-4),
                               dynamic_moving_wall(1, 2, 0.01)}) {
        double worst = 0;
        for (auto variant : {NitscheVariant::symmetric, NitscheVariant::antisymmetric}) {
            for (bool unsteady : {false, true}) {
                FlowProblem pb;
                pb.law = law;
                pb.config.variant = variant;
                pb.forcing = [](const Vec2& x, double) { return Vec2(x.y(), -x.x()); };
                const NitscheOperator op(space, pb);
                for (int k = 0; k < 20; ++k) {
                    StepContext step = StepContext::steady(0.005);
                    if (unsteady) {
                        step.dt = 0.005;
                        step.u_old = random_vector(space.num_velocity_dofs(), rng, 1.0);
                    }
                    const VectorX x = random_vector(op.size(), rng, k % 2 == 0 ? 1.0 : 0.05);
                    worst = std::max(worst, jacobian_fd_error(op, x, step));
                }
            }
        }
        checks.add(law.name(), worst <= 1e-6, "max mismatch " + fmt(worst));
    }
    return checks.outcome();
}

Outcome energy_identity()
{
    ExperimentConfig c = experiment(kDynamicConfig, "energy");
    c.variant = NitscheVariant::antisymmetric;
    c.alpha.reset();
    c.beta_sweep = {0, 0.5, 1, 2};
    const RunArtifacts art = run_experiment(c);
    Checks checks;
    for (const char* tag : {"b0", "b0.5", "b1", "b2"}) {
        const std::string t(tag);
        const double res = summary_value(art, t + ".max_energy_residual");
        const double pen = summary_value(art, t + ".min_penalty_form");
        checks.add("beta " + t.substr(1), res <= 1e-8 && pen >= 0,
                   "balance " + fmt(res) + ", min penalty form " + fmt(pen) + ", alpha " +
                       fmt(summary_value(art, t + ".alpha")));
    }
    return checks.outcome();
}

Outcome manufactured_convergence()
{
    Stopwatch clock;
    ConvergenceSpec spec;
    spec.solution = taylor_green(1.0);
    spec.law = navier(1.0);
    spec.config.include_convection = false;
    spec.boundary_correction = true;
    const ConvergenceTable table = convergence_study({16, 32, 64}, spec);
    const double secs = clock.seconds();
    Checks checks;
    const auto worst = [&](double ErrorNorms::*m) {
        const auto r = table.rates(m);
        return std::min(r[1], r[2]);
    };
    const double h1 = worst(&ErrorNorms::h1_velocity), p = worst(&ErrorNorms::l2_pressure),
                 un = worst(&ErrorNorms::l2_normal);
    checks.add("H1 velocity rate", h1 >= 1.8, fmt(h1));
    checks.add("L2 pressure rate", p >= 1.8, fmt(p));
    checks.add("u.n rate", un >= 1.5, fmt(un));
    checks.add("runtime", secs < 180, fmt(secs) + " s");
    return checks.outcome();
}

Outcome activation_threshold()
{
    Stopwatch clock;
    const RunArtifacts art = run_experiment(experiment(
        R"({"experiment": "nonsmooth_nonmonotone", "n": 64, "amplitude": [0.6], "law.epsilon": 2e-4})", "threshold"));
    const double secs = clock.seconds();
    const double u = summary_value(art, "L0.6.max_u_tau"), s = summary_value(art, "L0.6.max_sigma");
    const double err = summary_value(art, "L0.6.err_L2_u"), interp = summary_value(art, "L0.6.interp_L2_u");
    Checks checks;
    checks.add("max |u_tau| <= 1e-3", u <= 1e-3, fmt(u));
    checks.add("max |sigma| in [0.735, 0.765]", s >= 0.735 && s <= 0.765, fmt(s));
    checks.add("L2 error <= 5x interpolation error", err <= 5 * interp,
               fmt(err) + " vs " + fmt(interp) + ", ratio " + fmt(err / interp));
    checks.add("runtime", secs < 120, fmt(secs) + " s");
    return checks.outcome();
}

Outcome slip_regime()
{
    const RunArtifacts art = run_experiment(
        experiment(R"({"experiment": "nonsmooth_nonmonotone", "n": 32, "amplitude": [5]})", "slip"));
    const double u = summary_value(art, "L5.max_u_tau");
    return {u >= 1e-2, "max |u_tau| = " + fmt(u) + " at n = 32"};
}

Outcome stick_slip_timing()
{
    Stopwatch clock;
    const RunArtifacts art = run_experiment(experiment(
        R"({"experiment": "stick_slip", "n": 50, "gamma_sweep": [0], "T": 1.5, "snapshots": [0.5, 1.5],
            "law.mu_star": 1.0, "amplitude": [1]})",
        "stick_slip"));
    const double secs = clock.seconds();
    const double early = summary_value(art, "g0_t0.5.max_u_tau"), late = summary_value(art, "g0_t1.5.max_u_tau");
    Checks checks;
    checks.add("stick at t = 0.5", early <= 1e-3, fmt(early));
    checks.add("slip at t = 1.5", late >= 50 * early, fmt(late) + " = " + fmt(late / early) + "x");
    checks.add("runtime", secs < 600, fmt(secs) + " s");
    return checks.outcome();
}

Outcome dynamic_relaxation()
{
    Checks checks;
    for (double beta : {0.0, 2.0}) {
        Stopwatch clock;
        ExperimentConfig c = experiment(kDynamicConfig, "dynamic");
        c.beta_sweep = {beta};
        const RunArtifacts art = run_experiment(c);
        const double secs = clock.seconds();
        const std::string tag = beta == 0 ? "b0" : "b2";
        if (beta == 0) {
            const double drop = summary_value(art, "b0.max_step_decrease");
            checks.add("beta 0 monotone", drop <= 1e-6, "largest decrease " + fmt(drop));
        } else {
            const double peak = summary_value(art, "b2.probe_max"), end = summary_value(art, "b2.probe_final");
            checks.add("beta 2 overshoot", peak >= 1.02 * end, "max " + fmt(peak) + " vs final " + fmt(end));
        }
        checks.add("runtime beta " + fmt(beta), secs < 600, fmt(secs) + " s");
    }
    return checks.outcome();
}

Outcome korn_dichotomy()
{
    const int n = 16;
    const auto mesh = build_unit_square(n);
    const KornResult all = korn_normal_trace_min_eig(TaylorHoodSpace(mesh.tag_boundary(all_slip_predicate())));
    const KornResult two =
        korn_normal_trace_min_eig(TaylorHoodSpace(mesh.tag_boundary(slip_walls_predicate({Wall::top, Wall::left}))));
    const TaylorHoodSpace top_space(mesh.tag_boundary(top_wall_predicate()));
    const KornResult top = korn_normal_trace_min_eig(top_space);
    // Witness check: a horizontal translation, constant x component and zero y component.
    double deviation = 0;
    const VectorX& w = top.witness;
    for (int node = 0; node < top_space.num_nodes(); ++node)
        deviation = std::max({deviation, std::abs(w(2 * node) - w(0)), std::abs(w(2 * node + 1))});
    Checks checks;
    checks.add("full boundary", all.min_eig > 0, fmt(all.min_eig));
    checks.add("top + left", two.min_eig > 0, fmt(two.min_eig));
    checks.add("top only", std::abs(top.min_eig) <= 1e-10, fmt(top.min_eig));
    checks.add("translation witness", deviation <= 1e-8 && std::abs(w(0)) > 0, "deviation " + fmt(deviation));
    return checks.outcome();
}

Outcome infsup_robustness()
{
    std::vector<double> values;
    std::string text;
    for (int n : {8, 16, 32}) {
        values.push_back(infsup_constant(top_slip_space(n)));
        text += (text.empty() ? "" : ", ") + ("n=" + std::to_string(n) + ": " + fmt(values.back()));
    }
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    return {lo > 0 && hi <= 1.2 * lo, text};
}

Outcome certificates()
{
    Checks checks;
    for (const SlipLaw& law : {navier(1.0), tresca_regularized(1, 2e-4), stick_slip_regularized(2, 1, 2e-4),
                               fang_regularized(1.6, 1.5, 10, 2e-4), leroux_rajagopal(1, 0.1, 0.001, -0.75)}) {
        const Certificate c = certify(law);
        std::string failed;
        for (const auto& clause : c.clauses)
            if (!clause.passed)
                failed += " " + clause.name + ": " + clause.detail;
        checks.add(law.name(), c.passed(), "lambda " + fmt(c.lambda) + failed);
    }
    return checks.outcome();
}

Outcome determinism()
{
    ExperimentConfig c = experiment(kDynamicConfig, "determinism");
    std::map<std::string, std::string> first;
    run_experiment(c);
    for (const char* name : {"probe_b0.csv", "probe_b2.csv"})
        first[name] = read_file(fs::path(c.output_dir) / name);
    run_experiment(c);
    Checks checks;
    for (const auto& [name, text] : first) {
        const std::string again = read_file(fs::path(c.output_dir) / name);
        checks.add(name, !text.empty() && text == again, std::to_string(text.size()) + " bytes");
    }
    return checks.outcome();
}

const std::map<int, Criterion>& criteria()
{
    static const std::map<int, Criterion> all{
        {1, {"rest state", rest_state}},
        {2, {"skew symmetry", skew_symmetry}},
        {3, {"Jacobian check", jacobian_check}},
        {4, {"energy identity", energy_identity}},
        {5, {"manufactured convergence", manufactured_convergence}},
        {6, {"activation threshold", activation_threshold}},
        {7, {"slip regime", slip_regime}},
        {8, {"stick-slip timing", stick_slip_timing}},
        {9, {"dynamic relaxation", dynamic_relaxation}},
        {10, {"Korn dichotomy", korn_dichotomy}},
        {11, {"inf-sup robustness", infsup_robustness}},
        {12, {"slip-law certificates", certificates}},
        {13, {"determinism", determinism}},
    };
    return all;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::vector<int> selected;
    std::string out = g_out.string();
    app.add_option("criteria", selected, "Criterion numbers (default: all)");
    app.add_option("--out", out, "Directory for experiment artifacts");
    CLI11_PARSE(app, argc, argv);
    g_out = out;

    if (selected.empty())
        for (const auto& [id, c] : criteria())
            selected.push_back(id);

    int failures = 0;
    for (int id : selected) {
        const auto it = criteria().find(id);
        if (it == criteria().end()) {
            std::cerr << "unknown criterion " << id << '\n';
            return 2;
        }
        Stopwatch clock;
        Outcome o;
        try {
            o = it->second.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << "criterion " << id << ' ' << (o.pass ? "PASS" : "FAIL") << " [" << it->second.name << "] "
                  << o.detail << " (" << fmt(clock.seconds()) << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
