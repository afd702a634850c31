#include "slipflow/experiments.hpp"

#include "slipflow/plot.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace slipflow {

namespace {

using Json = nlohmann::ordered_json;

const std::vector<std::string> kExperiments{"smooth_nonmonotone", "nonsmooth_nonmonotone", "stick_slip",
                                            "dynamic", "convergence", "constants"};

bool is_unsteady(const std::string& experiment)
{
    return experiment == "stick_slip" || experiment == "dynamic";
}

std::string number_tag(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

template <typename T>
T get_as(const Json& value, const std::string& key)
{
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::vector<double> number_list(const Json& value, const std::string& key)
{
    if (value.is_number())
        return {value.get<double>()};
    return get_as<std::vector<double>>(value, key);
}

Wall parse_wall(const std::string& name)
{
    if (name == "top")
        return Wall::top;
    if (name == "bottom")
        return Wall::bottom;
    if (name == "left")
        return Wall::left;
    if (name == "right")
        return Wall::right;
    throw ConfigError("unknown wall '" + name + "'");
}

Json to_json(const ExperimentConfig& c)
{
    Json j;
    j["experiment"] = c.experiment;
    j["n"] = c.n;
    j["diagonal"] = c.diagonal == Diagonal::right ? "right" : "crossed";
    j["nu"] = c.nu;
    j["dt"] = c.dt;
    j["T"] = c.final_time;
    if (c.alpha)
        j["alpha"] = *c.alpha;
    else
        j["alpha"] = "auto";
    j["variant"] = c.variant == NitscheVariant::symmetric ? "symmetric" : "antisymmetric";
    j["mean_pressure"] = c.mean_pressure == MeanPressureMode::multiplier ? "multiplier" : "pinned";
    j["convection"] = c.convection;
    j["boundary_correction"] = c.boundary_correction;
    j["solution"] = c.solution;
    j["law"] = c.law;
    for (const auto& [k, v] : c.law_params)
        j["law." + k] = v;
    j["amplitude"] = c.amplitudes;
    j["beta_sweep"] = c.beta_sweep;
    j["gamma_sweep"] = c.gamma_sweep;
    j["snapshots"] = c.snapshots;
    Json probes = Json::array();
    for (const auto& p : c.probes)
        probes.push_back({p.x(), p.y()});
    j["probes"] = probes;
    j["levels"] = c.levels;
    j["continuation_step"] = c.continuation_step;
    j["slip_walls"] = c.slip_walls;
    j["output_dir"] = c.output_dir;
    j["newton.abs_tol"] = c.newton.abs_tol;
    j["newton.rel_tol"] = c.newton.rel_tol;
    j["newton.max_iter"] = c.newton.max_iter;
    j["newton.max_halvings"] = c.newton.max_halvings;
    j["newton.reuse_jacobian"] = c.newton.reuse_jacobian;
    return j;
}

void apply_defaults(ExperimentConfig& c, const Json& given)
{
    const auto unset = [&](const char* key) { return !given.contains(key); };
    const std::string& e = c.experiment;
    if (e == "smooth_nonmonotone") {
        if (unset("solution")) c.solution = "taylor_green";
        if (unset("law")) c.law = "leroux_rajagopal";
        if (unset("amplitude")) c.amplitudes = {1, 10};
    } else if (e == "nonsmooth_nonmonotone") {
        if (unset("solution")) c.solution = "polynomial";
        if (unset("law")) c.law = "fang";
        if (unset("amplitude")) c.amplitudes = {0.6, 5};
    } else if (e == "stick_slip") {
        if (unset("solution")) c.solution = "polynomial";
        if (unset("law")) c.law = "stick_slip";
        if (unset("amplitude")) c.amplitudes = {1};
        if (unset("gamma_sweep")) c.gamma_sweep = {0, 2};
        if (unset("snapshots")) c.snapshots = {0.5, 1.5, 2.0};
        if (unset("T")) c.final_time = 2.0;
    } else if (e == "dynamic") {
        if (unset("law")) c.law = "dynamic";
        if (unset("beta_sweep")) c.beta_sweep = {0, 0.5, 1, 2};
        if (unset("probes")) c.probes = {Vec2(0.5, 1.0)};
        if (unset("T")) c.final_time = 1.0;
    } else if (e == "convergence") {
        if (unset("solution")) c.solution = "taylor_green";
        if (unset("law")) {
            c.law = "navier";
            if (!c.law_params.contains("gamma"))
                c.law_params["gamma"] = 1.0;
        }
        if (unset("amplitude")) c.amplitudes = {1};
        if (unset("convection")) c.convection = false;
        if (unset("boundary_correction")) c.boundary_correction = true;
        if (unset("levels")) c.levels = {16, 32, 64};
    } else if (e == "constants") {
        if (unset("law")) {
            c.law = "navier";
            if (!c.law_params.contains("gamma"))
                c.law_params["gamma"] = 1.0;
        }
    }
}

void validate(const ExperimentConfig& c)
{
    if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end())
        throw ConfigError("unknown experiment '" + c.experiment + "'");
    if (c.n < 1)
        throw ConfigError("mesh resolution n must be positive");
    if (!(c.nu > 0))
        throw ConfigError("viscosity must be positive");
    if (!(c.dt > 0))
        throw ConfigError("time step must be positive");
    if (c.alpha && !(*c.alpha > 0))
        throw ConfigError("penalty alpha must be positive");
    if (c.continuation_step < 0)
        throw ConfigError("continuation_step must be nonnegative");
    for (double a : c.amplitudes)
        if (!(a > 0))
            throw ConfigError("amplitudes must be positive");
    if (is_unsteady(c.experiment)) {
        const int steps = step_count(c.final_time, c.dt);
        for (double t : c.snapshots) {
            const double j = std::round(t / c.dt);
            if (j < 0 || j > steps || std::abs(t - j * c.dt) > 1e-9 * std::max(1.0, t))
                throw ConfigError("snapshot time " + number_tag(t) + " is not on the time grid");
        }
    }
    c.newton.validate();
    // Surface slip-law parameter errors at load time.
    if (!c.law.empty() && c.experiment != "dynamic" && c.experiment != "stick_slip")
        configured_law(c);
}

ManufacturedSolution make_solution(const std::string& name, double amplitude)
{
    if (name == "taylor_green")
        return taylor_green(amplitude);
    if (name == "polynomial")
        return polynomial_vortex(amplitude);
    throw ConfigError("unknown manufactured solution '" + name + "'");
}

Mesh make_mesh(const ExperimentConfig& c)
{
    std::vector<Wall> walls;
    for (const auto& w : c.slip_walls)
        walls.push_back(parse_wall(w));
    return build_unit_square(c.n, c.diagonal).tag_boundary(slip_walls_predicate(walls));
}

std::vector<double> continuation_schedule(double amplitude, double step)
{
    const int stages = step > 0 ? std::max(1, static_cast<int>(std::ceil(amplitude / step - 1e-9))) : 1;
    std::vector<double> out;
    for (int k = 1; k <= stages; ++k)
        out.push_back(amplitude * k / stages);
    return out;
}

class Writer {
public:
    Writer(const ExperimentConfig& c, RunArtifacts& art) : dir_(c.output_dir), echo_(config_json(c)), art_(art)
    {
        std::filesystem::create_directories(dir_);
    }

    std::ofstream csv(const std::string& name, const std::string& header)
    {
        const std::string path = (dir_ / name).string();
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot write " + path);
        out << std::setprecision(12);
        out << "# config: " << echo_ << '\n';
        if (!header.empty())
            out << header << '\n';
        art_.files.push_back(path);
        return out;
    }

    void svg(const std::string& name, const PlotSpec& spec)
    {
        const std::string path = (dir_ / name).string();
        write_svg(path, spec);
        art_.files.push_back(path);
    }

    void summary()
    {
        const std::string path = (dir_ / "summary.txt").string();
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot write " + path);
        for (const auto& [k, v] : art_.summary)
            out << k << ": " << v << '\n';
        art_.files.push_back(path);

        Json j;
        for (const auto& [k, v] : art_.summary)
            j[k] = v;
        const std::string json_path = (dir_ / "summary.json").string();
        std::ofstream(json_path) << j.dump(2) << '\n';
        art_.files.push_back(json_path);
    }

private:
    std::filesystem::path dir_;
    std::string echo_;
    RunArtifacts& art_;
};

template <typename T>
void put(RunArtifacts& art, const std::string& key, const T& value)
{
    std::ostringstream os;
    os << std::setprecision(12) << value;
    art.summary.emplace_back(key, os.str());
}

void write_wall(Writer& w, const std::string& tag, const std::vector<WallSample>& wall, const SlipLaw& law,
                const std::string& title)
{
    {
        auto out = w.csv("wall_" + tag + ".csv", "x,u_tau,sigma,un");
        for (const auto& s : wall)
            out << s.x.x() << ',' << s.u_tau << ',' << s.sigma << ',' << s.un << '\n';
    }
    {
        auto out = w.csv("cr_" + tag + ".csv", "u_tau_abs,sigma_abs,sigma_exact_abs");
        for (const auto& s : wall)
            out << s.u_tau << ',' << s.sigma << ',' << exact_relation_magnitude(law, s.u_tau) << '\n';
    }
    PlotSeries ut{"|u_tau|", {}, {}, false}, sg{"|sigma|", {}, {}, false};
    PlotSeries cr{"computed", {}, {}, true}, ex{"exact relation", {}, {}, false};
    double umax = 0;
    for (const auto& s : wall) {
        ut.x.push_back(s.x.x());
        ut.y.push_back(s.u_tau);
        sg.x.push_back(s.x.x());
        sg.y.push_back(s.sigma);
        cr.x.push_back(s.u_tau);
        cr.y.push_back(s.sigma);
        umax = std::max(umax, s.u_tau);
    }
    // Threshold laws are set-valued at zero slip: draw the vertical stick branch.
    ex.x.push_back(0.0);
    ex.y.push_back(0.0);
    for (int i = 0; i <= 200; ++i) {
        const double v = umax * i / 200;
        ex.x.push_back(v);
        ex.y.push_back(exact_relation_magnitude(law, v));
    }
    w.svg("wall_" + tag + ".svg", {title + ": wall profile", "x", "value", {ut, sg}});
    w.svg("cr_" + tag + ".svg", {title + ": constitutive relation", "|u_tau|", "|sigma|", {ex, cr}});
}

std::pair<double, double> wall_maxima(const std::vector<WallSample>& wall)
{
    double u = 0, s = 0;
    for (const auto& w : wall) {
        u = std::max(u, w.u_tau);
        s = std::max(s, w.sigma);
    }
    return {u, s};
}

NitscheConfig nitsche_config(const ExperimentConfig& c, double alpha)
{
    NitscheConfig n;
    n.nu = c.nu;
    n.alpha = alpha;
    n.variant = c.variant;
    n.include_convection = c.convection;
    n.mean_pressure = c.mean_pressure;
    return n;
}

void run_steady(const ExperimentConfig& c, RunArtifacts& art, Writer& w, std::ostream* log)
{
    const TaylorHoodSpace space(make_mesh(c));
    const SlipLaw law = configured_law(c);
    const double alpha = effective_alpha(c, space, law);
    NewtonConfig newton = c.newton;
    newton.log = log;
    put(art, "dofs", space.num_velocity_dofs() + space.num_pressure_dofs() + 1);
    put(art, "alpha", alpha);
    put(art, "law_lambda", law.lambda());
    for (double amp : c.amplitudes) {
        const auto family = [&](double load) {
            const ManufacturedSolution sol = make_solution(c.solution, load);
            FlowProblem pb;
            pb.config = nitsche_config(c, alpha);
            pb.law = law;
            pb.forcing = forcing(sol, c.nu, c.convection);
            pb.dirichlet = sol.velocity;
            if (c.boundary_correction)
                pb.slip_correction = boundary_correction(sol, law, c.nu);
            return pb;
        };
        const auto res = steady_solve(space, family, continuation_schedule(amp, c.continuation_step), newton);
        const ManufacturedSolution sol = make_solution(c.solution, amp);
        SystemState state = res.state;
        state.p.array() += pressure_mean_offset(space, state.p, sol.pressure, 0.0);
        const auto wall = boundary_functionals(space, law, state.u, {});
        const std::string tag = "L" + number_tag(amp);
        write_wall(w, tag, wall, law, c.experiment + ", Lambda = " + number_tag(amp));
        const auto [umax, smax] = wall_maxima(wall);
        const ErrorNorms err = error_norms(space, state, sol.exact(), 0.0);
        const SystemState interp{interpolate_velocity(space, sol.velocity), interpolate_pressure(space, sol.pressure), 0};
        const ErrorNorms ierr = error_norms(space, interp, sol.exact(), 0.0);
        int iterations = 0;
        for (const auto& r : res.stages)
            iterations += r.iterations;
        put(art, tag + ".max_u_tau", umax);
        put(art, tag + ".max_sigma", smax);
        put(art, tag + ".err_L2_u", err.l2_velocity);
        put(art, tag + ".interp_L2_u", ierr.l2_velocity);
        put(art, tag + ".newton_iterations", iterations);
        if (c.experiment == "nonsmooth_nonmonotone")
            put(art, tag + ".no_slip", umax <= 1e-3 ? "yes" : "no");
    }
}

void run_stick_slip(const ExperimentConfig& c, RunArtifacts& art, Writer& w, std::ostream* log)
{
    const TaylorHoodSpace space(make_mesh(c));
    const double amp = c.amplitudes.empty() ? 1.0 : c.amplitudes.front();
    const ManufacturedSolution sol = make_solution(c.solution, amp).time_scaled();
    NewtonConfig newton = c.newton;
    newton.log = log;
    put(art, "dofs", space.num_velocity_dofs() + space.num_pressure_dofs() + 1);
    for (double gamma : c.gamma_sweep) {
        const SlipLaw law = configured_law(c, {{"gamma_star", gamma}});
        const double alpha = effective_alpha(c, space, law);
        FlowProblem pb;
        pb.config = nitsche_config(c, alpha);
        pb.law = law;
        pb.forcing = forcing(sol, c.nu, c.convection);
        pb.dirichlet = sol.velocity;
        const NitscheOperator op(space, pb);
        MarchOptions mo;
        mo.final_time = c.final_time;
        mo.dt = c.dt;
        mo.probes = c.probes;
        const Trajectory traj = time_march(op, SystemState::zero(space), mo, newton);
        const std::string gtag = "g" + number_tag(gamma);
        put(art, gtag + ".alpha", alpha);
        for (double t : c.snapshots) {
            const auto j = static_cast<std::size_t>(std::round(t / c.dt));
            const std::string tag = gtag + "_t" + number_tag(t);
            write_wall(w, tag, traj.wall[j], law, "stick-slip gamma = " + number_tag(gamma) + ", t = " + number_tag(t));
            const auto [umax, smax] = wall_maxima(traj.wall[j]);
            put(art, tag + ".max_u_tau", umax);
            put(art, tag + ".max_sigma", smax);
        }
        put(art, gtag + ".max_energy_residual",
            traj.energy_residual.empty() ? 0.0
                                         : *std::max_element(traj.energy_residual.begin(), traj.energy_residual.end()));
    }
}

void run_dynamic(const ExperimentConfig& c, RunArtifacts& art, Writer& w, std::ostream* log)
{
    const TaylorHoodSpace space(make_mesh(c));
    NewtonConfig newton = c.newton;
    newton.log = log;
    put(art, "dofs", space.num_velocity_dofs() + space.num_pressure_dofs() + 1);
    if (c.probes.empty())
        throw ConfigError("dynamic experiment needs at least one probe");
    PlotSpec plot{"slip velocity at probe", "t", "u_x", {}};
    for (double beta : c.beta_sweep) {
        const SlipLaw law = configured_law(c, {{"beta_star", beta}});
        const double alpha = effective_alpha(c, space, law);
        FlowProblem pb;
        pb.config = nitsche_config(c, alpha);
        pb.law = law;
        const NitscheOperator op(space, pb);
        MarchOptions mo;
        mo.final_time = c.final_time;
        mo.dt = c.dt;
        mo.probes = c.probes;
        mo.record_wall = false;
        const Trajectory traj = time_march(op, SystemState::zero(space), mo, newton);
        const std::string tag = "b" + number_tag(beta);
        PlotSeries series{"beta = " + number_tag(beta), {}, {}, false};
        {
            auto out = w.csv("probe_" + tag + ".csv", "t,v_slip");
            for (std::size_t k = 0; k < traj.times.size(); ++k) {
                const double v = traj.probe_values[k].front().x();
                out << traj.times[k] << ',' << v << '\n';
                series.x.push_back(traj.times[k]);
                series.y.push_back(v);
            }
        }
        double worst_drop = 0;
        for (std::size_t k = 1; k < series.y.size(); ++k)
            worst_drop = std::max(worst_drop, series.y[k - 1] - series.y[k]);
        const double vmax = *std::max_element(series.y.begin(), series.y.end());
        put(art, tag + ".alpha", alpha);
        put(art, tag + ".probe_max", vmax);
        put(art, tag + ".probe_final", series.y.back());
        put(art, tag + ".max_step_decrease", worst_drop);
        put(art, tag + ".max_energy_residual",
            *std::max_element(traj.energy_residual.begin(), traj.energy_residual.end()));
        put(art, tag + ".min_penalty_form", *std::min_element(traj.penalty_form.begin(), traj.penalty_form.end()));
        plot.series.push_back(std::move(series));
    }
    w.svg("probe.svg", plot);
}

void run_convergence(const ExperimentConfig& c, RunArtifacts& art, Writer& w, std::ostream* log)
{
    ConvergenceSpec spec;
    spec.solution = make_solution(c.solution, c.amplitudes.empty() ? 1.0 : c.amplitudes.front());
    spec.law = configured_law(c);
    spec.diagonal = c.diagonal;
    spec.boundary_correction = c.boundary_correction;
    spec.newton = c.newton;
    spec.newton.log = log;
    if (c.slip_walls != std::vector<std::string>{"top"})
        throw ConfigError("convergence studies use top-wall slip");
    if (c.levels.empty())
        throw ConfigError("convergence study needs mesh levels");
    ExperimentConfig coarse_config = c;
    coarse_config.n = c.levels.front();
    const TaylorHoodSpace coarse(make_mesh(coarse_config));
    spec.config = nitsche_config(c, effective_alpha(c, coarse, spec.law));
    const ConvergenceTable table = convergence_study(c.levels, spec);
    {
        auto out = w.csv("convergence.csv", "");
        table.write_csv(out);
    }
    PlotSpec plot{"convergence", "log2(1/h)", "log2(error)", {}};
    const std::vector<std::pair<std::string, double ErrorNorms::*>> columns{
        {"L2_u", &ErrorNorms::l2_velocity},
        {"H1_u", &ErrorNorms::h1_velocity},
        {"L2_p", &ErrorNorms::l2_pressure},
        {"L2_un", &ErrorNorms::l2_normal}};
    for (const auto& [name, member] : columns) {
        PlotSeries s{name, {}, {}, false};
        for (const auto& l : table.levels) {
            s.x.push_back(std::log2(1 / l.h));
            s.y.push_back(std::log2(l.errors.*member));
        }
        plot.series.push_back(s);
        const auto rates = table.rates(member);
        put(art, "rate_" + name, rates.back());
    }
    w.svg("convergence.svg", plot);
    put(art, "levels", table.levels.size());
}

void run_constants(const ExperimentConfig& c, RunArtifacts& art, Writer& w)
{
    const TaylorHoodSpace space(make_mesh(c));
    const SlipLaw law = configured_law(c);
    const ConstantsReport r = compute_constants(space, nitsche_config(c, 1.0), law);
    auto out = w.csv("constants.csv", "c_tr,c_trK,korn_min_eig,infsup,alpha_auto");
    out << r.c_tr << ',' << r.c_trk << ',' << r.korn_min_eig << ',' << r.infsup << ',' << r.alpha_auto << '\n';
    put(art, "dofs", space.num_velocity_dofs() + space.num_pressure_dofs() + 1);
    put(art, "c_tr", r.c_tr);
    put(art, "c_trK", r.c_trk);
    put(art, "korn_min_eig", r.korn_min_eig);
    put(art, "infsup", r.infsup);
    put(art, "alpha_auto", r.alpha_auto);
}

} // namespace

const std::string* RunArtifacts::find(const std::string& key) const
{
    for (const auto& [k, v] : summary)
        if (k == key)
            return &v;
    return nullptr;
}

ExperimentConfig parse_config(const std::string& json_text)
{
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");

    ExperimentConfig c;
    c.newton.reuse_jacobian = true;
    c.newton.max_iter = 50;
    for (const auto& [key, value] : j.items()) {
        if (key == "experiment") c.experiment = get_as<std::string>(value, key);
        else if (key == "n") c.n = get_as<int>(value, key);
        else if (key == "diagonal") {
            const auto d = get_as<std::string>(value, key);
            if (d == "right") c.diagonal = Diagonal::right;
            else if (d == "crossed") c.diagonal = Diagonal::crossed;
            else throw ConfigError("unknown diagonal '" + d + "'");
        }
        else if (key == "nu") c.nu = get_as<double>(value, key);
        else if (key == "dt") c.dt = get_as<double>(value, key);
        else if (key == "T") c.final_time = get_as<double>(value, key);
        else if (key == "alpha") {
            if (value.is_string()) {
                if (value.get<std::string>() != "auto")
                    throw ConfigError("alpha must be a number or \"auto\"");
                c.alpha.reset();
            } else {
                c.alpha = get_as<double>(value, key);
            }
        }
        else if (key == "variant") {
            const auto v = get_as<std::string>(value, key);
            if (v == "symmetric") c.variant = NitscheVariant::symmetric;
            else if (v == "antisymmetric") c.variant = NitscheVariant::antisymmetric;
            else throw ConfigError("unknown variant '" + v + "'");
        }
        else if (key == "mean_pressure") {
            const auto v = get_as<std::string>(value, key);
            if (v == "multiplier") c.mean_pressure = MeanPressureMode::multiplier;
            else if (v == "pinned") c.mean_pressure = MeanPressureMode::pinned;
            else throw ConfigError("unknown mean_pressure mode '" + v + "'");
        }
        else if (key == "convection") c.convection = get_as<bool>(value, key);
        else if (key == "boundary_correction") c.boundary_correction = get_as<bool>(value, key);
        else if (key == "solution") c.solution = get_as<std::string>(value, key);
        else if (key == "law") c.law = get_as<std::string>(value, key);
        else if (key.rfind("law.", 0) == 0) c.law_params[key.substr(4)] = get_as<double>(value, key);
        else if (key == "amplitude") c.amplitudes = number_list(value, key);
        else if (key == "beta_sweep") c.beta_sweep = number_list(value, key);
        else if (key == "gamma_sweep") c.gamma_sweep = number_list(value, key);
        else if (key == "snapshots") c.snapshots = number_list(value, key);
        else if (key == "probes") {
            c.probes.clear();
            for (const auto& p : get_as<std::vector<std::vector<double>>>(value, key)) {
                if (p.size() != 2)
                    throw ConfigError("probes must be [x, y] pairs");
                c.probes.emplace_back(p[0], p[1]);
            }
        }
        else if (key == "levels") c.levels = get_as<std::vector<int>>(value, key);
        else if (key == "continuation_step") c.continuation_step = get_as<double>(value, key);
        else if (key == "slip_walls") c.slip_walls = get_as<std::vector<std::string>>(value, key);
        else if (key == "output_dir") c.output_dir = get_as<std::string>(value, key);
        else if (key == "newton.abs_tol") c.newton.abs_tol = get_as<double>(value, key);
        else if (key == "newton.rel_tol") c.newton.rel_tol = get_as<double>(value, key);
        else if (key == "newton.max_iter") c.newton.max_iter = get_as<int>(value, key);
        else if (key == "newton.max_halvings") c.newton.max_halvings = get_as<int>(value, key);
        else if (key == "newton.reuse_jacobian") c.newton.reuse_jacobian = get_as<bool>(value, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    apply_defaults(c, j);
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    Json j;
    try {
        j = Json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config '" + path + "': " + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override '" + o + "' is not key=value");
        const std::string key = o.substr(0, eq), text = o.substr(eq + 1);
        try {
            j[key] = Json::parse(text);
        } catch (const nlohmann::json::exception&) {
            j[key] = text;
        }
    }
    return parse_config(j.dump());
}

std::string config_json(const ExperimentConfig& config)
{
    return to_json(config).dump();
}

double exact_relation_magnitude(const SlipLaw& law, double speed)
{
    const Vec2 v(speed, 0.0);
    return std::visit(
        [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, StickSlipLaw>)
                return l.gamma_star * speed + l.mu_star;
            else if constexpr (std::is_same_v<L, FangLaw>)
                return l.threshold(speed);
            else
                return law.traction(v, {}).norm();
        },
        law.variant());
}

SlipLaw configured_law(const ExperimentConfig& config, const std::map<std::string, double>& extra)
{
    auto params = config.law_params;
    for (const auto& [k, v] : extra)
        params[k] = v;
    return make_slip_law(config.law, params);
}

double effective_alpha(const ExperimentConfig& config, const TaylorHoodSpace& space, const SlipLaw& law)
{
    if (config.alpha)
        return *config.alpha;
    NitscheConfig nc;
    nc.nu = config.nu;
    nc.alpha.reset();
    const double c_tr = inverse_trace_constant(space);
    const double c_trk = law.lambda() > 0 ? trace_korn_constant(space) : 0.0;
    return resolve_alpha(nc, law, c_tr, c_trk);
}

RunArtifacts run_experiment(const ExperimentConfig& config, std::ostream* log)
{
    RunArtifacts art;
    Writer writer(config, art);
    put(art, "experiment", config.experiment);
    const std::string& e = config.experiment;
    if (e == "smooth_nonmonotone" || e == "nonsmooth_nonmonotone")
        run_steady(config, art, writer, log);
    else if (e == "stick_slip")
        run_stick_slip(config, art, writer, log);
    else if (e == "dynamic")
        run_dynamic(config, art, writer, log);
    else if (e == "convergence")
        run_convergence(config, art, writer, log);
    else if (e == "constants")
        run_constants(config, art, writer);
    else
        throw ConfigError("unknown experiment '" + e + "'");
    writer.summary();
    return art;
}

} // namespace slipflow
