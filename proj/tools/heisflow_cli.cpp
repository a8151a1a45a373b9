// Config-driven driver: exposes the geometry checks, the continuity and
// HJB solvers, the MFG fixed point and the viscous Monte Carlo verifier as
// subcommands that write CSV/JSON artifacts. One JSON config document with
// one top-level object per subcommand; flags override file values.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heisflow/continuity.hpp"
#include "heisflow/hjb.hpp"
#include "heisflow/mfg.hpp"
#include "heisflow/rng.hpp"
#include "heisflow/sde.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace heisflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct Common {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;  // -1: use the config value
    int threads = 1;
    bool force = false;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in.good())
        throw std::invalid_argument("cannot open config file: " + path);
    json cfg;
    in >> cfg;
    if (!cfg.is_object())
        throw std::invalid_argument("config root must be a JSON object");
    return cfg;
}

json section(const json& cfg, const std::string& name) {
    if (!cfg.contains(name)) return json::object();
    if (!cfg.at(name).is_object())
        throw std::invalid_argument("config section '" + name +
                                    "' must be an object");
    return cfg.at(name);
}

std::uint64_t pick_seed(const json& params, const Common& common,
                        std::uint64_t fallback) {
    if (common.seed >= 0) return static_cast<std::uint64_t>(common.seed);
    return params.value("seed", fallback);
}

void require_positive(double v, const std::string& name) {
    if (!(v > 0.0))
        throw std::invalid_argument("config: " + name + " must be positive");
}

// refuse to touch an existing non-empty directory unless forced
void prepare_out(const std::string& dir, bool force) {
    const fs::path p(dir);
    if (fs::exists(p) && !fs::is_empty(p) && !force)
        throw std::invalid_argument("output directory '" + dir +
                                    "' is not empty (use --force to overwrite)");
    fs::create_directories(p);
}

void write_manifest(const std::string& dir, const json& manifest) {
    std::ofstream out(fs::path(dir) / "manifest.json");
    out << manifest.dump(2) << "\n";
}

class Csv {
  public:
    Csv(const std::string& dir, const std::string& name, const std::string& header)
        : out_((fs::path(dir) / name).string()) {
        out_ << header << "\n";
    }
    template <class... Ts>
    void row(Ts... vals) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, put(vals)), ...);
        out_ << "\n";
    }

  private:
    void put(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out_ << buf;
    }
    void put(int v) { out_ << v; }
    void put(long v) { out_ << v; }
    void put(std::size_t v) { out_ << v; }
    void put(const char* s) { out_ << s; }
    void put(const std::string& s) { out_ << s; }
    std::ofstream out_;
};

DriftField drift_from(const json& p) {
    const std::string kind = p.value("drift", "");
    if (kind == "zero") return DriftField::zero();
    if (kind == "constant")
        return DriftField::constant(p.value("v1", 0.5), p.value("v2", 0.0));
    if (kind == "rotating") return DriftField::rotating(p.value("omega", 1.0));
    throw std::invalid_argument(
        "config: drift must be one of zero|constant|rotating");
}

std::function<double(const HPoint&)> wave_from(const std::string& kind,
                                               double amp) {
    const double tp = 6.283185307179586;
    if (kind == "zero") return [](const HPoint&) { return 0.0; };
    if (kind == "cos1")
        return [amp, tp](const HPoint& x) { return amp * std::cos(tp * x.x1); };
    if (kind == "cos2")
        return [amp, tp](const HPoint& x) { return amp * std::cos(tp * x.x2); };
    throw std::invalid_argument("config: field must be one of zero|cos1|cos2");
}

// --- geom ----------------------------------------------------------------

std::vector<HPoint> load_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in.good())
        throw std::invalid_argument("cannot open points file: " + path);
    std::vector<HPoint> pts;
    std::string line;
    std::size_t rowno = 0;
    while (std::getline(in, line)) {
        ++rowno;
        if (line.empty()) continue;
        if (rowno == 1 && line.find("x1") != std::string::npos) continue;
        std::istringstream ss(line);
        HPoint p;
        char c1 = 0, c2 = 0;
        if (!(ss >> p.x1 >> c1 >> p.x2 >> c2 >> p.x3) || c1 != ',' || c2 != ',')
            throw std::invalid_argument("malformed points row " +
                                        std::to_string(rowno) + " in " + path);
        pts.push_back(p);
    }
    return pts;
}

int cmd_geom(const json& params, const Common& common, const std::string& dir) {
    const int n_points = params.value("n_points", 256);
    if (n_points < 0)
        throw std::invalid_argument("config: n_points must be nonnegative");
    const std::uint64_t seed = pick_seed(params, common, 1);

    std::vector<HPoint> pts;
    if (params.contains("points_csv"))
        pts = load_points_csv(params.at("points_csv").get<std::string>());
    else {
        Pcg64 rng(seed);
        for (int i = 0; i < n_points; ++i)
            pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5),
                           rng.uniform(-5, 5)});
    }

    prepare_out(dir, common.force);
    Csv pav(dir, "pavage.csv", "x1,x2,x3,n1,n2,n3,q1,q2,q3");
    double max_err = 0.0;
    for (const auto& x : pts) {
        const auto d = pavage(x);
        const HPoint back = mul(to_point(d.n), d.q);
        max_err = std::max({max_err, std::abs(back.x1 - x.x1),
                            std::abs(back.x2 - x.x2), std::abs(back.x3 - x.x3)});
        pav.row(x.x1, x.x2, x.x3, static_cast<long>(d.n[0]),
                static_cast<long>(d.n[1]), static_cast<long>(d.n[2]), d.q.x1,
                d.q.x2, d.q.x3);
    }

    const std::size_t ng = std::min<std::size_t>(pts.size(), 64);
    Csv grp(dir, "group.csv", "i,j,p1,p2,p3,dist");
    for (std::size_t i = 0; i < ng; ++i)
        for (std::size_t j = 0; j < ng; ++j) {
            const HPoint p = mul(pts[i], pts[j]);
            grp.row(i, j, p.x1, p.x2, p.x3, h_dist(pts[i], pts[j]));
        }

    const std::size_t nt = std::min<std::size_t>(pts.size(), 32);
    Csv tor(dir, "torus_dist.csv", "i,j,d");
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            tor.row(i, j, torus_dist(fundamental(pts[i]), fundamental(pts[j])));

    write_manifest(dir, {{"subcommand", "geom"},
                         {"points", pts.size()},
                         {"seed", seed},
                         {"pavage_max_error", max_err}});
    return kExitOk;
}

// --- continuity ----------------------------------------------------------

int cmd_continuity(const json& params, const Common& common,
                   const std::string& dir) {
    const DriftField v = drift_from(params);
    const int atoms = params.value("atoms", 20000);
    const int nodes = params.value("time_nodes", 11);
    const double t_end = params.value("t_end", 0.5);
    const double dt = params.value("dt", 0.01);
    const double threshold = params.value("threshold", 5e-3);
    const int dump_atoms = params.value("dump_atoms", 200);
    require_positive(atoms, "atoms");
    require_positive(nodes - 1, "time_nodes - 1");
    require_positive(t_end, "t_end");
    require_positive(dt, "dt");
    require_positive(threshold, "threshold");
    const std::uint64_t seed = pick_seed(params, common, 2);

    std::vector<double> times;
    for (int i = 0; i < nodes; ++i)
        times.push_back(t_end * i / static_cast<double>(nodes - 1));
    const auto m0 = ParticleCloud::uniform(atoms, seed);
    const auto bundle = solve_continuity(v, m0, times, dt);
    const auto tests = standard_test_functions();
    const auto rep = weak_residual(bundle, v, tests);

    prepare_out(dir, common.force);
    const auto small = solve_continuity(v, m0.subsample(dump_atoms), times, dt);
    save_bundle_csv(small, (fs::path(dir) / "bundle.csv").string());
    Csv res(dir, "residuals.csv", "test_function,residual");
    for (std::size_t i = 0; i < tests.size(); ++i)
        res.row(tests[i].name, rep.residuals[i]);

    const bool pass = rep.max_residual <= threshold;
    write_manifest(dir, {{"subcommand", "continuity"},
                         {"seed", seed},
                         {"atoms", atoms},
                         {"dt", dt},
                         {"max_residual", rep.max_residual},
                         {"threshold", threshold},
                         {"pass", pass}});
    return pass ? kExitOk : kExitNotConverged;
}

// --- hjb -----------------------------------------------------------------

int cmd_hjb(const json& params, const Common& common, const std::string& dir) {
    const int res = params.value("resolution", 12);
    const int steps = params.value("time_steps", 8);
    const double t_end = params.value("t_end", 1.0);
    const double radius = params.value("control_radius", 2.0);
    const int rings = params.value("control_rings", 4);
    const int per_ring = params.value("control_per_ring", 16);
    require_positive(res, "resolution");
    require_positive(steps, "time_steps");
    require_positive(t_end, "t_end");
    const double f_amp = params.value("f_amp", 1.0);
    const double g_amp = params.value("g_amp", 1.0);
    const auto fw = wave_from(params.value("f", "zero"), f_amp);
    const auto gw = wave_from(params.value("g", "zero"), g_amp);

    CostData cost{[fw](const HPoint& x, double) { return fw(x); },
                  [gw](const HPoint& x) { return gw(x); }, std::abs(f_amp),
                  std::abs(g_amp)};
    if (params.value("f", "zero") == "zero") cost.f_sup = 0.0;
    if (params.value("g", "zero") == "zero") cost.g_sup = 0.0;

    std::vector<double> times;
    for (int i = 0; i <= steps; ++i)
        times.push_back(t_end * i / static_cast<double>(steps));
    const auto controls = ControlDisk::rings(radius, rings, per_ring);
    const auto u = solve_hjb(cost, controls, {res, res, res}, times);

    double sup = 0.0;
    for (const auto& s : u.slices) sup = std::max(sup, s.max_abs());
    const double bound = cost.f_sup * t_end + cost.g_sup;

    prepare_out(dir, common.force);
    Csv val(dir, "value.csv", "t,i,j,k,u");
    for (std::size_t n = 0; n < times.size(); ++n)
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j)
                for (int k = 0; k < res; ++k)
                    val.row(times[n], i, j, k, u.slices[n].at(i, j, k));
    write_manifest(dir, {{"subcommand", "hjb"},
                         {"resolution", res},
                         {"time_steps", steps},
                         {"sup_norm", sup},
                         {"sup_bound", bound},
                         {"bound_ok", sup <= bound + 1e-12}});
    return kExitOk;
}

// --- mfg -----------------------------------------------------------------

int cmd_mfg(const json& params, const Common& common, const std::string& dir) {
    MfgConfig cfg;
    const int res = params.value("resolution", 16);
    cfg.res = {res, res, res};
    cfg.time_steps = params.value("time_steps", 20);
    cfg.t_end = params.value("t_end", 1.0);
    cfg.max_iterations = params.value("max_iterations", 30);
    cfg.tol = params.value("tol", 1e-3);
    cfg.kde_atoms = params.value("kde_atoms", 10000);
    cfg.ode_dt = params.value("ode_dt", cfg.t_end / (4.0 * cfg.time_steps));
    const int atoms = params.value("atoms", 20000);
    const double eps = params.value("eps", 0.2);
    const Coupling c{Kernel(eps), params.value("weight_f", 0.5),
                     params.value("weight_g", 0.2)};
    const int cert_atoms = params.value("cert_atoms", 32);
    const int dump_atoms = params.value("dump_atoms", 1000);
    require_positive(res, "resolution");
    require_positive(atoms, "atoms");
    require_positive(cfg.tol, "tol");
    require_positive(cfg.max_iterations, "max_iterations");
    const std::uint64_t seed = pick_seed(params, common, 3);

    const auto m0 = benchmark_m0(atoms, seed);
    const auto st = fixed_point(m0, c, cfg);
    const auto cert = mild_certificate(st, c, cert_atoms);

    prepare_out(dir, common.force);
    Csv resid(dir, "residuals.csv", "iteration,residual,c0");
    for (std::size_t k = 0; k < st.residuals.size(); ++k)
        resid.row(k + 1, st.residuals[k], st.c0_history[k]);
    Csv flow(dir, "flow.csv", "t,x1,x2,x3,w");
    for (std::size_t ti = 0; ti < st.times.size(); ++ti)
        for (const auto& a :
             st.flow[ti].subsample(static_cast<std::size_t>(dump_atoms)).atoms())
            flow.row(st.times[ti], a.p.x1, a.p.x2, a.p.x3, a.w);

    write_manifest(
        dir, {{"subcommand", "mfg"},
              {"seed", seed},
              {"atoms", atoms},
              {"eps", eps},
              {"weight_f", c.weight_f},
              {"weight_g", c.weight_g},
              {"converged", st.converged},
              {"iterations", st.iterations},
              {"residuals", st.residuals},
              {"c0_history", st.c0_history},
              {"holder", {{"c1", st.holder.c1}, {"exponent", st.holder.exponent}}},
              {"certificate",
               {{"max_gap", cert.max_gap},
                {"mean_gap", cert.mean_gap},
                {"perturbation_wins", cert.perturbation_wins},
                {"samples", cert.samples}}}});
    return st.converged ? kExitOk : kExitNotConverged;
}

// --- viscous -------------------------------------------------------------

int cmd_viscous(const json& params, const Common& common,
                const std::string& dir) {
    const DriftField v = params.contains("drift") ? drift_from(params)
                                                  : DriftField::rotating(0.5);
    std::vector<double> sigmas =
        params.value("sigmas", std::vector<double>{0.1, 0.05, 0.025});
    if (sigmas.empty())
        throw std::invalid_argument("config: sigmas must be non-empty");
    SdeConfig base;
    base.dt = params.value("dt", 2e-3);
    base.n_paths = params.value("n_paths", 10000);
    const int atoms = params.value("atoms", 4000);
    const int nodes = params.value("time_nodes", 9);
    const double t_end = params.value("t_end", 1.0);
    require_positive(base.dt, "dt");
    require_positive(base.n_paths, "n_paths");
    require_positive(atoms, "atoms");
    require_positive(nodes - 1, "time_nodes - 1");
    for (double s : sigmas)
        if (!(s >= 0.0) || s >= 1.0)
            throw std::invalid_argument("config: sigma must lie in [0, 1)");
    base.seed = pick_seed(params, common, 4);

    std::vector<double> times;
    for (int i = 0; i < nodes; ++i)
        times.push_back(t_end * i / static_cast<double>(nodes - 1));
    const auto m0 = ParticleCloud::uniform(atoms, base.seed);
    const auto rep = law_distance_curve(v, m0, sigmas, times, base);

    prepare_out(dir, common.force);
    Csv law(dir, "law.csv", "sigma,t,distance");
    for (std::size_t s = 0; s < sigmas.size(); ++s)
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            law.row(sigmas[s], times[ti], rep.distance[s][ti]);
    Csv hold(dir, "holder.csv", "sigma,c1,exponent");
    for (std::size_t s = 0; s < sigmas.size(); ++s)
        hold.row(sigmas[s], rep.holder[s].c1, rep.holder[s].exponent);
    Csv mom(dir, "moments.csv", "sigma,t,mean1,mean2,var1,var2,second_moment");
    for (double s : sigmas) {
        SdeConfig cfg = base;
        cfg.sigma = s;
        const auto rows = moment_table(simulate_sde(v, cfg, m0, times));
        for (const auto& r : rows)
            mom.row(s, r.t, r.mean1, r.mean2, r.var1, r.var2, r.second_moment);
    }

    json jh = json::array();
    for (std::size_t s = 0; s < sigmas.size(); ++s)
        jh.push_back({{"sigma", sigmas[s]},
                      {"c1", rep.holder[s].c1},
                      {"exponent", rep.holder[s].exponent}});
    write_manifest(dir, {{"subcommand", "viscous"},
                         {"seed", base.seed},
                         {"sigmas", sigmas},
                         {"n_paths", base.n_paths},
                         {"holder", jh}});
    return kExitOk;
}

// --- verify-all ----------------------------------------------------------

int cmd_verify_all(const json& cfg, const Common& common,
                   const std::string& dir) {
    prepare_out(dir, common.force);
    // small built-in runs unless the config overrides a section
    json defaults = {
        {"geom", {{"n_points", 200}}},
        {"continuity",
         {{"drift", "rotating"}, {"atoms", 4000}, {"time_nodes", 6},
          {"t_end", 0.25}, {"dt", 0.02}, {"threshold", 2e-2}}},
        {"hjb",
         {{"resolution", 8}, {"time_steps", 4}, {"f", "cos2"}, {"g", "cos1"},
          {"f_amp", 0.3}, {"g_amp", 0.5}}},
        {"mfg",
         {{"resolution", 10}, {"time_steps", 8}, {"atoms", 3000},
          {"kde_atoms", 1500}, {"weight_f", 0.1}, {"weight_g", 0.05},
          {"max_iterations", 15}, {"tol", 5e-3}}},
        {"viscous",
         {{"n_paths", 2000}, {"atoms", 2000}, {"time_nodes", 5},
          {"dt", 5e-3}}}};
    for (auto& [key, val] : section(cfg, "verify_all").items())
        defaults[key] = val;

    Common sub = common;
    sub.force = true;  // subdirectories belong to this run
    json results = json::object();
    int worst = kExitOk;
    const auto run = [&](const std::string& name, auto&& fn) {
        int code = kExitError;
        std::string error;
        try {
            code = fn(defaults.at(name), sub, (fs::path(dir) / name).string());
        } catch (const std::exception& e) {
            error = e.what();
        }
        results[name] = {{"exit", code}};
        if (!error.empty()) results[name]["error"] = error;
        worst = std::max(worst, code);
    };
    run("geom", cmd_geom);
    run("continuity", cmd_continuity);
    run("hjb", cmd_hjb);
    run("mfg", cmd_mfg);
    run("viscous", cmd_viscous);
    write_manifest(dir, {{"subcommand", "verify-all"}, {"results", results}});
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heisflow: solvers and verifiers on the Heisenberg torus"};
    app.require_subcommand(1);
    app.fallthrough();  // allow the global flags after the subcommand
    Common common;
    app.add_option("--config", common.config_path, "JSON config file");
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--seed", common.seed, "override the config seed");
    app.add_option("--threads", common.threads, "worker threads (reserved)");
    app.add_flag("--force", common.force, "overwrite existing outputs");

    const std::vector<std::pair<std::string, std::string>> cmds{
        {"geom", "group tables, pavage decomposition, torus distances"},
        {"continuity", "particle continuity solve and weak-form residual"},
        {"hjb", "semi-Lagrangian Hamilton-Jacobi-Bellman solve"},
        {"mfg", "fictitious-play mean field game fixed point"},
        {"viscous", "stochastic vanishing-viscosity verifier"},
        {"verify-all", "run every subcommand at desk scale"}};
    for (const auto& [name, desc] : cmds) app.add_subcommand(name, desc);

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        const json cfg = load_config(common.config_path);
        const std::string dir =
            common.out_dir.empty() ? ("runs/" + cmd) : common.out_dir;
        if (cmd == "geom") return cmd_geom(section(cfg, "geom"), common, dir);
        if (cmd == "continuity")
            return cmd_continuity(section(cfg, "continuity"), common, dir);
        if (cmd == "hjb") return cmd_hjb(section(cfg, "hjb"), common, dir);
        if (cmd == "mfg") return cmd_mfg(section(cfg, "mfg"), common, dir);
        if (cmd == "viscous")
            return cmd_viscous(section(cfg, "viscous"), common, dir);
        if (cmd == "verify-all") return cmd_verify_all(cfg, common, dir);
        std::fprintf(stderr, "unknown subcommand %s\n", cmd.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
    }
    return kExitError;
}
