#include "ccspin/blowup.hpp"
#include "ccspin/catalog.hpp"
#include "ccspin/cc.hpp"
#include "ccspin/frame.hpp"
#include "ccspin/io.hpp"
#include "ccspin/normal_forms.hpp"
#include "ccspin/planar.hpp"

#include <CLI11.hpp>
#include <tbb/global_control.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ccs;

namespace {

constexpr int kExitNoConvergence = 2;
constexpr int kExitIntegration = 3;
constexpr int kExitUsage = 64;

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Global {
    std::string out;
    std::string format = "json";
    int threads = 0;
    std::string seed;  // integer RNG seed or, for cc commands, a named seed configuration
    double tol = 1e-12;
};

// Common description of the configuration a command works on.
struct Source {
    std::vector<double> masses;
    std::string preset;  // lagrange, lagrange-perturbed, equilateral, equilateral-degenerate, rhombic
    std::string config_file;
    double m4 = 0.0;
    double zeta = 2.0;
    double perturb = 1e-2;
    double zero_tol = 1e-6;
};

void add_source_options(CLI::App* c, Source& s) {
    c->add_option("--masses", s.masses, "comma-separated masses (three bodies for the Lagrange seeds)")
        ->delimiter(',');
    c->add_option("--preset", s.preset,
                  "lagrange | lagrange-perturbed | equilateral | equilateral-degenerate | rhombic");
    c->add_option("--config", s.config_file, "JSON file with {\"masses\": [...], \"points\": [[x, y], ...]}");
    c->add_option("--m4", s.m4, "central mass of the equilateral preset");
    c->add_option("--zeta", s.zeta, "rhombic parameter");
    c->add_option("--perturb", s.perturb, "amplitude of the random seed perturbation");
    c->add_option("--zero-tol", s.zero_tol, "|mu| / lambda below which a mode counts as degenerate");
}

std::uint64_t rng_seed(const Global& g) {
    if (g.seed.empty()) return 1;
    std::uint64_t v = 0;
    const auto r = std::from_chars(g.seed.data(), g.seed.data() + g.seed.size(), v);
    if (r.ec != std::errc() || r.ptr != g.seed.data() + g.seed.size()) return 1;
    return v;
}

bool seed_is_name(const Global& g) {
    if (g.seed.empty()) return false;
    std::uint64_t v;
    const auto r = std::from_chars(g.seed.data(), g.seed.data() + g.seed.size(), v);
    return !(r.ec == std::errc() && r.ptr == g.seed.data() + g.seed.size());
}

Config triangle(const std::vector<double>& m) {
    return make_config(m, {{{0.0, 0.0}}, {{1.0, 0.0}}, {{0.5, std::sqrt(3.0) / 2}}});
}

struct Resolved {
    CentralConfiguration cc;
    std::string origin;
    bool exact = false;
};

Resolved resolve_cc(const Source& src, const Global& g) {
    std::string preset = src.preset;
    if (preset.empty() && seed_is_name(g)) preset = g.seed;
    Resolved r;
    SolveOptions so;
    so.tol = g.tol;
    if (!src.config_file.empty()) {
        std::ifstream in(src.config_file);
        if (!in) throw Usage("cannot read " + src.config_file);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Usage(std::string("bad JSON in ") + src.config_file + ": " + e.what());
        }
        r.cc = solve_cc(config_from_json(j.contains("config") ? j.at("config") : j), so);
        r.origin = "file";
        return r;
    }
    if (preset == "equilateral" || preset == "equilateral-degenerate") {
        const double m4 = preset == "equilateral-degenerate" ? equilateral_degenerate_mass_exact() : src.m4;
        if (!(m4 > 0)) throw Usage("--m4 must be positive");
        r.cc = exact_cc(equilateral_config(m4));
        r.origin = preset;
        r.exact = true;
        return r;
    }
    if (preset == "rhombic") {
        const RhombicFamily f = rhombic_family(src.zeta);
        if (!f.positive) throw Usage("rhombic --zeta gives a nonpositive mass");
        r.cc = exact_cc(f.config);
        r.origin = preset;
        r.exact = true;
        return r;
    }
    if (preset.empty() || preset == "lagrange" || preset == "lagrange-perturbed") {
        std::vector<double> m = src.masses.empty() ? std::vector<double>{1, 1, 1} : src.masses;
        if (m.size() != 3) throw Usage("the Lagrange seeds need three masses");
        Config seed = triangle(m);
        if (preset == "lagrange-perturbed") {
            std::mt19937_64 rng(rng_seed(g));
            std::uniform_real_distribution<double> ud(-src.perturb, src.perturb);
            for (int i = 0; i < seed.x.size(); ++i) seed.x(i) += ud(rng);
        }
        r.cc = solve_cc(seed, so);
        r.origin = preset.empty() ? "lagrange" : preset;
        return r;
    }
    throw Usage("unknown preset '" + preset + "'");
}

SpectralReport classify_cli(const CentralConfiguration& cc, const Source& src) {
    ClassifyOptions co;
    co.zero_tol = src.zero_tol;
    return classify(cc, co);
}

json source_json(const Source& s) {
    json j;
    if (!s.masses.empty()) j["masses"] = s.masses;
    if (!s.preset.empty()) j["preset"] = s.preset;
    if (!s.config_file.empty()) j["config"] = s.config_file;
    if (s.preset == "equilateral") j["m4"] = s.m4;
    if (s.preset == "rhombic") j["zeta"] = s.zeta;
    if (s.preset == "lagrange-perturbed") j["perturb"] = s.perturb;
    j["zero_tol"] = s.zero_tol;
    return j;
}

json global_json(const Global& g, const std::string& command) {
    return {{"command", command}, {"format", g.format}, {"threads", g.threads}, {"seed", g.seed}, {"tol", g.tol}};
}

// ---- output ----

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
    } else if (j.is_number_float()) {
        out.emplace_back(prefix, num17(j.get<double>()));
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

class Output {
public:
    explicit Output(const Global& g) : g_(g) {
        if (!g.out.empty()) {
            file_ = std::make_unique<std::ofstream>(g.out);
            if (!*file_) throw Usage("cannot write " + g.out);
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }
    bool csv() const { return g_.format == "csv"; }

    // JSON body, or key,value lines when CSV was requested for a non-tabular result
    void emit(const json& run, const json& result) {
        if (!csv()) {
            os() << envelope(run, result).dump(2) << '\n';
            return;
        }
        CsvWriter::comment(os(), run);
        std::vector<std::pair<std::string, std::string>> kv;
        flatten(result, "", kv);
        os() << "key,value\n";
        for (const auto& [k, v] : kv) os() << k << ',' << v << '\n';
    }

private:
    const Global& g_;
    std::unique_ptr<std::ofstream> file_;
};

// ---- commands ----

int cmd_cc_find(const Global& g, const Source& src) {
    const Resolved r = resolve_cc(src, g);
    const SpectralReport rep = classify_cli(r.cc, src);
    json run = global_json(g, "cc find");
    run["source"] = source_json(src);
    json res = {{"origin", r.origin}, {"cc", cc_json(r.cc)}, {"report", report_json(rep)}};
    json near = json::array();
    for (int k = 0; k < rep.mu_unit.size(); ++k)
        if (std::abs(rep.mu_unit(k)) <= src.zero_tol * rep.lambda_unit) near.push_back(k + 5);
    res["degenerate_modes"] = near;
    res["flagged"] = rep.partition.n0 > 0;
    Output out(g);
    if (out.csv()) {
        CsvWriter::comment(out.os(), run);
        CsvWriter w(out.os(), {"body", "mass", "x", "y"});
        for (int k = 0; k < r.cc.config.n(); ++k)
            w.row({double(k + 1), r.cc.config.m(k), r.cc.config.x(2 * k), r.cc.config.x(2 * k + 1)});
    } else {
        out.emit(run, res);
    }
    return 0;
}

int cmd_cc_classify(const Global& g, const Source& src) {
    Resolved r;
    if (!src.config_file.empty()) {
        std::ifstream in(src.config_file);
        if (!in) throw Usage("cannot read " + src.config_file);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Usage(std::string("bad JSON: ") + e.what());
        }
        r.cc = exact_cc(config_from_json(j.contains("config") ? j.at("config") : j));
        r.origin = "file";
    } else {
        r = resolve_cc(src, g);
    }
    const SpectralReport rep = classify_cli(r.cc, src);
    json run = global_json(g, "cc classify");
    run["source"] = source_json(src);
    json res = {{"origin", r.origin}, {"residual", r.cc.residual}, {"report", report_json(rep)}};
    const ManifoldDimension md = collision_manifold_dimension(rep);
    res["collision_manifold_dimension"] = {{"value", md.dimension}, {"upper_bound", md.upper_bound}};
    Output out(g);
    if (out.csv()) {
        CsvWriter::comment(out.os(), run);
        CsvWriter w(out.os(), {"mode", "mu", "mu_unit", "eig_operator", "tilde_mu_re", "tilde_mu_im"});
        for (int k = 0; k < rep.mu.size(); ++k)
            w.row({double(k + 5), rep.mu(k), rep.mu_unit(k), rep.eig_operator(k), rep.tilde_mu[k].real(),
                   rep.tilde_mu[k].imag()});
    } else {
        out.emit(run, res);
    }
    return 0;
}

FrameChart chart_for(const Resolved& r, const Source& src, bool explicit_vectors) {
    const SpectralReport rep = classify_cli(r.cc, src);
    ChartOptions opt;
    opt.zero_tol = src.zero_tol;
    if (explicit_vectors) {
        const auto E = equilateral_degenerate_vectors();
        opt.explicit_vectors = {E[0], E[1]};
    }
    return build_chart(rep, opt);
}

int cmd_frame_build(const Global& g, const Source& src, bool explicit_vectors) {
    const Resolved r = resolve_cc(src, g);
    if (explicit_vectors && r.origin != "equilateral-degenerate")
        throw Usage("--explicit-vectors needs --preset equilateral-degenerate");
    const FrameChart ch = chart_for(r, src, explicit_vectors);
    json run = global_json(g, "frame build");
    run["source"] = source_json(src);
    run["explicit_vectors"] = explicit_vectors;
    Output out(g);
    out.emit(run, chart_json(ch));
    return 0;
}

struct CollideArgs {
    std::vector<double> mix;
    double delta = 1e-3;
    double r0 = 0.0;
    double tau_back = 12.0;
    double tau_forward = 0.0;
    double rtol = 1e-10;
    bool theta_limit = false;
    double t_start = 1.0;
    double decades = 2.0;
};

json asymptotic_json(const AsymptoticReport& a) {
    auto fit = [](const ExponentFit& f) {
        return json{{"slope", f.slope},
                    {"slope_se", f.slope_se},
                    {"prefactor", f.prefactor},
                    {"prefactor_rel_se", f.prefactor_rel_se},
                    {"r2", f.r2}};
    };
    return {{"I", fit(a.I)},     {"U", fit(a.U)},         {"K", fit(a.K)}, {"r", fit(a.r)},
            {"t_min", a.t_min},  {"t_max", a.t_max},      {"n", a.n},      {"max_abs_J", a.max_abs_J}};
}

json theta_json(const ThetaLimit& t) {
    return {{"theta0", t.theta0},   {"model", to_string(t.model)}, {"converged", t.converged},
            {"sigma", t.sigma},     {"r2_exp", t.r2_exp},          {"p", t.p},
            {"r2_pow", t.r2_pow},   {"n_fit", t.n_fit},            {"decade_ratios", t.decade_ratios},
            {"note", t.note}};
}

// homothetic collapse in Cartesian coordinates: start on the exact solution at t_start, run to t = 0
int homothetic_run(const Global& g, const Source& src, const CollideArgs& a, bool simulate) {
    if (!(a.t_start > 0)) throw Usage("--t-start must be positive");
    if (!(a.decades > 0)) throw Usage("--decades must be positive");
    Source s = src;
    s.preset = "lagrange";
    const Resolved r = resolve_cc(s, g);
    const FrameChart ch = chart_for(r, s, false);
    const HomotheticState h = homothetic_orbit(ch, a.t_start);
    OdeOptions opt;
    opt.rtol = std::min(a.rtol, 1e-12);
    opt.atol = 1e-14;
    const CartesianTrajectory tr = integrate_cartesian(ch.base.m, h.x, h.v, a.t_start, 0.0, opt, 1e-5);
    json run = global_json(g, simulate ? "collide simulate" : "collide asymptotics");
    run["source"] = source_json(src);
    run["preset"] = "homothetic";
    run["t_start"] = a.t_start;
    run["decades"] = a.decades;
    Output out(g);
    const double kap = ch.kappa;
    json res = {{"kappa", kap},
                {"expected",
                 {{"slope_I", 4.0 / 3.0},
                  {"slope_U", -2.0 / 3.0},
                  {"prefactor_I", std::pow(1.5, 4.0 / 3.0) * std::pow(kap, 2.0 / 3.0)},
                  {"prefactor_U", std::cbrt(1.0 / 18.0) * std::pow(kap, 2.0 / 3.0)}}},
                {"status", to_string(tr.status)},
                {"samples", tr.t.size()}};
    try {
        res["asymptotics"] = asymptotic_json(asymptotic_exponents(tr, 0.0, a.decades));
    } catch (const std::invalid_argument& e) {
        res["asymptotics_error"] = e.what();
    }
    if (simulate && out.csv()) {
        CsvWriter::comment(out.os(), run);
        CsvWriter w(out.os(), {"t", "I", "U", "K", "energy", "J"});
        for (size_t i = 0; i < tr.t.size(); ++i) {
            const Config c{tr.m, tr.x[i]};
            w.row({tr.t[i], moment_of_inertia(c), potential(c), kinetic_energy(tr.m, tr.v[i]), tr.energy[i], tr.J[i]});
        }
    } else {
        out.emit(run, res);
    }
    return 0;
}

int cmd_collide(const Global& g, const Source& src, const CollideArgs& a, bool simulate) {
    if (src.preset == "homothetic") return homothetic_run(g, src, a, simulate);
    if (!(a.tau_back > 0) && !(a.tau_forward > 0)) throw Usage("zero-length tau span");
    if (a.tau_back < 0 || a.tau_forward < 0) throw Usage("tau spans must be nonnegative");
    if (!(a.delta > 0)) throw Usage("--delta must be positive");
    const Resolved r = resolve_cc(src, g);
    const FrameChart ch = chart_for(r, src, false);
    CollisionOrbitOptions co;
    co.mix = a.mix;
    co.delta = a.delta;
    co.r0 = a.r0;
    co.tau_back = a.tau_back > 0 ? a.tau_back : 1e-9;
    co.tau_forward = a.tau_forward;
    co.ode.rtol = a.rtol;
    const CollisionOrbit orb = make_collision_orbit(ch, co);

    json run = global_json(g, simulate ? "collide simulate" : "collide asymptotics");
    run["source"] = source_json(src);
    run["mix"] = a.mix;
    run["delta"] = a.delta;
    run["r0"] = a.r0;
    run["tau_back"] = a.tau_back;
    run["tau_forward"] = a.tau_forward;
    run["rtol"] = a.rtol;

    double emax = 0, jmax = 0;
    for (double e : orb.backward.energy_residual) emax = std::max(emax, std::abs(e));
    for (double j : orb.backward.J_residual) jmax = std::max(jmax, std::abs(j));
    json res = {{"kappa", ch.kappa},
                {"unstable_modes", orb.unstable_modes},
                {"unstable_rates", orb.unstable_rates},
                {"seeded_rate", orb.seeded_rate},
                {"fitted_rate", orb.fitted_rate},
                {"fit_r2", orb.fit_r2},
                {"approached", orb.approached},
                {"status", to_string(orb.backward.status)},
                {"samples", orb.backward.tau.size()},
                {"max_energy_residual", emax},
                {"max_J_residual", jmax}};
    if (a.theta_limit || !simulate) res["theta_limit"] = theta_json(theta_limit(orb.backward));
    const bool failed = orb.backward.status != OdeStatus::Completed;
    if (failed) res["message"] = orb.backward.message;

    Output out(g);
    if (simulate && out.csv()) {
        write_trajectory_csv(out.os(), orb.backward, run);
        if (!orb.forward.tau.empty()) {
            Trajectory fw = orb.forward;
            fw.tau.erase(fw.tau.begin());
            fw.states.erase(fw.states.begin());
            fw.energy_residual.erase(fw.energy_residual.begin());
            fw.J_residual.erase(fw.J_residual.begin());
            std::ostringstream tail;
            write_trajectory_csv(tail, fw, run);
            // drop the repeated comment and header lines
            std::string s = tail.str();
            for (int k = 0; k < 2; ++k) s.erase(0, s.find('\n') + 1);
            out.os() << s;
        }
    } else {
        out.emit(run, res);
    }
    if (failed) throw IntegrationFailure(orb.backward.message);
    return 0;
}

int cmd_spin(const Global& g, const Source& src) {
    const Resolved r = resolve_cc(src, g);
    const SpectralReport rep = classify_cli(r.cc, src);
    ChartOptions opt;
    opt.zero_tol = src.zero_tol;
    const FrameChart ch = build_chart(rep, opt);
    const SpinVerdict v = spin_verdict(rep, ch);
    json run = global_json(g, "spin check");
    run["source"] = source_json(src);
    json res = verdict_json(v);
    res["partition"] = report_json(rep)["partition"];
    Output out(g);
    out.emit(run, res);
    return 0;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

struct CatalogArgs {
    std::vector<double> range;
    int n = 100;
    int nx = 200, ny = 200;
    double tol = 1e-8;
};

int cmd_catalog_rhombic(const Global& g, const CatalogArgs& a) {
    std::vector<double> rg = a.range.empty() ? std::vector<double>{std::sqrt(3.0) + 1e-3, std::sqrt(3.0) + 2 - 1e-3}
                                             : a.range;
    if (rg.size() != 2 || !(rg[0] < rg[1]) || a.n < 1) throw Usage("--zeta needs lo,hi with lo < hi");
    json run = global_json(g, "catalog rhombic");
    run["zeta"] = rg;
    run["n"] = a.n;
    const double zs = 1 + std::sqrt(2.0);
    Output out(g);
    json rows = json::array();
    std::vector<std::vector<double>> table;
    for (double z : linspace(rg[0], rg[1], a.n)) {
        const RhombicFamily f = rhombic_family(z);
        const RhombicEigen e = rhombic_eigenvalues(z);
        const double order = e.mu[3] < e.mu[2] ? -1.0 : (e.mu[3] > e.mu[2] ? 1.0 : 0.0);
        table.push_back({z, f.s, f.m_tilde, f.positive ? 1.0 : 0.0, e.mu[0], e.mu[1], e.mu[2], e.mu[3],
                         e.kappa_half, order});
    }
    if (out.csv()) {
        CsvWriter::comment(out.os(), run);
        CsvWriter w(out.os(), {"zeta", "s", "m_tilde", "positive", "mu5", "mu6", "mu7", "mu8", "kappa_half",
                               "order_mu8_vs_mu7"});
        for (const auto& row : table) w.row(row);
    } else {
        for (const auto& row : table)
            rows.push_back({{"zeta", row[0]},
                            {"s", row[1]},
                            {"m_tilde", row[2]},
                            {"positive", row[3] > 0},
                            {"mu", {row[4], row[5], row[6], row[7]}},
                            {"kappa_half", row[8]},
                            {"order_mu8_vs_mu7", static_cast<int>(row[9])}});
        out.emit(run, {{"tie_zeta", zs}, {"rows", rows}});
    }
    return 0;
}

int cmd_catalog_kite(const Global& g, const CatalogArgs& a) {
    if (a.nx < 1 || a.ny < 1) throw Usage("grid sizes must be positive");
    const KiteScan s = kite_two_degree_scan(a.nx, a.ny, a.tol);
    json run = global_json(g, "catalog kite");
    run["nx"] = a.nx;
    run["ny"] = a.ny;
    run["det_tol"] = a.tol;
    Output out(g);
    if (out.csv()) {
        CsvWriter::comment(out.os(), run);
        CsvWriter w(out.os(), {"xi", "eta", "m3", "m4", "det1", "det2", "min_eig"});
        for (const KiteCell& c : s.cells) w.row({c.xi, c.eta, c.m3, c.m4, c.det1, c.det2, c.min_eig});
    } else {
        json simul = json::array();
        for (const KiteCell& c : s.simultaneous) simul.push_back({{"xi", c.xi}, {"eta", c.eta}});
        out.emit(run, {{"label", "numerical grid evidence, not a proof"},
                       {"cells", s.cells.size()},
                       {"excluded", s.excluded},
                       {"nonpositive", s.nonpositive},
                       {"simultaneous", simul},
                       {"det1_sign_changes", s.det1_sign_changes},
                       {"det2_sign_changes", s.det2_sign_changes},
                       {"min_max_det", s.min_max_det}});
    }
    return 0;
}

int cmd_catalog_equilateral(const Global& g, const CatalogArgs& a) {
    std::vector<double> rg = a.range.empty() ? std::vector<double>{0.5, 1.0} : a.range;
    if (rg.size() != 2 || !(rg[0] < rg[1]) || !(rg[0] > 0) || a.n < 1) throw Usage("--m4 needs lo,hi with 0 < lo < hi");
    json run = global_json(g, "catalog equilateral");
    run["m4"] = rg;
    run["n"] = a.n;
    Output out(g);
    std::vector<std::vector<double>> table;
    for (double m4 : linspace(rg[0], rg[1], a.n)) {
        const EquilateralFamily f = equilateral_family(m4);
        std::vector<double> row{m4, f.min_restricted, f.indefinite ? 1.0 : 0.0};
        for (int k = 0; k < f.report.eig_operator.size(); ++k) row.push_back(f.report.eig_operator(k));
        table.push_back(row);
    }
    if (out.csv()) {
        CsvWriter::comment(out.os(), run);
        std::vector<std::string> cols{"m4", "min_restricted", "indefinite"};
        for (size_t k = 3; k < table.front().size(); ++k) cols.push_back("eig" + std::to_string(k + 2));
        CsvWriter w(out.os(), cols);
        for (const auto& row : table) w.row(row);
    } else {
        json rows = json::array();
        for (const auto& row : table)
            rows.push_back({{"m4", row[0]},
                            {"min_restricted", row[1]},
                            {"indefinite", row[2] > 0},
                            {"eig_operator", std::vector<double>(row.begin() + 3, row.end())}});
        json res = {{"degenerate_mass_exact", equilateral_degenerate_mass_exact()}, {"rows", rows}};
        try {
            res["degenerate_mass_bisection"] = locate_degenerate_mass(0.5, 1.0, 1e-12);
        } catch (const std::exception& e) {
            res["degenerate_mass_bisection"] = e.what();
        }
        out.emit(run, res);
    }
    return 0;
}

struct PlanarArgs {
    std::vector<double> c;
    bool simulate = false;
};

int cmd_planar(const Global& g, const PlanarArgs& a) {
    if (a.c.size() != 4) throw Usage("--c needs four coefficients c1,c2,c3,c4");
    const PlanarSystem sys = planar_from_c({a.c[0], a.c[1], a.c[2], a.c[3]});
    const PolarForms pf = polar_forms(sys);
    json run = global_json(g, "planar analyze");
    run["c"] = a.c;
    run["simulate"] = a.simulate;
    json rows = json::array();
    std::vector<double> roots;
    try {
        roots = characteristic_directions(pf.Psi);
    } catch (const IdenticallyZero&) {
        Output out(g);
        out.emit(run, {{"Psi_identically_zero", true}});
        return 0;
    }
    for (double th : roots) {
        const RateEstimate re = rate_estimate(pf.Phi, th, sys.m);
        const double dpsi = derivative(pf.Psi, th);
        json row = {{"theta0", th},
                    {"Phi", re.phi},
                    {"dPsi", dpsi},
                    {"sharp", re.sharp},
                    {"attracting_backward", re.phi > 0 && dpsi > 0}};
        if (re.sharp) {
            row["prefactor"] = re.prefactor;
            row["exponent"] = re.exponent;
        }
        if (a.simulate && re.phi > 0) {
            try {
                const PlanarFit f = dpsi > 0 ? simulate_and_fit(sys, th + 0.05, 1.0, -1.0, -1e6)
                                             : shoot_characteristic_ray(sys, th - 0.05, th + 0.05, 1.0, -1e3);
                row["fit"] = {{"theta_num", f.theta0_num},
                              {"psi_at_theta_num", f.psi_at_theta0},
                              {"exponent_num", f.exponent_num},
                              {"prefactor_num", f.prefactor_num},
                              {"r2", f.r2}};
            } catch (const std::exception& e) {
                row["fit"] = {{"error", e.what()}};
            }
        }
        rows.push_back(row);
    }
    Output out(g);
    if (out.csv()) {
        CsvWriter::comment(out.os(), run);
        CsvWriter w(out.os(), {"theta0", "Phi", "dPsi", "prefactor", "exponent"});
        for (double th : roots) {
            const RateEstimate re = rate_estimate(pf.Phi, th, sys.m);
            w.row({th, re.phi, derivative(pf.Psi, th), re.sharp ? re.prefactor : std::nan(""), re.exponent});
        }
    } else {
        out.emit(run, {{"m", sys.m},
                       {"P", sys.P},
                       {"Q", sys.Q},
                       {"Phi", pf.Phi.coeff},
                       {"Psi", pf.Psi.coeff},
                       {"resultant", resultant4(a.c[0], a.c[1], a.c[2], a.c[3])},
                       {"directions", rows}});
    }
    return 0;
}

int cmd_resonance(const Global& g, const Source& src, int max_order, double res_tol, double near_tol, bool full) {
    if (max_order < 2) throw Usage("--max-order must be at least 2");
    const Resolved r = resolve_cc(src, g);
    const FrameChart ch = chart_for(r, src, false);
    const LinearData lin = build_linearization(ch);
    // default input: sqrt(kappa) and the tilde-mu; the partners add relations that always hold
    std::vector<std::complex<double>> eigs;
    if (full) {
        eigs = spectrum_predicted(lin);
    } else {
        eigs.push_back(std::sqrt(ch.kappa));
        for (int k = 0; k < ch.K(); ++k)
            eigs.push_back(-std::sqrt(ch.kappa) / 4.0 + std::sqrt(std::complex<double>(ch.mu(k) + ch.kappa / 16.0)));
    }
    const auto hits = resonance_scan(eigs, max_order, res_tol, near_tol);
    json run = global_json(g, "resonance scan");
    run["source"] = source_json(src);
    run["max_order"] = max_order;
    run["res_tol"] = res_tol;
    run["near_tol"] = near_tol;
    run["full_spectrum"] = full;
    json ev = json::array();
    for (const auto& z : eigs) ev.push_back({z.real(), z.imag()});
    json list = json::array();
    for (const Resonance& h : hits)
        list.push_back({{"k", h.k}, {"alpha", h.alpha}, {"order", h.order}, {"residual", h.residual}, {"near", h.near}});
    Output out(g);
    out.emit(run, {{"eigenvalues", ev}, {"resonances", list}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ccspin: central configurations, collision blow-up and spin diagnostics"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--out", g.out, "output file (default stdout)");
    app.add_option("--format", g.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", g.threads, "worker threads for scans (0 = default)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "integer RNG seed, or a named seed configuration for cc commands");
    app.add_option("--tol", g.tol, "Newton tolerance")->check(CLI::PositiveNumber);
    app.add_flag_callback("--version", [] {
        std::cout << "ccspin " << kVersion << '\n';
        throw CLI::Success();
    });

    Source src;
    CollideArgs ca;
    CatalogArgs cat;
    PlanarArgs pa;
    bool explicit_vectors = false;
    int max_order = 4;
    double res_tol = 1e-9;
    double near_tol = 1e-4;
    bool full_spectrum = false;

    auto* cc = app.add_subcommand("cc", "central configurations")->require_subcommand(1);
    auto* cc_find = cc->add_subcommand("find", "solve for a central configuration and classify it");
    auto* cc_classify = cc->add_subcommand("classify", "classify a given configuration");
    add_source_options(cc_find, src);
    add_source_options(cc_classify, src);

    auto* frame = app.add_subcommand("frame", "moving-frame charts")->require_subcommand(1);
    auto* frame_build = frame->add_subcommand("build", "build the chart at a central configuration");
    add_source_options(frame_build, src);
    frame_build->add_flag("--explicit-vectors", explicit_vectors, "use the closed-form degenerate eigenvectors");

    auto* collide = app.add_subcommand("collide", "collision orbits in blow-up coordinates")->require_subcommand(1);
    auto* col_sim = collide->add_subcommand("simulate", "generate a collision orbit (trajectory CSV with --format csv)");
    auto* col_asy = collide->add_subcommand("asymptotics", "rates, exponents and theta-limit of a collision orbit");
    for (auto* c : {col_sim, col_asy}) {
        add_source_options(c, src);
        c->add_option("--mix", ca.mix, "coefficients over the unstable modes")->delimiter(',');
        c->add_option("--delta", ca.delta, "seed size at tau = 0");
        c->add_option("--r0", ca.r0, "lift off the collision manifold (r at tau = 0)");
        c->add_option("--tau-back", ca.tau_back, "length of the arc toward the collision");
        c->add_option("--tau-forward", ca.tau_forward, "continuation away from the collision");
        c->add_option("--rtol", ca.rtol, "integrator relative tolerance");
        c->add_option("--t-start", ca.t_start, "homothetic preset: start time before collision");
        c->add_option("--decades", ca.decades, "homothetic preset: decades used in the fit");
    }
    col_sim->add_flag("--theta-limit", ca.theta_limit, "add the theta-limit diagnostics");

    auto* spin = app.add_subcommand("spin", "infinite-spin diagnostics")->require_subcommand(1);
    auto* spin_check = spin->add_subcommand("check", "spin verdict at a central configuration");
    add_source_options(spin_check, src);

    auto* catalog = app.add_subcommand("catalog", "closed-form families")->require_subcommand(1);
    auto* cat_rh = catalog->add_subcommand("rhombic", "rhombic family eigenvalues");
    cat_rh->add_option("--zeta", cat.range, "lo,hi")->delimiter(',');
    cat_rh->add_option("--n", cat.n, "number of samples")->check(CLI::PositiveNumber);
    auto* cat_kite = catalog->add_subcommand("kite", "two-degree determinant scan of the kite family");
    cat_kite->add_option("--nx", cat.nx, "grid size in xi")->check(CLI::PositiveNumber);
    cat_kite->add_option("--ny", cat.ny, "grid size in eta")->check(CLI::PositiveNumber);
    cat_kite->add_option("--det-tol", cat.tol, "threshold for both determinants");
    auto* cat_eq = catalog->add_subcommand("equilateral", "equilateral family with a central mass");
    cat_eq->add_option("--m4", cat.range, "lo,hi")->delimiter(',');
    cat_eq->add_option("--n", cat.n, "number of samples")->check(CLI::PositiveNumber);

    auto* planar = app.add_subcommand("planar", "homogeneous planar systems")->require_subcommand(1);
    auto* planar_an = planar->add_subcommand("analyze", "characteristic directions and rates");
    planar_an->add_option("--c", pa.c, "c1,c2,c3,c4")->delimiter(',')->required();
    planar_an->add_flag("--simulate", pa.simulate, "also integrate and fit each ray with Phi > 0");

    auto* reson = app.add_subcommand("resonance", "resonances of the linearization")->require_subcommand(1);
    auto* reson_scan = reson->add_subcommand("scan", "scan multi-indices up to a given order");
    add_source_options(reson_scan, src);
    reson_scan->add_option("--max-order", max_order, "highest order (2..12)");
    reson_scan->add_option("--res-tol", res_tol, "relative tolerance for exact resonances");
    reson_scan->add_option("--near-tol", near_tol, "relative tolerance for near resonances");
    reson_scan->add_flag("--full-spectrum", full_spectrum, "also scan the partner eigenvalues");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (app.exit(e) == 0) return 0;
        return kExitUsage;
    }

    std::optional<tbb::global_control> gc;
    if (g.threads > 0) gc.emplace(tbb::global_control::max_allowed_parallelism, static_cast<size_t>(g.threads));

    try {
        if (*cc_find) return cmd_cc_find(g, src);
        if (*cc_classify) return cmd_cc_classify(g, src);
        if (*frame_build) return cmd_frame_build(g, src, explicit_vectors);
        if (*col_sim) return cmd_collide(g, src, ca, true);
        if (*col_asy) return cmd_collide(g, src, ca, false);
        if (*spin_check) return cmd_spin(g, src);
        if (*cat_rh) return cmd_catalog_rhombic(g, cat);
        if (*cat_kite) return cmd_catalog_kite(g, cat);
        if (*cat_eq) return cmd_catalog_equilateral(g, cat);
        if (*planar_an) return cmd_planar(g, pa);
        if (*reson_scan) return cmd_resonance(g, src, max_order, res_tol, near_tol, full_spectrum);
    } catch (const Usage& e) {
        std::cerr << "usage error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    } catch (const NoConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
    } catch (const IntegrationFailure& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return kExitIntegration;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
