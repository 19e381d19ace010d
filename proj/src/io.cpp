#include "ccspin/io.hpp"

#include <charconv>
#include <stdexcept>

namespace ccs {

std::string num17(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vec vec_from_json(const json& j) {
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j.at(i).get<double>();
    return v;
}

json config_json(const Config& c) {
    json pts = json::array();
    for (int k = 0; k < c.n(); ++k) pts.push_back({c.x(2 * k), c.x(2 * k + 1)});
    return {{"masses", vec_json(c.m)}, {"points", pts}};
}

Config config_from_json(const json& j) {
    if (!j.contains("masses") || !j.contains("points"))
        throw std::invalid_argument("configuration JSON needs \"masses\" and \"points\"");
    std::vector<double> m = j.at("masses").get<std::vector<double>>();
    std::vector<std::array<double, 2>> p;
    for (const auto& q : j.at("points")) {
        if (q.size() != 2) throw std::invalid_argument("each point needs two coordinates");
        p.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
    }
    return make_config(m, p);
}

json cc_json(const CentralConfiguration& cc) {
    return {{"config", config_json(cc.config)},
            {"lambda", cc.lambda},
            {"residual", cc.residual},
            {"iterations", cc.iterations}};
}

json report_json(const SpectralReport& r) {
    json tm = json::array();
    for (const auto& z : r.tilde_mu) tm.push_back({z.real(), z.imag()});
    json kinds = json::array();
    for (ModeKind k : r.kind) kinds.push_back(to_string(k));
    return {{"lambda", r.lambda},
            {"kappa", r.kappa},
            {"I", r.I},
            {"lambda_unit", r.lambda_unit},
            {"kappa_unit", r.kappa_unit},
            {"mu", vec_json(r.mu)},
            {"mu_unit", vec_json(r.mu_unit)},
            {"eig_operator", vec_json(r.eig_operator)},
            {"tilde_mu", tm},
            {"kind", kinds},
            {"partition",
             {{"n0", r.partition.n0},
              {"np", r.partition.np},
              {"n1", r.partition.n1},
              {"n2", r.partition.n2},
              {"n3", r.partition.n3}}},
            {"scale_note", r.scale_note}};
}

json chart_json(const FrameChart& ch) {
    json basis = json::array();
    for (int k = 0; k < ch.K(); ++k) basis.push_back(vec_json(ch.E.col(k)));
    json Q = json::array();
    for (int i = 0; i < ch.K(); ++i) Q.push_back(vec_json(ch.Q.row(i).transpose()));
    json a = json::array();
    for (int i = 0; i < ch.K(); ++i)
        for (int j = i; j < ch.K(); ++j)
            for (int k = j; k < ch.K(); ++k) a.push_back({{"ijk", {i + 5, j + 5, k + 5}}, {"value", ch.a(i, j, k)}});
    return {{"base", config_json(ch.base)},
            {"lambda", ch.lambda},
            {"kappa", ch.kappa},
            {"E3", vec_json(ch.E3)},
            {"E4", vec_json(ch.E4)},
            {"basis", basis},
            {"Q", Q},
            {"mu", vec_json(ch.mu)},
            {"diag_residual", ch.diag_residual},
            {"explicit_basis", ch.explicit_basis},
            {"a", a}};
}

json verdict_json(const SpinVerdict& v) {
    json j = {{"case", to_string(v.kind)}, {"n0", v.n0}};
    if (v.n0 == 2) {
        j["discriminant"] = v.discriminant;
        j["discriminant_normalized"] = v.discriminant_normalized;
        j["a"] = {{"555", v.a[0]}, {"556", v.a[1]}, {"566", v.a[2]}, {"666", v.a[3]}};
        j["c"] = {v.c[0], v.c[1], v.c[2], v.c[3]};
        j["theta0"] = v.theta0;
        j["phi_at_theta0"] = v.phi_at_theta0;
    }
    j["pass"] = v.pass;
    if (!v.reason.empty()) j["reason"] = v.reason;
    return j;
}

json envelope(const json& run, const json& result) {
    return {{"artifact", {{"name", "ccspin"}, {"version", kVersion}}}, {"run", run}, {"result", result}};
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& columns)
    : os_(os), ncol_(columns.size()) {
    for (size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncol_) throw std::invalid_argument("CSV row has the wrong width");
    for (size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << num17(values[i]);
    os_ << '\n';
}

void CsvWriter::comment(std::ostream& os, const json& run) {
    os << "# ccspin " << kVersion << ' ' << run.dump() << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const json& run) {
    CsvWriter::comment(os, run);
    const int K = tr.states.empty() ? 0 : static_cast<int>(tr.states.front().z.size());
    std::vector<std::string> cols{"tau", "t", "r", "Upsilon", "theta"};
    for (int k = 0; k < K; ++k) cols.push_back("z" + std::to_string(k + 5));
    for (int k = 0; k < K; ++k) cols.push_back("Z" + std::to_string(k + 5));
    cols.push_back("energy_residual");
    cols.push_back("J_residual");
    CsvWriter w(os, cols);
    for (size_t i = 0; i < tr.states.size(); ++i) {
        const BlowupState& s = tr.states[i];
        std::vector<double> row{tr.tau[i], s.t, s.r, s.Upsilon, s.theta};
        for (int k = 0; k < K; ++k) row.push_back(s.z(k));
        for (int k = 0; k < K; ++k) row.push_back(s.Z(k));
        row.push_back(i < tr.energy_residual.size() ? tr.energy_residual[i] : 0.0);
        row.push_back(i < tr.J_residual.size() ? tr.J_residual[i] : 0.0);
        w.row(row);
    }
}

}  // namespace ccs
