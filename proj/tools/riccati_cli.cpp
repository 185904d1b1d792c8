#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "riccati/moebius_flow.hpp"
#include "riccati/oracle.hpp"
#include "riccati/scenarios.hpp"

using namespace riccati;
using nlohmann::json;

namespace {

constexpr int exit_engine = 1;
constexpr int exit_degenerate = 2;
constexpr int exit_containment = 3;
constexpr int exit_blowup = 4;

cplx parse_complex(const std::string& s)
{
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "bad complex literal '" + s + "', expected re,im");
    }
}

std::vector<double> parse_range(const std::string& s)
{
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string item;
    try {
        while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
    } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "bad range '" + s + "', expected start:stop:step");
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
        fail(ErrorKind::ParseError, "bad range '" + s + "', expected start:stop:step with step > 0");
    }
    std::vector<double> xs;
    const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (long i = 0; i <= n; ++i) xs.push_back(parts[0] + static_cast<double>(i) * parts[2]);
    return xs;
}

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Writes to the file, or to stdout for an empty path.
void emit(const std::string& path, const std::string& text)
{
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path);
    out << text;
}

void write_sidecar(const std::string& path, const json& config)
{
    if (path.empty()) return;
    emit(path + ".config.json", config.dump(2) + "\n");
}

int report_error(const Error& e)
{
    std::cerr << "error: " << e.what() << "\n";
    if (e.where()) std::cerr << "first failure x = " << num(*e.where()) << "\n";
    switch (e.kind()) {
    case ErrorKind::DegenerateToLine: return exit_degenerate;
    case ErrorKind::BlowUp:
    case ErrorKind::PoleEncountered: return exit_blowup;
    default: return exit_engine;
    }
}

struct ScenarioOptions {
    std::string name;
    std::string file;
    std::string variant;
    std::optional<double> c, T0, lambda, c1, c2, airy_b_offset, initial_R;
    std::optional<std::size_t> grid;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--scenario", name, "Registered scenario name");
        cmd->add_option("--scenario-file", file, "Scenario JSON document");
        cmd->add_option("--variant", variant, "Scenario variant");
        cmd->add_option("--c", c, "Constant c (negative_increasing, exponential_bound)");
        cmd->add_option("--T0", T0, "Initial T (wkb_negative, exponential_bound)");
        cmd->add_option("--lambda", lambda, "Potential scaling (wkb_negative)");
        cmd->add_option("--c1", c1, "Upper lens constant (wkb_positive)");
        cmd->add_option("--c2", c2, "Lower lens constant (wkb_positive)");
        cmd->add_option("--airy-b-offset", airy_b_offset, "Airy slope offset in units of |b| (example_5_2)");
        cmd->add_option("--initial-R", initial_R, "Initial radius (pipeline scenarios)");
        cmd->add_option("--grid", grid, "Grid size (default $RICCATI_GRID or 2048)")->check(CLI::Range(64, 1 << 24));
    }

    Scenario resolve() const
    {
        if (name.empty() == file.empty()) fail(ErrorKind::InvalidArgument, "give exactly one of --scenario, --scenario-file");
        const std::size_t n = grid ? *grid : default_grid_size();
        if (!file.empty()) {
            std::ifstream in(file);
            if (!in) fail(ErrorKind::InvalidArgument, "cannot open " + file);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::exception& e) {
                fail(ErrorKind::ParseError, file + ": " + e.what());
            }
            Scenario s = Scenario::from_json(j);
            if (grid) s.grid_size = *grid;
            return s;
        }
        json o = json::object();
        auto put = [&](const char* k, const std::optional<double>& v) {
            if (v) o[k] = *v;
        };
        put("c", c);
        put("T0", T0);
        put("lambda", lambda);
        put("c1", c1);
        put("c2", c2);
        put("airy_b_offset", airy_b_offset);
        put("initial_R", initial_R);
        return make_scenario(name, variant, o, n);
    }
};

int cmd_flow(const std::string& zeta_s, const std::string& m0_s, double R0, const std::string& xs_s,
             const std::string& out)
{
    const ConstantFlow flow = ConstantFlow::from_zeta(parse_complex(zeta_s));
    const cplx m0 = parse_complex(m0_s);
    if (!(R0 >= 0.0)) fail(ErrorKind::InvalidArgument, "R0 must be >= 0");
    const std::vector<double> xs = parse_range(xs_s);
    std::ostringstream csv;
    csv << "x,re_m,im_m,R,degenerate\n";
    std::optional<double> degenerate_at;
    for (double x : xs) {
        try {
            const Disk d = propagate_circle(flow, m0, R0, x);
            csv << num(x) << ',' << num(d.center().real()) << ',' << num(d.center().imag()) << ',' << num(d.radius())
                << ",0\n";
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateToLine) throw;
            csv << num(x) << ",,,,1\n";
            if (!degenerate_at) degenerate_at = x;
        }
    }
    emit(out, csv.str());
    write_sidecar(out, {{"command", "flow"},
                        {"zeta", complex_to_json(flow.zeta)},
                        {"m0", complex_to_json(m0)},
                        {"R0", R0},
                        {"xs", xs_s}});
    if (degenerate_at) {
        std::cerr << "error: circle degenerates to a line\nfirst failure x = " << num(*degenerate_at) << "\n";
        return exit_degenerate;
    }
    return 0;
}

std::string trajectory_csv(const ScenarioRun& run)
{
    std::ostringstream csv;
    csv << "x,alpha,beta,R,D,case,jump\n";
    auto rows = [&](const EstimateTrajectory& t, const char* label) {
        for (const auto& p : t.points) {
            csv << num(p.x) << ',' << num(p.alpha) << ',' << num(p.beta) << ',' << num(p.R) << ',' << num(p.D) << ','
                << (label ? label : std::string(to_string(p.kind))) << ',' << (p.jump ? 1 : 0) << '\n';
        }
    };
    if (run.lower) {
        rows(run.trajectory, "lens_upper");
        rows(*run.lower, "lens_lower");
    } else {
        rows(run.trajectory, nullptr);
    }
    return csv.str();
}

json trajectory_json(const EstimateTrajectory& t)
{
    json rows = json::array();
    for (const auto& p : t.points) {
        rows.push_back({{"x", p.x}, {"alpha", p.alpha}, {"beta", p.beta}, {"R", p.R}, {"D", p.D},
                        {"case", std::string(to_string(p.kind))}, {"jump", p.jump}});
    }
    return rows;
}

int cmd_estimate(const ScenarioOptions& so, std::size_t seeds, double tol, const std::string& format,
                 const std::string& out)
{
    const Scenario s = so.resolve();
    RunOptions opt;
    opt.seeds = seeds;
    opt.containment_tol = tol;
    const ScenarioRun run = run_scenario(s, opt);
    ContainmentReport rep = *run.containment;
    if (run.containment_lower) {
        rep.worst_margin = std::min(rep.worst_margin, run.containment_lower->worst_margin);
        if (run.containment_lower->first_failure_x &&
            (!rep.first_failure_x || *run.containment_lower->first_failure_x < *rep.first_failure_x)) {
            rep.first_failure_x = run.containment_lower->first_failure_x;
        }
        rep.pass = rep.pass && run.containment_lower->pass;
    }
    json report = {{"scenario", s.name},
                   {"variant", s.variant},
                   {"seeds", seeds},
                   {"worst_margin", rep.worst_margin},
                   {"pass", rep.pass}};
    report["first_failure_x"] = rep.first_failure_x ? json(*rep.first_failure_x) : json(nullptr);
    json checks = json::array();
    for (const auto& c : run.checks) {
        checks.push_back({{"name", c.name}, {"kind", c.exact ? "exact" : "qualitative"}, {"pass", c.passed},
                          {"detail", c.detail}});
    }
    report["checks"] = checks;
    if (format == "json") {
        json doc = report;
        doc["trajectory"] = trajectory_json(run.trajectory);
        if (run.lower) doc["trajectory_lower"] = trajectory_json(*run.lower);
        emit(out, doc.dump(2) + "\n");
    } else {
        emit(out, trajectory_csv(run));
        if (!out.empty()) emit(out + ".report.json", report.dump(2) + "\n");
    }
    write_sidecar(out, {{"command", "estimate"},
                        {"scenario", s.to_json()},
                        {"seeds", seeds},
                        {"containment_tol", tol},
                        {"oracle_tol", 1e-10},
                        {"format", format}});
    if (!rep.pass) {
        std::cerr << "containment failed\nfirst failure x = " << num(*rep.first_failure_x) << "\n";
        return exit_containment;
    }
    return 0;
}

int cmd_oracle(const ScenarioOptions& so, const std::string& constant, const std::string& xs_s,
               const std::string& y0_s, double tol, const std::string& out)
{
    const cplx y0 = parse_complex(y0_s);
    std::optional<Potential> V;
    std::vector<double> xs;
    json config = {{"command", "oracle"}, {"y0", complex_to_json(y0)}, {"tol", tol}};
    if (!constant.empty()) {
        if (xs_s.empty()) fail(ErrorKind::InvalidArgument, "--constant needs --xs");
        V = make_constant_potential(parse_complex(constant));
        xs = parse_range(xs_s);
        config["potential"] = V->to_json();
        config["xs"] = xs_s;
    } else {
        const Scenario s = so.resolve();
        V = s.potential;
        const Grid g = scenario_grid(s);
        xs.assign(g.points().begin(), g.points().end());
        config["scenario"] = s.to_json();
    }
    const OracleSolution sol = integrate_riccati(*V, y0, xs, tol);
    std::ostringstream csv;
    csv << "x,re_y,im_y\n";
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
        csv << num(sol.x[i]) << ',' << num(sol.y[i].real()) << ',' << num(sol.y[i].imag()) << '\n';
    }
    emit(out, csv.str());
    write_sidecar(out, config);
    return 0;
}

int cmd_list(bool as_json)
{
    const auto reg = scenario_registry();
    if (as_json) {
        json a = json::array();
        for (const auto& e : reg) a.push_back({{"name", e.name}, {"variants", e.variants}, {"summary", e.summary}});
        std::cout << a.dump(2) << "\n";
        return 0;
    }
    for (const auto& e : reg) {
        std::cout << e.name << " [";
        for (std::size_t i = 0; i < e.variants.size(); ++i) std::cout << (i ? ", " : "") << e.variants[i];
        std::cout << "]  " << e.summary << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Invariant disk estimates for the complex Riccati equation y' = V - y^2"};
    app.require_subcommand(1);

    std::string out;

    auto* flow = app.add_subcommand("flow", "Propagate a circle under a constant potential");
    std::string zeta, m0, xs;
    double R0 = 0.0;
    flow->add_option("--zeta", zeta, "sqrt(V) as re,im")->required();
    flow->add_option("--m0", m0, "Initial center as re,im")->required();
    flow->add_option("--R0", R0, "Initial radius")->required();
    flow->add_option("--xs", xs, "Sample points start:stop:step")->required();
    flow->add_option("--out", out, "Output file (default stdout)");

    auto* est = app.add_subcommand("estimate", "Run a scenario and check containment against the oracle");
    ScenarioOptions est_opts;
    est_opts.add(est);
    std::size_t seeds = 16;
    double ctol = 1e-4;
    std::string format = "csv";
    est->add_option("--seeds", seeds, "Boundary seeds for containment")->check(CLI::Range(4, 100000));
    est->add_option("--containment-tol", ctol, "Containment tolerance");
    est->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    est->add_option("--out", out, "Output file (default stdout)");

    auto* orc = app.add_subcommand("oracle", "Integrate the Riccati equation from y0");
    ScenarioOptions orc_opts;
    orc_opts.add(orc);
    std::string constant, y0, oxs;
    double otol = 1e-10;
    orc->add_option("--constant", constant, "Constant potential re,im instead of a scenario");
    orc->add_option("--xs", oxs, "Sample points start:stop:step (with --constant)");
    orc->add_option("--y0", y0, "Initial value re,im")->required();
    orc->add_option("--tol", otol, "Integrator tolerance in [1e-13, 1e-6]");
    orc->add_option("--out", out, "Output file (default stdout)");

    auto* lst = app.add_subcommand("list-scenarios", "List registered scenarios");
    bool as_json = false;
    lst->add_flag("--json", as_json, "JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (flow->parsed()) return cmd_flow(zeta, m0, R0, xs, out);
        if (est->parsed()) return cmd_estimate(est_opts, seeds, ctol, format, out);
        if (orc->parsed()) return cmd_oracle(orc_opts, constant, oxs, y0, otol, out);
        if (lst->parsed()) return cmd_list(as_json);
    } catch (const Error& e) {
        return report_error(e);
    }
    return 0;
}
