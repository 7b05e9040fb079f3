// Batch front end: one subcommand per module, reports on stdout or --output.
// Exit status: 0 ok, 1 error, 2 when d_hat >= 1 (hypothesis not witnessed).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pwdens/io.hpp"
#include "pwdens/pwdens.hpp"

namespace {

using namespace pwdens;
using io::json;
using io::num;

struct Overrides {
    std::vector<double> mu_grid;
    std::vector<double> radii;
    std::optional<double> alpha, delta, epsilon, beta, gamma, growth_c, norm_budget;
    std::optional<std::uint64_t> seed;
};

struct Common {
    std::vector<std::string> inputs;
    std::string output;
    std::string format = "json";
    Overrides ov;
};

void add_common(CLI::App* cmd, Common& c, bool multi_input = false) {
    if (multi_input)
        cmd->add_option("-i,--input", c.inputs, "Instance JSON file(s)")->required()->check(CLI::ExistingFile);
    else
        cmd->add_option("-i,--input", c.inputs, "Instance JSON file")->required()->expected(1)->check(CLI::ExistingFile);
    cmd->add_option("-o,--output", c.output, "Output path (default stdout)");
    cmd->add_option("-f,--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    auto& o = c.ov;
    cmd->add_option("--mu-grid", o.mu_grid, "Regularization grid")->check(CLI::NonNegativeNumber);
    cmd->add_option("--radii", o.radii, "Window radii")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o.alpha, "Subspace parameter alpha > 1")->check(CLI::Range(1.0, 1e300));
    cmd->add_option("--delta", o.delta, "Window bandwidth delta > 0")->check(CLI::PositiveNumber);
    cmd->add_option("--epsilon", o.epsilon, "Concentration target epsilon in (0, 1)")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--beta", o.beta, "Product-window exponent in (0, 1)")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--gamma", o.gamma, "Growth exponent in (0, beta)")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--growth-c", o.growth_c, "Growth constant C > 0")->check(CLI::PositiveNumber);
    cmd->add_option("--norm-budget", o.norm_budget, "Norm budget for Theorem 1 mode")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "Seed for jittered point sets");
}

PointDescriptor reseed(PointDescriptor d, std::uint64_t seed) {
    std::visit(
        [&](auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, JitterSet>)
                k.seed = seed;
            else if constexpr (std::is_same_v<K, UnionSet>)
                for (auto& p : k.parts)
                    p = reseed(p, seed);
        },
        d.kind);
    return d;
}

void apply(const Overrides& o, TheoremInstance& inst) {
    if (!o.mu_grid.empty())
        inst.mu_grid = o.mu_grid;
    if (!o.radii.empty())
        inst.radii = o.radii;
    if (o.alpha) {
        if (!(*o.alpha > 1.0))
            throw Error(ErrorKind::invalid_parameter, "--alpha must be > 1");
        inst.alpha = o.alpha;
    }
    if (o.delta)
        inst.delta = *o.delta;
    if (o.epsilon)
        inst.epsilon = *o.epsilon;
    if (o.beta)
        inst.beta = o.beta;
    if (o.norm_budget)
        inst.norm_budget = o.norm_budget;
    if (o.gamma || o.growth_c) {
        Growth g = inst.growth.value_or(Growth{});
        if (o.gamma)
            g.gamma = *o.gamma;
        if (o.growth_c)
            g.C = *o.growth_c;
        inst.growth = g;
    }
    if (o.seed)
        inst.points = PointSet::from(reseed(inst.points.descriptor(), *o.seed));
}

TheoremInstance load(const Common& c, std::size_t i = 0) {
    auto inst = io::load_instance(c.inputs.at(i));
    apply(c.ov, inst);
    return inst;
}

void emit(const Common& c, const std::string& text) {
    if (c.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.output, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::invalid_input, "cannot write '" + c.output + "'");
    out << text;
}

std::string header_line(const json& params) { return "# params " + params.dump() + "\n"; }

json instance_header(const TheoremInstance& inst, BoundMode mode) {
    return {{"instance_id", inst.id},
            {"spectrum", io::to_json(inst.spectrum)},
            {"points", io::to_json(inst.points.descriptor())},
            {"params", io::effective_params(inst, mode)}};
}

BoundMode mode_for(const TheoremInstance& inst, const std::string& requested) {
    if (requested == "theorem1")
        return BoundMode::theorem1;
    if (requested == "theorem2")
        return BoundMode::theorem2;
    return inst.growth ? BoundMode::theorem2 : BoundMode::theorem1;
}

// --- subcommands -------------------------------------------------------------------

void run_spectrum(const Common& c) {
    const auto inst = load(c);
    const auto& s = inst.spectrum;
    if (c.format == "csv") {
        std::string out = "left,right,length\n";
        for (const auto& iv : s.intervals())
            out += num(iv.left) + "," + num(iv.right) + "," + num(iv.length()) + "\n";
        emit(c, out);
        return;
    }
    json j = {{"spectrum", io::to_json(s)},
              {"measure", s.measure()},
              {"lower", s.lower()},
              {"upper", s.upper()},
              {"symmetric", s.is_symmetric()},
              {"kernel_diagonal", s.measure() / (2.0 * pi)}};
    emit(c, j.dump(2) + "\n");
}

void run_density(const Common& c, const std::string& kind, const std::vector<double>& radii, double scan) {
    const auto inst = load(c);
    const BoundMode mode = kind == "star" ? BoundMode::theorem2 : BoundMode::theorem1;
    std::vector<double> rs = radii;
    if (rs.empty())
        rs = effective_density_radii(inst, mode);
    const auto est = mode == BoundMode::theorem1 ? upper_uniform_density(inst.points, rs, scan)
                                                 : upper_density(inst.points, rs);
    json params = {{"kind", kind}, {"radii", rs}, {"scan_spacing", scan}};
    if (c.format == "csv") {
        std::string out = header_line(params) + "radius,ratio,count,anchor\n";
        for (const auto& r : est.per_radius)
            out += num(r.radius) + "," + num(r.ratio) + "," + std::to_string(r.count) + "," + num(r.anchor) + "\n";
        emit(c, out);
        return;
    }
    json j = {{"instance_id", inst.id}, {"params", params}, {"separation", inst.points.separation()},
              {"points", inst.points.size()}, {"density", io::to_json(est)}};
    emit(c, j.dump(2) + "\n");
}

void run_interpolate(const Common& c, double center, double radius, bool certified) {
    const auto inst = load(c);
    std::string out;
    json params = {{"center", center}, {"radius", radius}, {"mu_grid", inst.mu_grid}, {"certified", certified}};
    if (certified) {
        params["kernel_span"] = inst.kernel_span;
        params["eval_span"] = inst.eval_span;
        params["norm_budget"] = inst.norm_budget.value_or(default_norm_budget(inst.spectrum));
        const auto cert = certify_window(inst.spectrum, inst.points, radius, center, inst.mu_grid, inst.kernel_span,
                                         inst.eval_span, budget_for(inst, BoundMode::theorem1));
        const double lo = cert.eval_points.front(), hi = cert.eval_points.back();
        if (c.format == "json") {
            json j = {{"instance_id", inst.id}, {"params", params}, {"certificate", io::to_json(cert)}};
            emit(c, j.dump(2) + "\n");
            return;
        }
        out = header_line(params) + "j,mu,residual_l2,norm_l2,window_lo,window_hi\n";
        for (const auto& e : cert.entries)
            out += std::to_string(e.label) + "," + num(e.mu) + "," + num(e.residual_l2) + "," + num(e.norm_l2) + "," +
                   num(lo) + "," + num(hi) + "\n";
        emit(c, out);
        return;
    }
    const auto w = inst.points.window(center, radius);
    const RidgeSolver solver(inst.spectrum, w.points);
    json rows = json::array();
    out = header_line(params) + "j,mu,residual_l2,norm_l2,window_lo,window_hi\n";
    for (std::size_t j = 0; j < w.count; ++j) {
        for (double mu : inst.mu_grid) {
            if (mu == 0.0 && solver.condition() > ill_conditioning_threshold)
                continue;
            const auto [f, rep] = solver.solve(j, mu);
            const long label = inst.points.label(w.first + j);
            out += std::to_string(label) + "," + num(mu) + "," + num(rep.residual_l2) + "," + num(rep.norm_l2) + "," +
                   num(rep.window_lo) + "," + num(rep.window_hi) + "\n";
            rows.push_back({{"j", label},
                            {"mu", mu},
                            {"residual_l2", rep.residual_l2},
                            {"norm_l2", rep.norm_l2},
                            {"window_lo", rep.window_lo},
                            {"window_hi", rep.window_hi}});
        }
    }
    if (c.format == "csv")
        emit(c, out);
    else
        emit(c, json({{"instance_id", inst.id}, {"params", params}, {"condition", solver.condition()}, {"rows", rows}})
                    .dump(2) +
                    "\n");
}

void run_verify(const Common& c, const std::string& mode_name, bool certificates) {
    std::vector<TheoremInstance> insts;
    for (std::size_t i = 0; i < c.inputs.size(); ++i)
        insts.push_back(load(c, i));
    std::vector<BoundReport> reports;
    json headers = json::array();
    for (const auto& inst : insts) {
        const BoundMode mode = mode_for(inst, mode_name);
        headers.push_back(instance_header(inst, mode));
        reports.push_back(verify(inst, mode));
    }
    if (c.format == "csv") {
        std::string out;
        for (const auto& h : headers)
            out += header_line(h);
        emit(c, out + io::sweep_csv(reports));
        return;
    }
    if (reports.size() == 1) {
        json j = headers[0];
        j["report"] = io::to_json(reports[0], certificates);
        emit(c, j.dump(2) + "\n");
        return;
    }
    json arr = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        json j = headers[i];
        j["report"] = io::to_json(reports[i], certificates);
        arr.push_back(j);
    }
    emit(c, arr.dump(2) + "\n");
}

void run_pipeline(const Common& c, const std::string& mode_name, double center, std::vector<double> radii) {
    const auto inst = load(c);
    const BoundMode mode = mode_for(inst, mode_name);
    if (radii.empty())
        radii = inst.radii;
    json header = instance_header(inst, mode);
    header["params"]["pipeline_radii"] = radii;
    header["params"]["pipeline_center"] = mode == BoundMode::theorem2 ? 0.0 : center;
    std::vector<PipelineReport> reps;
    for (double r : radii)
        reps.push_back(run_proof_pipeline(inst, r, center, mode));
    if (c.format == "csv") {
        std::string out = header_line(header) +
                          "radius,d,alpha,dim,measured_bound,concentration,landau_slack,emitted_lower_bound,"
                          "display_bound,mes_S_delta,all_ok\n";
        for (const auto& p : reps)
            out += num(p.radius) + "," + num(p.d) + "," + num(p.alpha) + "," + std::to_string(p.dim) + "," +
                   num(p.measured_bound) + "," + num(p.concentration) + "," + num(p.landau.slack) + "," +
                   num(p.emitted_lower_bound) + "," + num(p.display_bound) + "," + num(p.mes_s_delta) + "," +
                   (p.all_ok() ? "1" : "0") + "\n";
        emit(c, out);
        return;
    }
    json arr = json::array();
    for (const auto& p : reps)
        arr.push_back(io::to_json(p));
    header["stages"] = arr;
    emit(c, header.dump(2) + "\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paley-Wiener interpolation errors and density bounds"};
    app.require_subcommand(1);

    Common common;

    auto* spectrum = app.add_subcommand("spectrum", "Normalize and describe the spectrum of an instance");
    add_common(spectrum, common);

    auto* density = app.add_subcommand("density", "Estimate D+ (sliding windows) or D* (centered windows)");
    add_common(density, common);
    std::string density_kind = "plus";
    std::vector<double> density_radii;
    double scan = 0.0;
    density->add_option("--kind", density_kind, "plus or star")->check(CLI::IsMember({"plus", "star"}));
    density->add_option("--window-radii", density_radii, "Window lengths (D+) or radii (D*)");
    density->add_option("--scan-spacing", scan, "Grid spacing for D+ (0 = exact sweep)")->check(CLI::NonNegativeNumber);

    auto* interpolate = app.add_subcommand("interpolate", "Ridge interpolants for every point of a window");
    add_common(interpolate, common);
    double center = 0.0, radius = 25.0;
    bool certified = false;
    interpolate->add_option("--center", center, "Window center");
    interpolate->add_option("--radius", radius, "Window radius")->check(CLI::PositiveNumber);
    interpolate->add_flag("--certified", certified, "Emit the harness certificates instead of plain ridge rows");

    auto* sharp = app.add_subcommand("sharp", "Closed-form example S = [-a, a], Lambda = Z");
    double sharp_a = pi / 2;
    std::size_t sharp_n = 10000;
    std::string sharp_out, sharp_format = "json";
    sharp->add_option("--a", sharp_a, "Half-width a in (0, pi)")->check(CLI::Range(0.0, pi));
    sharp->add_option("--n", sharp_n, "Series terms N >= 100")->check(CLI::Range(std::size_t{100}, std::size_t{1} << 40));
    sharp->add_option("-o,--output", sharp_out, "Output path");
    sharp->add_option("-f,--format", sharp_format, "Report format")->check(CLI::IsMember({"json", "csv"}));

    auto* width = app.add_subcommand("width", "Extract a well-conditioned subspace from a perturbed family");
    std::string width_in, width_out, basis_out, width_format = "json";
    double width_d = 0.0, width_alpha = 0.0;
    width->add_option("-i,--input", width_in, "Matrix file (CSV or binary dump), column j = v_j")
        ->required()
        ->check(CLI::ExistingFile);
    width->add_option("-d,--d", width_d, "Perturbation level d in [0, 1)")->required()->check(CLI::Range(0.0, 1.0));
    width->add_option("--alpha", width_alpha, "alpha in (1, 1/d); default 1 + (1/d - 1)/2");
    width->add_option("-o,--output", width_out, "Report path");
    width->add_option("--basis-out", basis_out, "Write the subspace basis as a binary dump");
    width->add_option("-f,--format", width_format, "Report format")->check(CLI::IsMember({"json", "csv"}));

    auto* concentration = app.add_subcommand("concentration", "Eigenvalues of the time-band limiting operator");
    add_common(concentration, common);
    std::vector<double> region;
    std::size_t nodes = 512;
    concentration->add_option("--region", region, "Q as l1 r1 [l2 r2 ...]")->required();
    concentration->add_option("--nodes", nodes, "Total quadrature nodes")->check(CLI::Range(32, 1 << 16));

    auto* verify = app.add_subcommand("verify", "Bound report for one or more instances");
    add_common(verify, common, true);
    std::string mode_name = "auto";
    bool certificates = false;
    verify->add_option("--mode", mode_name, "auto, theorem1 or theorem2")
        ->check(CLI::IsMember({"auto", "theorem1", "theorem2"}));
    verify->add_flag("--certificates", certificates, "Include per-point certificates");

    auto* pipeline = app.add_subcommand("pipeline", "Run the finite-window proof pipeline");
    add_common(pipeline, common);
    std::vector<double> pipeline_radii;
    pipeline->add_option("--mode", mode_name, "auto, theorem1 or theorem2")
        ->check(CLI::IsMember({"auto", "theorem1", "theorem2"}));
    pipeline->add_option("--center", center, "Window center (Theorem 1 mode)");
    pipeline->add_option("--at-radii", pipeline_radii, "Radii to run (default: instance radii)");

    auto* window = app.add_subcommand("window", "Plot data for the Fejer or product window");
    std::string window_kind = "fejer", window_out;
    double window_delta = 0.05, window_beta = 0.5, x_max = 400.0;
    std::size_t samples = 2001;
    window->add_option("--kind", window_kind, "fejer or psi")->check(CLI::IsMember({"fejer", "psi"}));
    window->add_option("--delta", window_delta, "Bandwidth")->check(CLI::PositiveNumber);
    window->add_option("--beta", window_beta, "Decay exponent (psi)")->check(CLI::Range(0.0, 1.0));
    window->add_option("--x-max", x_max, "Grid half-length")->check(CLI::PositiveNumber);
    window->add_option("--samples", samples, "Grid points")->check(CLI::Range(16, 1 << 24));
    window->add_option("-o,--output", window_out, "Output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (spectrum->parsed()) {
            run_spectrum(common);
        } else if (density->parsed()) {
            run_density(common, density_kind, density_radii, scan);
        } else if (interpolate->parsed()) {
            run_interpolate(common, center, radius, certified);
        } else if (sharp->parsed()) {
            const auto rep = sharp_example(sharp_a, sharp_n);
            Common c;
            c.output = sharp_out;
            if (sharp_format == "csv") {
                emit(c, header_line({{"a", sharp_a}, {"n", sharp_n}}) +
                            "a,n,error_sq,target,deviation,tolerance,sharpness_ratio\n" + num(rep.a) + "," +
                            std::to_string(rep.n_terms) + "," + num(rep.error_sq) + "," + num(rep.target) + "," +
                            num(rep.deviation) + "," + num(rep.tolerance) + "," + num(rep.sharpness_ratio) + "\n");
            } else {
                emit(c, json({{"params", {{"a", sharp_a}, {"n", sharp_n}}}, {"report", io::to_json(rep)}}).dump(2) +
                            "\n");
            }
            return rep.pass ? 0 : 1;
        } else if (width->parsed()) {
            const CMatrix t1 = io::load_matrix(width_in);
            const double alpha = width_alpha > 0.0 ? width_alpha : default_alpha(width_d);
            const auto res = extract_subspace(t1, width_d, alpha);
            Common c;
            c.output = width_out;
            json params = {{"d", width_d}, {"alpha", alpha}, {"n", res.n}};
            if (width_format == "csv") {
                std::string out = header_line(params) + "index,s_t1,s_t2\n";
                for (Eigen::Index k = 0; k < res.t1_values.size(); ++k)
                    out += std::to_string(k + 1) + "," + num(res.t1_values[k]) + "," + num(res.t2_values[k]) + "\n";
                emit(c, out);
            } else {
                emit(c, json({{"params", params},
                              {"dim", res.dim},
                              {"certified_bound", res.certified_bound},
                              {"measured_bound", res.measured_bound},
                              {"stated_constant", res.stated_constant},
                              {"stated_constant_met", res.stated_constant_met},
                              {"max_perturbation", res.max_perturbation},
                              {"t2_profile_ok", res.t2_profile_ok},
                              {"span_rank", res.span_rank}})
                                .dump(2) +
                            "\n");
            }
            if (!basis_out.empty()) {
                std::ofstream b(basis_out, std::ios::binary);
                b << io::matrix_dump(res.subspace_basis, io::ScalarKind::complex128);
            }
        } else if (concentration->parsed()) {
            if (region.size() < 2 || region.size() % 2 != 0)
                throw Error(ErrorKind::invalid_parameter, "--region needs pairs l r");
            std::vector<Interval> q;
            for (std::size_t i = 0; i < region.size(); i += 2)
                q.push_back({region[i], region[i + 1]});
            const auto inst = load(common);
            ConcentrationOptions opts;
            opts.n_nodes = nodes;
            const auto rep = concentration_operator(inst.spectrum, Spectrum::normalize(q), opts);
            json params = {{"region", io::to_json(rep.region)}, {"nodes", nodes}};
            if (common.format == "csv") {
                std::string out = header_line(params) + "index,lambda\n";
                for (Eigen::Index k = 0; k < rep.eigenvalues.size(); ++k)
                    out += std::to_string(k + 1) + "," + num(rep.eigenvalues[k]) + "\n";
                emit(common, out);
            } else {
                json j = io::to_json(rep);
                json checks = json::array();
                for (int k = 1; k <= 9; ++k) {
                    const double cl = 0.1 * k;
                    checks.push_back({{"c", cl},
                                      {"count", rep.count_at_least(cl)},
                                      {"bound", rep.landau_bound(cl)},
                                      {"pass", static_cast<double>(rep.count_at_least(cl)) <= rep.landau_bound(cl)}});
                }
                j["params"] = params;
                j["bound_checks"] = checks;
                emit(common, j.dump(2) + "\n");
            }
        } else if (verify->parsed()) {
            run_verify(common, mode_name, certificates);
        } else if (pipeline->parsed()) {
            run_pipeline(common, mode_name, center, pipeline_radii);
        } else if (window->parsed()) {
            Common c;
            c.output = window_out;
            std::string out = header_line({{"kind", window_kind},
                                           {"delta", window_delta},
                                           {"beta", window_beta},
                                           {"x_max", x_max},
                                           {"samples", samples}});
            const double h = 2.0 * x_max / static_cast<double>(samples - 1);
            if (window_kind == "fejer") {
                const FejerWindow w(window_delta);
                out += "x,phi\n";
                for (std::size_t k = 0; k < samples; ++k) {
                    const double x = -x_max + static_cast<double>(k) * h;
                    out += num(x) + "," + num(w(x)) + "\n";
                }
            } else {
                const ProductWindow w(window_delta, window_beta);
                const auto fit = fit_decay(w, std::min(10.0, 0.05 * x_max), x_max);
                out += "x,psi,envelope\n";
                for (std::size_t k = 0; k < samples; ++k) {
                    const double x = -x_max + static_cast<double>(k) * h;
                    out += num(x) + "," + num(w(x)) + "," + num(fit.envelope(x)) + "\n";
                }
            }
            emit(c, out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::no_bound ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
