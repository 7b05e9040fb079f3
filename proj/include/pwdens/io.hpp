#pragma once

// Instance files, reports and matrix dumps. Depends on nlohmann/json; the
// numerical headers do not.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pwdens/concentration.hpp"
#include "pwdens/error.hpp"
#include "pwdens/harness.hpp"
#include "pwdens/pointset.hpp"
#include "pwdens/spectrum.hpp"

namespace pwdens::io {

using json = nlohmann::ordered_json;

/// Shortest round-trip text for a double.
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string cell(cplx v) {
    if (v.imag() == 0.0)
        return num(v.real());
    return num(v.real()) + (std::signbit(v.imag()) ? "" : "+") + num(v.imag()) + "j";
}

// --- schema helpers -------------------------------------------------------------

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::schema, "field '" + path + "': " + what);
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object())
        schema_error(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        schema_error(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

inline double number(const json& v, const std::string& path) {
    if (!v.is_number())
        schema_error(path, "expected a number, got " + std::string(v.type_name()));
    return v.get<double>();
}

inline std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array())
        schema_error(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::pair<double, double> range(const json& v, const std::string& path) {
    const auto r = numbers(v, path);
    if (r.size() != 2)
        schema_error(path, "expected [lo, hi]");
    return {r[0], r[1]};
}

} // namespace detail

inline Spectrum parse_spectrum(const json& v, const std::string& path = "spectrum") {
    if (!v.is_array() || v.empty())
        detail::schema_error(path, "expected a nonempty array of [left, right] pairs");
    std::vector<Interval> raw;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const auto [l, r] = detail::range(v[i], p);
        if (!(l < r))
            throw Error(ErrorKind::invalid_spectrum,
                        p + " = [" + num(l) + ", " + num(r) + "]: left endpoint must be < right");
        raw.push_back({l, r});
    }
    return Spectrum::normalize(std::move(raw));
}

inline PointDescriptor parse_points(const json& v, const std::string& path = "points") {
    const auto& kind_v = detail::field(v, "kind", path);
    if (!kind_v.is_string())
        detail::schema_error(path + ".kind", "expected a string");
    const auto kind = kind_v.get<std::string>();
    auto num_field = [&](const char* key) { return detail::number(detail::field(v, key, path), path + "." + key); };
    if (kind == "arithmetic") {
        const auto [lo, hi] = detail::range(detail::field(v, "range", path), path + ".range");
        const double offset = v.contains("offset") ? detail::number(v["offset"], path + ".offset") : 0.0;
        return {ArithmeticSet{num_field("step"), offset, lo, hi}};
    }
    if (kind == "explicit")
        return {ExplicitSet{detail::numbers(detail::field(v, "values", path), path + ".values")}};
    if (kind == "jitter") {
        const auto [lo, hi] = detail::range(detail::field(v, "range", path), path + ".range");
        const auto& seed = detail::field(v, "seed", path);
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
            detail::schema_error(path + ".seed", "expected a nonnegative integer");
        return {JitterSet{num_field("step"), num_field("max_jitter"), seed.get<std::uint64_t>(), lo, hi}};
    }
    if (kind == "union") {
        const auto& parts = detail::field(v, "parts", path);
        if (!parts.is_array() || parts.empty())
            detail::schema_error(path + ".parts", "expected a nonempty array");
        UnionSet u;
        for (std::size_t i = 0; i < parts.size(); ++i)
            u.parts.push_back(parse_points(parts[i], path + ".parts[" + std::to_string(i) + "]"));
        return {u};
    }
    detail::schema_error(path + ".kind", "unknown kind '" + kind + "' (arithmetic, explicit, jitter, union)");
}

inline json to_json(const Spectrum& s) {
    json out = json::array();
    for (const auto& iv : s.intervals())
        out.push_back({iv.left, iv.right});
    return out;
}

inline json to_json(const PointDescriptor& d) {
    return std::visit(
        [](const auto& k) -> json {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ArithmeticSet>)
                return {{"kind", "arithmetic"}, {"step", k.step}, {"offset", k.offset}, {"range", {k.lo, k.hi}}};
            else if constexpr (std::is_same_v<K, ExplicitSet>)
                return {{"kind", "explicit"}, {"values", k.values}};
            else if constexpr (std::is_same_v<K, JitterSet>)
                return {{"kind", "jitter"},
                        {"step", k.step},
                        {"max_jitter", k.max_jitter},
                        {"seed", k.seed},
                        {"range", {k.lo, k.hi}}};
            else {
                json parts = json::array();
                for (const auto& p : k.parts)
                    parts.push_back(to_json(p));
                return {{"kind", "union"}, {"parts", parts}};
            }
        },
        d.kind);
}

/// Reads an instance document. Parameters not given keep their defaults.
inline TheoremInstance parse_instance(const json& doc, std::string id = {}) {
    if (!doc.is_object())
        detail::schema_error("", "instance must be a JSON object");
    TheoremInstance inst;
    inst.id = doc.contains("id") && doc["id"].is_string() ? doc["id"].get<std::string>() : std::move(id);
    inst.spectrum = parse_spectrum(detail::field(doc, "spectrum", ""));
    inst.points = PointSet::from(parse_points(detail::field(doc, "points", "")));
    if (!doc.contains("params"))
        return inst;
    const auto& p = doc["params"];
    if (!p.is_object())
        detail::schema_error("params", "expected an object");
    auto opt = [&](const char* key) -> const json* {
        auto it = p.find(key);
        return it == p.end() || it->is_null() ? nullptr : &*it;
    };
    const std::string pp = "params.";
    if (auto v = opt("alpha"))
        inst.alpha = detail::number(*v, pp + "alpha");
    if (auto v = opt("delta"))
        inst.delta = detail::number(*v, pp + "delta");
    if (auto v = opt("epsilon"))
        inst.epsilon = detail::number(*v, pp + "epsilon");
    if (auto v = opt("mu_grid"))
        inst.mu_grid = detail::numbers(*v, pp + "mu_grid");
    if (auto v = opt("radii"))
        inst.radii = detail::numbers(*v, pp + "radii");
    if (auto v = opt("centers"))
        inst.centers = detail::numbers(*v, pp + "centers");
    if (auto v = opt("density_radii"))
        inst.density_radii = detail::numbers(*v, pp + "density_radii");
    if (auto v = opt("norm_budget"))
        inst.norm_budget = detail::number(*v, pp + "norm_budget");
    if (auto v = opt("beta"))
        inst.beta = detail::number(*v, pp + "beta");
    if (auto v = opt("kernel_span"))
        inst.kernel_span = detail::number(*v, pp + "kernel_span");
    if (auto v = opt("eval_span"))
        inst.eval_span = detail::number(*v, pp + "eval_span");
    if (auto v = opt("growth")) {
        Growth g;
        g.C = detail::number(detail::field(*v, "C", pp + "growth"), pp + "growth.C");
        g.gamma = detail::number(detail::field(*v, "gamma", pp + "growth"), pp + "growth.gamma");
        inst.growth = g;
    }
    return inst;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::invalid_input, "cannot open '" + path + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports "at line L, column C" in its message.
        throw Error(ErrorKind::schema, path + ": " + e.what());
    }
}

inline TheoremInstance load_instance(const std::string& path) {
    auto stem = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
    if (auto dot = stem.rfind('.'); dot != std::string::npos)
        stem.resize(dot);
    return parse_instance(read_json_file(path), stem);
}

/// Effective parameters with every default resolved.
inline json effective_params(const TheoremInstance& inst, BoundMode mode) {
    json p;
    p["mode"] = std::string(to_string(mode));
    p["mu_grid"] = inst.mu_grid;
    p["radii"] = inst.radii;
    p["centers"] = effective_centers(inst, mode);
    p["density_radii"] = effective_density_radii(inst, mode);
    p["alpha"] = inst.alpha ? json(*inst.alpha) : json("1 + (1/d_hat - 1)/2");
    p["delta"] = inst.delta;
    p["epsilon"] = inst.epsilon;
    p["kernel_span"] = inst.kernel_span;
    p["eval_span"] = inst.eval_span;
    if (mode == BoundMode::theorem2) {
        p["growth"] = {{"C", inst.growth->C}, {"gamma", inst.growth->gamma}};
        p["beta"] = effective_beta(inst);
    } else {
        p["growth"] = nullptr;
        p["norm_budget"] = inst.norm_budget.value_or(default_norm_budget(inst.spectrum));
    }
    return p;
}

// --- reports --------------------------------------------------------------------

inline json to_json(const DensityEstimate& d) {
    json rows = json::array();
    for (const auto& r : d.per_radius)
        rows.push_back({{"radius", r.radius}, {"ratio", r.ratio}, {"count", r.count}, {"anchor", r.anchor}});
    return {{"kind", d.kind == DensityKind::upper_uniform ? "D+" : "D*"},
            {"value", d.value},
            {"exact", d.exact},
            {"per_radius", rows}};
}

inline json to_json(const WindowCertificate& c) {
    json entries = json::array();
    for (const auto& e : c.entries)
        entries.push_back({{"node", e.node},
                           {"label", e.label},
                           {"mu", e.mu},
                           {"residual_l2", e.residual_l2},
                           {"norm_l2", e.norm_l2},
                           {"budget", e.budget}});
    return {{"radius", c.radius},
            {"center", c.center},
            {"kernel_nodes", c.kernel_nodes.size()},
            {"eval_points", c.eval_points.size()},
            {"eval_truncated", c.eval_truncated},
            {"d_hat", c.d_hat},
            {"d_hat_all", c.d_hat_all},
            {"norm_sup", c.norm_sup},
            {"entries", entries}};
}

inline json to_json(const BoundReport& r, bool with_certificates = false) {
    json rows = json::array();
    for (const auto& row : r.per_radius)
        rows.push_back({{"radius", row.radius},
                        {"d_hat", row.d_hat},
                        {"d_hat_all", row.d_hat_all},
                        {"norm_sup", row.norm_sup},
                        {"rhs", row.rhs},
                        {"slack", row.slack},
                        {"sharpness_ratio", row.sharpness_ratio},
                        {"certified", row.certified}});
    json out = {{"instance_id", r.instance_id},
                {"mode", std::string(to_string(r.mode))},
                {"spectrum", to_json(r.spectrum)},
                {"mes_S", r.mes_s},
                {"d_hat", r.d_hat},
                {"d_hat_all", r.d_hat_all},
                {"norm_sup", r.norm_sup},
                {"norm_budget", r.norm_budget},
                {"density", to_json(r.density)},
                {"rhs", r.rhs},
                {"slack", r.slack},
                {"sharpness_ratio", r.sharpness_ratio},
                {"eval_truncated", r.eval_truncated},
                {"per_radius", rows}};
    if (with_certificates) {
        json certs = json::array();
        for (const auto& c : r.certificates)
            certs.push_back(to_json(c));
        out["certificates"] = certs;
    }
    return out;
}

inline json to_json(const SharpReport& s) {
    return {{"a", s.a},
            {"n_terms", s.n_terms},
            {"series", s.series},
            {"error_sq", s.error_sq},
            {"target", s.target},
            {"deviation", s.deviation},
            {"identity_target", s.identity_target},
            {"identity_deviation", s.identity_deviation},
            {"tolerance", s.tolerance},
            {"density", s.density.value},
            {"sharpness_ratio", s.sharpness_ratio},
            {"pass", s.pass}};
}

inline json to_json(const PipelineReport& p) {
    return {{"mode", std::string(to_string(p.mode))},
            {"radius", p.radius},
            {"center", p.center},
            {"delta", p.delta},
            {"epsilon", p.epsilon},
            {"alpha", p.alpha},
            {"beta", p.beta},
            {"window_points", p.window_points},
            {"d", p.d},
            {"norm_sup", p.norm_sup},
            {"max_perturbation", p.max_perturbation},
            {"precondition_ok", p.precondition_ok},
            {"dim", p.dim},
            {"certified_bound", p.certified_bound},
            {"measured_bound", p.measured_bound},
            {"subspace_ok", p.subspace_ok},
            {"stated_constant_met", p.stated_constant_met},
            {"t2_profile_ok", p.t2_profile_ok},
            {"synthesis_constant", p.synthesis_constant},
            {"frame_constant", p.frame_constant},
            {"synthesis_ok", p.synthesis_ok},
            {"concentration", p.concentration},
            {"epsilon_met", p.epsilon_met},
            {"mes_Q", p.mes_q},
            {"mes_S_delta", p.mes_s_delta},
            {"landau_bound", p.landau.bound},
            {"landau_slack", p.landau.slack},
            {"landau_pass", p.landau.pass},
            {"emitted_lower_bound", p.emitted_lower_bound},
            {"display_bound", p.display_bound},
            {"emitted_ok", p.emitted_ok},
            {"all_ok", p.all_ok()}};
}

inline json to_json(const ConcentrationReport& c) {
    return {{"spectrum", to_json(c.spectrum)},
            {"region", to_json(c.region)},
            {"nodes", c.rule.size()},
            {"trace", c.trace},
            {"trace_expected", c.trace_expected},
            {"trace_relative_error", c.trace_relative_error()},
            {"eigenvalues_in_unit_range", c.eigenvalues_in_unit_range()}};
}

inline std::string sweep_csv(const std::vector<BoundReport>& reports) {
    std::string out = "instance_id,mes_S,d_hat,norm_sup,density,rhs,slack,sharpness_ratio,mode\n";
    for (const auto& r : reports)
        out += r.instance_id + "," + num(r.mes_s) + "," + num(r.d_hat) + "," + num(r.norm_sup) + "," +
               num(r.density.value) + "," + num(r.rhs) + "," + num(r.slack) + "," + num(r.sharpness_ratio) + "," +
               std::string(to_string(r.mode)) + "\n";
    return out;
}

// --- matrices -------------------------------------------------------------------

inline std::string matrix_csv(const CMatrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j)
                out += ',';
            out += cell(m(i, j));
        }
        out += '\n';
    }
    return out;
}

inline cplx parse_cell(const std::string& s) {
    const char* p = s.c_str();
    char* end = nullptr;
    const double re = std::strtod(p, &end);
    if (end == p)
        throw Error(ErrorKind::invalid_input, "bad matrix cell '" + s + "'");
    if (*end == '\0')
        return {re, 0.0};
    const char* q = end;
    const double im = std::strtod(q, &end);
    if (end == q || *end != 'j' || end[1] != '\0')
        throw Error(ErrorKind::invalid_input, "bad matrix cell '" + s + "'");
    return {re, im};
}

inline CMatrix parse_matrix_csv(const std::string& text) {
    std::vector<std::vector<cplx>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<cplx> row;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ','))
            row.push_back(parse_cell(c));
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(ErrorKind::invalid_input, "ragged matrix CSV at row " + std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
    }
    CMatrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

/// Binary dump: "PWDM", rows, cols, kind (u32 LE; kind 1 = float64, 2 = complex128),
/// then column-major values.
enum class ScalarKind : std::uint32_t { real64 = 1, complex128 = 2 };

namespace detail {
inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
inline void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}
inline double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i)
        bits = bits << 8 | p[i];
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
} // namespace detail

inline std::string matrix_dump(const CMatrix& m, ScalarKind kind) {
    std::string out = "PWDM";
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    detail::put_u32(out, static_cast<std::uint32_t>(kind));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            detail::put_f64(out, m(i, j).real());
            if (kind == ScalarKind::complex128)
                detail::put_f64(out, m(i, j).imag());
        }
    }
    return out;
}

inline CMatrix parse_matrix_dump(const std::string& bytes) {
    if (bytes.size() < 16 || bytes.compare(0, 4, "PWDM") != 0)
        throw Error(ErrorKind::invalid_input, "matrix dump: bad header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const auto rows = detail::get_u32(p + 4);
    const auto cols = detail::get_u32(p + 8);
    const auto kind = detail::get_u32(p + 12);
    if (kind != 1 && kind != 2)
        throw Error(ErrorKind::invalid_input, "matrix dump: unknown scalar kind " + std::to_string(kind));
    const std::size_t width = kind == 1 ? 8 : 16;
    if (bytes.size() != 16 + std::size_t(rows) * cols * width)
        throw Error(ErrorKind::invalid_input, "matrix dump: size does not match header");
    CMatrix m(rows, cols);
    const unsigned char* q = p + 16;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double re = detail::get_f64(q);
            const double im = kind == 2 ? detail::get_f64(q + 8) : 0.0;
            m(i, j) = {re, im};
            q += width;
        }
    }
    return m;
}

inline CMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::invalid_input, "cannot open '" + path + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.rfind("PWDM", 0) == 0)
        return parse_matrix_dump(bytes);
    return parse_matrix_csv(bytes);
}

} // namespace pwdens::io
