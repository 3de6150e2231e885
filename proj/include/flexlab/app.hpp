#pragma once
// Command implementations behind the flexlab executable. Kept in a header so
// tests can drive every command in-process.
//
// Exit codes: 0 success, 2 parse, 3 bad flex input, 4 invalid curve,
// 5 bad surface grid, 6 continuation failure.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flexlab/core.hpp"
#include "flexlab/exact.hpp"
#include "flexlab/flex_hierarchy.hpp"
#include "flexlab/io.hpp"
#include "flexlab/numerics.hpp"
#include "flexlab/rigidity.hpp"
#include "flexlab/smooth_surface.hpp"
#include "flexlab/tangency.hpp"

namespace flexlab::app {

using io::json;

enum ExitCode : int {
    kOk = 0,
    kParse = 2,
    kBadFlex = 3,
    kInvalidCurve = 4,
    kBadGrid = 5,
    kContinuation = 6,
};

/// Any failure that maps to a specific exit code.
class CommandError : public std::runtime_error {
public:
    CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

struct Options {
    std::string command;
    std::string input;
    std::size_t order = 2;
    std::optional<std::size_t> flex_index;
    std::string flex_file;
    std::size_t steps = 5;
    double h = 1e-3;
    bool json_output = false;
    std::string csv_path;
    std::string output_path;
    std::string batch_dir;
    bool exact = false;
    TolerancePolicy policy;
};

inline TolerancePolicy parse_tolerance(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw CommandError(kParse, "--tol expects rel:abs, got \"" + spec + "\"");
    TolerancePolicy p;
    try {
        p.rel_tol = std::stod(spec.substr(0, colon));
        p.abs_tol = std::stod(spec.substr(colon + 1));
    } catch (const std::exception&) {
        throw CommandError(kParse, "--tol expects two numbers rel:abs, got \"" + spec + "\"");
    }
    if (!(p.rel_tol > 0.0) || !(p.abs_tol >= 0.0)) throw CommandError(kParse, "--tol values must be positive");
    return p;
}

// ------------------------------------------------------------ report pieces

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json policy_json(const TolerancePolicy& p) {
    return {{"rel_tol", p.rel_tol}, {"abs_tol", p.abs_tol}, {"solve_rel_tol", p.solve_rel_tol}, {"marginal_gap", p.marginal_gap}};
}

inline json judgment_json(const ToleranceJudgment& j) {
    return {{"rank", j.rank},
            {"singular_values", j.singular_values},
            {"threshold_used", j.threshold_used},
            {"gap_ratio", finite_or_null(j.gap_ratio)},
            {"marginal", j.marginal}};
}

inline json flex_space_json(const FlexSpaceReport& r) {
    json basis = json::array();
    for (const auto& f : r.nontrivial_basis) basis.push_back(io::to_json(f));
    return {{"classification", r.nonrigid() ? "first-order nonrigid" : "first-order rigid"},
            {"total_flex_dim", r.total_flex_dim},
            {"trivial_dim", r.trivial_dim},
            {"nontrivial_dim", r.nontrivial_dim},
            {"nontrivial_basis", basis},
            {"judgment", judgment_json(r.judgment)}};
}

inline json stress_space_json(const StressSpace& s) {
    json list = json::array();
    for (const auto& w : s.stresses) list.push_back(w.weights);
    return {{"dimension", s.dimension()}, {"stresses", list}, {"judgment", judgment_json(s.judgment)}};
}

inline std::string fmt(double x, int digits = 6) {
    std::ostringstream ss;
    ss << std::setprecision(digits) << x;
    return ss.str();
}

inline std::string vec_text(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
    return s + "]";
}

inline std::string field_text(const FlexField<double>& f) {
    std::string s;
    for (std::size_t v = 0; v < f.size(); ++v) {
        s += "    v" + std::to_string(v) + ": " + vec_text({f[v][0], f[v][1], f[v][2]}) + "\n";
    }
    return s;
}

/// Output of one command run: human text, JSON report, and exit code.
struct Outcome {
    int code = kOk;
    std::string text;
    json report;
    std::string diagnostics;  // human notes that must stay off stdout
};

// ------------------------------------------------------------ input helpers

inline io::FrameworkInput load_framework(const io::Document& doc) {
    if (io::classify(doc.value) != io::DocumentKind::Framework) {
        throw io::ParseError(doc.source + ": expected a framework document");
    }
    return io::framework_from_json(doc.value);
}

inline void record_marginal(json& report, const ToleranceJudgment& j, const std::string& what) {
    if (j.marginal) {
        report["warnings"].push_back("marginal rank decision in " + what + " (gap ratio " + fmt(j.gap_ratio) +
                                     " below threshold)");
    }
}

inline void write_csv(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CommandError(kParse, "cannot write " + path);
    out << header << '\n';
    for (const auto& r : rows) out << r << '\n';
}

inline std::string csv_number(double x) {
    std::ostringstream ss;
    ss << std::setprecision(17) << x;
    return ss.str();
}

// ------------------------------------------------------------ commands

inline Outcome cmd_analyze(const io::Document& doc, const Options& opt) {
    const auto in = load_framework(doc);
    const auto& c = in.configuration;
    const FlexSpaceReport flex = first_order_flex_space(c, opt.policy);
    const StressSpace stress = equilibrium_stress_space(c, opt.policy);

    Outcome out;
    out.report["framework"] = {{"vertex_count", c.vertex_count()}, {"edge_count", c.framework().edge_count()}};
    out.report["flex_space"] = flex_space_json(flex);
    out.report["stress_space"] = stress_space_json(stress);
    record_marginal(out.report, flex.judgment, "rigidity operator");

    std::ostringstream t;
    t << "framework: " << c.vertex_count() << " vertices, " << c.framework().edge_count() << " edges\n";
    t << "rigidity operator rank " << flex.judgment.rank << " (threshold " << fmt(flex.judgment.threshold_used)
      << ", gap ratio " << fmt(flex.judgment.gap_ratio) << ")\n";
    t << "flex space: total " << flex.total_flex_dim << ", trivial " << flex.trivial_dim << ", nontrivial "
      << flex.nontrivial_dim << "\n";
    for (std::size_t k = 0; k < flex.nontrivial_basis.size(); ++k) {
        t << "  nontrivial flex " << k << ":\n" << field_text(flex.nontrivial_basis[k]);
    }
    for (std::size_t k = 0; k < stress.stresses.size(); ++k) {
        t << "  stress " << k << ": " << vec_text(stress.stresses[k].weights) << "\n";
    }
    if (opt.exact) {
        const auto m = rigidity_matrix_exact(to_rational(c));
        const std::size_t rank = exact_rank(m);
        const bool agree = rank == flex.judgment.rank;
        out.report["exact"] = {{"rank", rank},
                               {"nontrivial_dim", 3 * c.vertex_count() - rank - flex.trivial_dim},
                               {"stress_dim", c.framework().edge_count() - rank},
                               {"agrees_with_floating_point", agree}};
        t << "exact rank " << rank << (agree ? " (agrees)" : " (DISAGREES with floating point)") << "\n";
        if (!agree) out.report["warnings"].push_back("exact and floating-point ranks disagree");
    }
    t << (flex.nonrigid() ? "first-order nonrigid" : "first-order rigid") << ", nontrivial flex dim "
      << flex.nontrivial_dim << ", stress dim " << stress.dimension() << "\n";
    out.text = t.str();
    return out;
}

inline FlexField<double> select_flex(const io::FrameworkInput& in, const FlexSpaceReport& flex, const Options& opt) {
    if (!opt.flex_file.empty()) {
        auto f = io::flex_from_json(io::parse_text(io::read_file(opt.flex_file)));
        if (f.size() != in.configuration.vertex_count()) {
            throw CommandError(kBadFlex, "flex field has " + std::to_string(f.size()) + " vectors for " +
                                             std::to_string(in.configuration.vertex_count()) + " vertices");
        }
        return f;
    }
    if (!opt.flex_index && in.flex) return *in.flex;
    const std::size_t k = opt.flex_index.value_or(0);
    if (flex.nontrivial_dim == 0) throw CommandError(kBadFlex, "no nontrivial flex to follow");
    if (k >= flex.nontrivial_dim) {
        throw CommandError(kBadFlex, "flex index " + std::to_string(k) + " out of range (nontrivial dim " +
                                         std::to_string(flex.nontrivial_dim) + ")");
    }
    return flex.nontrivial_basis[k];
}

inline Outcome cmd_extend(const io::Document& doc, const Options& opt) {
    const auto in = load_framework(doc);
    const auto& c = in.configuration;
    const FlexSpaceReport flex = first_order_flex_space(c, opt.policy);
    const FlexField<double> xi1 = select_flex(in, flex, opt);
    if (opt.order < 1) throw CommandError(kParse, "--order must be at least 1");

    GreedyExtension g;
    try {
        g = extend_greedily(c, xi1, opt.order, opt.policy);
    } catch (const PreconditionError& e) {
        throw CommandError(kBadFlex, std::string("flex rejected: ") + e.what());
    }

    Outcome out;
    const auto residuals = hierarchy_residuals(c, g.jet, g.jet.order());
    json jet = json::array();
    for (const auto& f : g.jet.fields()) jet.push_back(io::to_json(f));
    json res = json::array();
    for (const auto& r : residuals.per_order) res.push_back({{"order", r.order}, {"norm", r.norm}});
    json ext = {{"requested_order", opt.order},
                {"reached_order", g.jet.order()},
                {"status", g.reached() ? "extended" : "obstructed"},
                {"jet", jet},
                {"residuals", res},
                {"precondition_gate", precondition_gate(c)}};
    std::ostringstream t;
    t << "flex space: nontrivial dim " << flex.nontrivial_dim << "\n";
    for (const auto& r : residuals.per_order) t << "  order " << r.order << " residual " << fmt(r.norm) << "\n";
    if (g.reached()) {
        t << "extended to order " << g.jet.order() << "\n";
    } else {
        const auto& rep = g.last_report;
        ext["obstructed_at"] = rep.target_order;
        ext["certificate"] = rep.certificate->weights;
        ext["stress_energy"] = rep.stress_energy;
        ext["residual_norm"] = rep.solve_report.residual_norm;
        ext["cokernel_projection_norm"] = rep.solve_report.cokernel_projection_norm;
        ext["solve_tolerance"] = rep.solve_report.tolerance;
        t << "OBSTRUCTED at order " << rep.target_order << "\n";
        if (rep.target_order >= 3)
            out.report["warnings"].push_back("obstruction follows minimum-norm choices at lower orders; another choice "
                                             "of the lower-order fields might extend further");
        t << "  stress certificate (unit norm): " << vec_text(rep.certificate->weights) << "\n";
        t << "  stress energy: " << fmt(rep.stress_energy, 12) << " (solve tolerance " << fmt(rep.solve_report.tolerance)
          << ")\n";
    }
    if (g.jet.order() >= 2 || g.reached()) {
        std::string jt;
        for (std::size_t k = 2; k <= g.jet.order(); ++k) jt += "  xi(" + std::to_string(k) + "):\n" + field_text(g.jet[k]);
        t << jt;
    }
    if (opt.exact) {
        const auto exact = hierarchy_residuals(to_rational(c), to_rational(g.jet), g.jet.order());
        json ex = json::array();
        for (const auto& r : exact.per_order) ex.push_back({{"order", r.order}, {"norm", r.norm}});
        ext["exact_residuals"] = ex;
        t << "exact residual norms:";
        for (const auto& r : exact.per_order) t << " " << fmt(r.norm);
        t << "\n";
    }
    if (g.last_report.solve_report.judgment.marginal) record_marginal(out.report, g.last_report.solve_report.judgment, "extension solve");
    record_marginal(out.report, flex.judgment, "rigidity operator");
    out.report["flex_space"] = flex_space_json(flex);
    out.report["stress_space"] = stress_space_json(equilibrium_stress_space(c, opt.policy));
    out.report["extension"] = ext;
    out.text = t.str();
    return out;
}

inline json validation_json(const CurveValidation& v) {
    json failed = json::array();
    for (std::size_t k = 0; k < v.failed.size(); ++k) {
        failed.push_back({{"condition", condition_label(v.failed[k])}, {"reason", v.reasons[k]}});
    }
    std::vector<bool> nonrigid(v.nonrigid_at_each_sample.begin(), v.nonrigid_at_each_sample.end());
    std::vector<std::size_t> dims;
    for (const auto& f : v.flex_spaces) dims.push_back(f.nontrivial_dim);
    return {{"valid", v.valid()},
            {"nonrigid_at_each_sample", nonrigid},
            {"nontrivial_dims", dims},
            {"flex_residuals_along_curve", v.flex_residuals_along_curve},
            {"flex_tolerance", v.flex_tolerance},
            {"velocity_match_error", v.velocity_match_error},
            {"velocity_tolerance", v.velocity_tolerance},
            {"failed", failed},
            {"warnings", v.warnings}};
}

inline ConfigCurve load_curve(const io::Document& doc) {
    if (io::classify(doc.value) != io::DocumentKind::Curve) throw io::ParseError(doc.source + ": expected a curve document");
    try {
        return io::curve_from_json(doc.value);
    } catch (const CurveError& e) {
        throw CommandError(kInvalidCurve, e.what());
    }
}

inline Outcome cmd_tangent_extend(const io::Document& doc, const Options& opt) {
    const ConfigCurve curve = load_curve(doc);
    CurveValidation v;
    try {
        v = validate_curve(curve, opt.policy);
    } catch (const CurveError& e) {
        throw CommandError(kInvalidCurve, e.what());
    }
    Outcome out;
    out.report["validation"] = validation_json(v);
    for (const auto& w : v.warnings) out.report["warnings"].push_back(w);
    std::ostringstream t;
    t << "curve: " << curve.size() << " samples\n";
    t << "  (i) nonrigidity: "
      << (v.failed_on(CurveCondition::Nonrigidity) ? "FAIL" : "ok") << "\n";
    t << "  (ii) flex family: " << (v.failed_on(CurveCondition::FlexFamily) ? "FAIL" : "ok")
      << " (max residual " << fmt(*std::max_element(v.flex_residuals_along_curve.begin(), v.flex_residuals_along_curve.end()))
      << ", tolerance " << fmt(v.flex_tolerance) << ")\n";
    t << "  (ii) velocity match: " << (v.failed_on(CurveCondition::VelocityMatch) ? "FAIL" : "ok") << " (error "
      << fmt(v.velocity_match_error) << ", tolerance " << fmt(v.velocity_tolerance) << ")\n";
    if (!v.valid()) {
        std::string msg = "invalid curve:";
        for (std::size_t k = 0; k < v.failed.size(); ++k) msg += std::string(" ") + condition_label(v.failed[k]) + ";";
        out.code = kInvalidCurve;
        out.report["error"] = {{"exit_code", kInvalidCurve}, {"message", msg}};
        out.text = t.str() + msg + "\n";
        return out;
    }
    const TangentExtensionResult r = tangent_extension(curve, opt.policy);
    json table = json::array();
    std::vector<std::string> rows;
    t << "convergence table (h, order-2 residual):\n";
    for (const auto& e : r.convergence_table) {
        table.push_back({{"h", e.h}, {"residual", e.residual}});
        rows.push_back(csv_number(e.h) + "," + csv_number(e.residual));
        t << "  " << fmt(e.h) << "  " << fmt(e.residual) << "\n";
    }
    json slope = nullptr;
    if (r.convergence_table.size() >= 2) {
        const double s = convergence_slope(r.convergence_table);
        slope = finite_or_null(s);
        t << "log-log slope " << fmt(s, 4) << "\n";
    }
    t << "xi(2) (stencil order " << r.stencil_order << ", step " << fmt(r.fd_step) << "):\n" << field_text(r.xi2);
    t << "second-order residual " << fmt(r.second_order_residual) << "\n";
    out.report["tangent_extension"] = {{"xi1", io::to_json(r.xi1)},
                                       {"xi2", io::to_json(r.xi2)},
                                       {"fd_step", r.fd_step},
                                       {"stencil_order", r.stencil_order},
                                       {"second_order_residual", r.second_order_residual},
                                       {"convergence_table", table},
                                       {"slope", slope}};
    if (!opt.csv_path.empty()) write_csv(opt.csv_path, "h,residual", rows);
    out.text = t.str();
    return out;
}

inline SurfaceGrid load_grid(const io::Document& doc) {
    if (io::classify(doc.value) != io::DocumentKind::Grid) throw io::ParseError(doc.source + ": expected a grid document");
    try {
        return io::grid_from_json(doc.value);
    } catch (const io::ParseError& e) {
        // Valid JSON that does not describe a usable grid.
        throw CommandError(kBadGrid, e.what());
    }
}

inline Outcome cmd_surface(const io::Document& doc, const Options& opt) {
    const SurfaceGrid grid = load_grid(doc);
    FormGrid form;
    try {
        form = fundamental_form(grid);
    } catch (const ImmersionError& e) {
        throw CommandError(kBadGrid, e.what());
    } catch (const ModelError& e) {
        throw CommandError(kBadGrid, e.what());
    }
    if (opt.order > grid.jet_order()) {
        throw CommandError(kBadGrid, "grid carries a jet of order " + std::to_string(grid.jet_order()) + ", order " +
                                         std::to_string(opt.order) + " requested");
    }
    const auto triples = hierarchy_residual_grid(grid, opt.order);
    Outcome out;
    json orders = json::array();
    std::vector<std::string> rows;
    std::ostringstream t;
    t << "grid: " << grid.u().size() << " x " << grid.v().size() << " nodes, immersed at all interior nodes\n";
    for (const auto& r : triples) {
        auto max_of = [](const Grid2<double>& g) {
            double m = 0.0;
            for (double x : g.data()) m = std::max(m, std::abs(x));
            return m;
        };
        orders.push_back({{"order", r.order},
                          {"rms", r.rms()},
                          {"max_abs", r.max_abs()},
                          {"max_uu", max_of(r.uu)},
                          {"max_uv", max_of(r.uv)},
                          {"max_vv", max_of(r.vv)}});
        t << "order " << r.order << ": rms " << fmt(r.rms()) << ", max |uu| " << fmt(max_of(r.uu)) << ", max |uv| "
          << fmt(max_of(r.uv)) << ", max |vv| " << fmt(max_of(r.vv)) << "\n";
        for (std::size_t i = 0; i < r.uu.rows(); ++i)
            for (std::size_t j = 0; j < r.uu.cols(); ++j)
                rows.push_back(std::to_string(r.order) + "," + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
                               csv_number(grid.u()[i + 1]) + "," + csv_number(grid.v()[j + 1]) + "," +
                               csv_number(r.uu(i, j)) + "," + csv_number(r.uv(i, j)) + "," + csv_number(r.vv(i, j)));
    }
    out.report["surface"] = {{"nodes", {grid.u().size(), grid.v().size()}}, {"orders", orders}};
    if (!opt.csv_path.empty()) write_csv(opt.csv_path, "order,i,j,u,v,uu,uv,vv", rows);
    out.text = t.str();
    return out;
}

inline Outcome cmd_make_curve(const io::Document& doc, const Options& opt) {
    const auto in = load_framework(doc);
    const auto& c = in.configuration;
    const FlexSpaceReport flex = first_order_flex_space(c, opt.policy);
    const FlexField<double> xi1 = select_flex(in, flex, opt);
    const std::size_t k = opt.flex_index.value_or(0);
    ConfigCurve curve = [&] {
        try {
            return make_flexible_motion_curve(c, xi1, opt.steps, opt.h, opt.policy);
        } catch (const ContinuationError& e) {
            throw CommandError(kContinuation, "no finite motion found along flex " + std::to_string(k) + " (" + e.what() + ")");
        } catch (const PreconditionError& e) {
            throw CommandError(kBadFlex, std::string("flex rejected: ") + e.what());
        }
    }();
    double drift = 0.0;
    for (const auto& s : curve.samples()) {
        for (const Edge& e : c.framework().edges()) {
            const double l0 = norm(c.edge_vector(e));
            drift = std::max(drift, std::abs(norm(s.configuration.edge_vector(e)) - l0) / l0);
        }
    }
    Outcome out;
    const json cj = io::to_json(curve);
    out.report["flex_space"] = flex_space_json(flex);
    out.report["curve"] = cj;
    out.report["max_relative_edge_length_drift"] = drift;
    std::ostringstream t;
    t << "curve: " << curve.size() << " samples, step " << fmt(opt.h) << "\n";
    t << "max relative edge-length drift " << fmt(drift) << "\n";
    if (!opt.output_path.empty()) {
        std::ofstream f(opt.output_path, std::ios::binary);
        if (!f) throw CommandError(kParse, "cannot write " + opt.output_path);
        f << cj.dump(2) << '\n';
        t << "wrote " << opt.output_path << "\n";
        out.text = t.str();
    } else {
        // stdout carries the curve alone so it can be piped into a file.
        out.text = cj.dump(2) + "\n";
        out.diagnostics = t.str();
    }
    return out;
}

// ------------------------------------------------------------ dispatch

inline Outcome execute(const Options& opt, const std::string& input) {
    Outcome out;
    json base = {{"schema_version", io::kSchemaVersion},
                 {"command", opt.command},
                 {"input", input},
                 {"policy", policy_json(opt.policy)},
                 {"warnings", json::array()}};
    try {
        const io::Document doc = io::load_document(input);
        base["input_digest"] = "fnv1a64:" + io::digest(doc.value.dump());
        if (opt.command == "analyze") out = cmd_analyze(doc, opt);
        else if (opt.command == "extend") out = cmd_extend(doc, opt);
        else if (opt.command == "tangent-extend") out = cmd_tangent_extend(doc, opt);
        else if (opt.command == "surface") out = cmd_surface(doc, opt);
        else if (opt.command == "make-curve") out = cmd_make_curve(doc, opt);
        else throw CommandError(kParse, "unknown command " + opt.command);
    } catch (const CommandError& e) {
        out = {e.code(), std::string("error: ") + e.what() + "\n", json::object()};
    } catch (const io::ParseError& e) {
        out = {kParse, std::string("error: ") + e.what() + "\n", json::object()};
    } catch (const ModelError& e) {
        out = {kParse, std::string("error: ") + e.what() + "\n", json::object()};
    }
    if (out.code != kOk && !out.report.contains("error")) {
        out.report["error"] = {{"exit_code", out.code}, {"message", out.text.substr(7, out.text.size() - 8)}};
    }
    for (auto& [key, value] : out.report.items()) {
        if (key == "warnings") {
            for (const auto& w : value) base["warnings"].push_back(w);
        } else {
            base[key] = value;
        }
    }
    base["exit_code"] = out.code;
    out.report = std::move(base);
    return out;
}

inline void emit(const Outcome& o, const Options& opt, std::ostream& out, std::ostream& err) {
    if (opt.json_output) {
        out << o.report.dump(2) << '\n';
        return;
    }
    (o.code == kOk ? out : err) << o.text;
    err << o.diagnostics;
    for (const auto& w : o.report["warnings"]) err << "warning: " << w.get<std::string>() << '\n';
}

inline int run_batch(const Options& opt, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(opt.batch_dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
    }
    if (ec) {
        err << "error: cannot read batch directory " << opt.batch_dir << '\n';
        return kParse;
    }
    std::sort(files.begin(), files.end());
    std::vector<std::future<Outcome>> jobs;
    for (const auto& f : files) {
        Options per = opt;
        per.csv_path.clear();
        per.output_path.clear();
        jobs.push_back(std::async(std::launch::async, [per, f] { return execute(per, f); }));
    }
    int worst = kOk;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const Outcome o = jobs[k].get();
        if (!opt.json_output) out << "== " << files[k] << '\n';
        emit(o, opt, out, err);
        worst = std::max(worst, o.code);
    }
    return worst;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App cli{"flexlab: infinitesimal flexes of frameworks and sampled surfaces", "flexlab"};
    cli.set_help_flag("--help", "print help");  // -h is taken by the step option
    cli.require_subcommand(1);
    Options opt;
    std::string tol;

    auto common = [&](CLI::App* sub) {
        sub->add_option("input", opt.input, "input file or builtin:<name>");
        sub->add_flag("--json", opt.json_output, "machine-readable report on stdout");
        sub->add_option("--tol", tol, "rank tolerance as rel:abs");
        sub->add_option("--batch", opt.batch_dir, "process every *.json file in a directory");
    };
    auto* analyze = cli.add_subcommand("analyze", "first-order flex and stress spaces");
    common(analyze);
    analyze->add_flag("--exact", opt.exact, "cross-check ranks in exact rational arithmetic");

    auto* extend = cli.add_subcommand("extend", "extend a first-order flex order by order");
    common(extend);
    extend->add_option("--order", opt.order, "target order")->check(CLI::PositiveNumber);
    extend->add_option("--flex", opt.flex_index, "index into the nontrivial flex basis");
    extend->add_option("--flex-field", opt.flex_file, "JSON file holding the first-order flex");
    extend->add_flag("--exact", opt.exact, "recompute residuals in exact rational arithmetic");

    auto* tangent = cli.add_subcommand("tangent-extend", "second-order extension from a curve of nonrigid configurations");
    common(tangent);
    tangent->add_option("--csv", opt.csv_path, "write the convergence table as CSV");

    auto* surface = cli.add_subcommand("surface", "flex residuals on a sampled surface grid");
    common(surface);
    surface->add_option("--order", opt.order, "highest order to check")->check(CLI::PositiveNumber);
    surface->add_option("--csv", opt.csv_path, "write per-node residuals as CSV");

    auto* make_curve = cli.add_subcommand("make-curve", "follow a finite motion along a flex");
    common(make_curve);
    make_curve->add_option("--flex", opt.flex_index, "index into the nontrivial flex basis");
    make_curve->add_option("--flex-field", opt.flex_file, "JSON file holding the first-order flex");
    make_curve->add_option("--steps", opt.steps, "samples on each side of r = 0")->check(CLI::PositiveNumber);
    make_curve->add_option("--h", opt.h, "parameter step")->check(CLI::PositiveNumber);
    make_curve->add_option("-o,--output", opt.output_path, "write the curve JSON to a file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        cli.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << cli.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParse;
    }
    opt.command = cli.get_subcommands().front()->get_name();
    if (opt.command == "surface" && cli.get_subcommands().front()->count("--order") == 0) opt.order = 1;
    try {
        if (!tol.empty()) opt.policy = parse_tolerance(tol);
    } catch (const CommandError& e) {
        err << "error: " << e.what() << '\n';
        return e.code();
    }
    if (!opt.batch_dir.empty()) return run_batch(opt, out, err);
    if (opt.input.empty()) {
        err << "error: missing input (file path or builtin:<name>)\n";
        return kParse;
    }
    const Outcome o = execute(opt, opt.input);
    emit(o, opt, out, err);
    return o.code;
}

}  // namespace flexlab::app
