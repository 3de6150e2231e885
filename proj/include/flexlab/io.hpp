#pragma once
// JSON input/output. Vertex indices are 0-based; every document carries
// "schema_version": 1.

#include <json.hpp>  // nlohmann/json, vendored

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flexlab/core.hpp"
#include "flexlab/corpus.hpp"

namespace flexlab::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or structurally invalid input. Line/column are 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"
                                  : what),
          line_(line),
          column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

inline json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("malformed JSON", line, col);
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// FNV-1a, 64 bit, as 16 hex digits.
inline std::string digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int k = 15; k >= 0; --k, h >>= 4) out[std::size_t(k)] = hex[h & 0xf];
    return out;
}

// ---------------------------------------------------------------- writing

inline json to_json(const Vec3d& v) { return json::array({v[0], v[1], v[2]}); }

inline json to_json(const std::vector<Vec3d>& vs) {
    json a = json::array();
    for (const auto& v : vs) a.push_back(to_json(v));
    return a;
}

inline json to_json(const FlexField<double>& f) { return to_json(f.vectors); }

inline json edges_json(const Framework& f) {
    json a = json::array();
    for (const Edge& e : f.edges()) a.push_back(json::array({e.i, e.j}));
    return a;
}

inline json to_json(const Configuration<double>& c) {
    return {{"schema_version", kSchemaVersion}, {"vertices", to_json(c.positions())}, {"edges", edges_json(c.framework())}};
}

inline json to_json(const ConfigCurve& curve) {
    json samples = json::array();
    for (const auto& s : curve.samples()) {
        samples.push_back({{"r", s.r}, {"positions", to_json(s.configuration.positions())}, {"flex", to_json(s.flex)}});
    }
    json j = {{"schema_version", kSchemaVersion}, {"edges", edges_json(curve.framework())}, {"samples", samples}};
    if (curve.uniform_step()) j["step"] = *curve.uniform_step();
    return j;
}

inline json to_json(const Grid2<Vec3d>& g) {
    json rows = json::array();
    for (std::size_t i = 0; i < g.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < g.cols(); ++j) row.push_back(to_json(g(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const SurfaceGrid& grid) {
    json jets = json::array();
    for (const auto& j : grid.jets()) jets.push_back(to_json(j));
    return {{"schema_version", kSchemaVersion},
            {"u", grid.u()},
            {"v", grid.v()},
            {"positions", to_json(grid.positions())},
            {"jets", jets}};
}

// ---------------------------------------------------------------- reading

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where + ": expected a number");
    return j.get<double>();
}

inline Vec3d vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ParseError(where + ": expected [x, y, z]");
    return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

inline std::vector<Vec3d> vec3_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array of 3-vectors");
    std::vector<Vec3d> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(vec3(j[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

inline std::vector<Edge> edge_list(const json& j) {
    if (!j.is_array()) throw ParseError("edges: expected an array of [i, j] pairs");
    std::vector<Edge> out;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
            throw ParseError("edges: expected [i, j] with non-negative integer indices, got " + e.dump());
        }
        out.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
    }
    return out;
}

inline void check_version(const json& j) {
    if (!j.is_object()) throw ParseError("top-level value must be an object");
    if (!j.contains("schema_version")) throw ParseError("missing \"schema_version\"");
    if (j.at("schema_version") != kSchemaVersion) {
        throw ParseError("unsupported schema_version " + j.at("schema_version").dump());
    }
}

inline FrameworkPtr framework_from(std::size_t n, const json& edges) {
    auto list = edge_list(edges);
    auto violations = validate_framework(n, list);
    if (!violations.empty()) throw ParseError("invalid framework: " + violations.front().message);
    return make_framework(n, std::move(list));
}

inline Grid2<Vec3d> grid_field(const json& j, std::size_t nu, std::size_t nv, const std::string& where) {
    if (!j.is_array() || j.size() != nu) throw ParseError(where + ": expected " + std::to_string(nu) + " rows");
    Grid2<Vec3d> g(nu, nv);
    for (std::size_t i = 0; i < nu; ++i) {
        if (!j[i].is_array() || j[i].size() != nv) {
            throw ParseError(where + ": row " + std::to_string(i) + " must have " + std::to_string(nv) + " entries");
        }
        for (std::size_t k = 0; k < nv; ++k) g(i, k) = vec3(j[i][k], where);
    }
    return g;
}

}  // namespace detail

/// A framework document, optionally carrying a first-order flex.
struct FrameworkInput {
    Configuration<double> configuration;
    std::optional<FlexField<double>> flex;
};

inline FrameworkInput framework_from_json(const json& j) {
    detail::check_version(j);
    auto positions = detail::vec3_list(detail::field(j, "vertices", "framework"), "vertices");
    auto f = detail::framework_from(positions.size(), detail::field(j, "edges", "framework"));
    try {
        FrameworkInput in{Configuration<double>(f, std::move(positions)), std::nullopt};
        if (j.contains("flex")) {
            auto flex = detail::vec3_list(j.at("flex"), "flex");
            if (flex.size() != f->vertex_count()) throw ParseError("flex: needs one vector per vertex");
            in.flex = FlexField<double>(std::move(flex));
        }
        return in;
    } catch (const ModelError& e) {
        throw ParseError(e.what());
    }
}

inline FlexField<double> flex_from_json(const json& j) {
    detail::check_version(j);
    return FlexField<double>(detail::vec3_list(detail::field(j, "flex", "flex file"), "flex"));
}

/// Structural curve errors (missing base sample and the like) surface as
/// CurveError so callers can tell them apart from syntax errors.
inline ConfigCurve curve_from_json(const json& j) {
    detail::check_version(j);
    const json& samples = detail::field(j, "samples", "curve");
    if (!samples.is_array()) throw ParseError("samples: expected an array");
    std::vector<CurveSample> out;
    FrameworkPtr f;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const std::string where = "samples[" + std::to_string(k) + "]";
        const json& s = samples[k];
        auto pos = detail::vec3_list(detail::field(s, "positions", where), where + ".positions");
        auto flex = detail::vec3_list(detail::field(s, "flex", where), where + ".flex");
        if (!f) f = detail::framework_from(pos.size(), detail::field(j, "edges", "curve"));
        try {
            out.push_back({detail::number(detail::field(s, "r", where), where + ".r"),
                           Configuration<double>(f, std::move(pos)), FlexField<double>(std::move(flex))});
        } catch (const CurveError&) {
            throw;
        } catch (const ModelError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    std::optional<double> step;
    if (j.contains("step")) step = detail::number(j.at("step"), "step");
    return ConfigCurve(std::move(out), step);
}

inline SurfaceGrid grid_from_json(const json& j) {
    detail::check_version(j);
    const json& ju = detail::field(j, "u", "grid");
    const json& jv = detail::field(j, "v", "grid");
    if (!ju.is_array() || !jv.is_array()) throw ParseError("grid: u and v must be arrays");
    std::vector<double> u, v;
    for (const auto& x : ju) u.push_back(detail::number(x, "u"));
    for (const auto& x : jv) v.push_back(detail::number(x, "v"));
    auto positions = detail::grid_field(detail::field(j, "positions", "grid"), u.size(), v.size(), "positions");
    std::vector<Grid2<Vec3d>> jets;
    if (j.contains("jets")) {
        if (!j.at("jets").is_array()) throw ParseError("jets: expected an array");
        for (std::size_t k = 0; k < j.at("jets").size(); ++k) {
            jets.push_back(detail::grid_field(j.at("jets")[k], u.size(), v.size(), "jets[" + std::to_string(k) + "]"));
        }
    }
    try {
        return SurfaceGrid(std::move(u), std::move(v), std::move(positions), std::move(jets));
    } catch (const ModelError& e) {
        throw ParseError(e.what());
    }
}

/// What a document looks like it contains, judged by its keys.
enum class DocumentKind { Framework, Curve, Grid, Unknown };

inline DocumentKind classify(const json& j) {
    if (!j.is_object()) return DocumentKind::Unknown;
    if (j.contains("samples")) return DocumentKind::Curve;
    if (j.contains("positions") && j.contains("u")) return DocumentKind::Grid;
    if (j.contains("vertices")) return DocumentKind::Framework;
    return DocumentKind::Unknown;
}

/// Loaded input: the parsed JSON (for digests) plus its source label.
struct Document {
    std::string source;
    json value;
};

/// Reads "builtin:<name>" from the compiled-in corpus, anything else from disk.
inline Document load_document(const std::string& spec) {
    static const std::string prefix = "builtin:";
    if (spec.rfind(prefix, 0) == 0) {
        const std::string name = spec.substr(prefix.size());
        auto entry = corpus::lookup(name);
        if (!entry) throw ParseError("unknown builtin \"" + name + "\"");
        json j = std::visit([](const auto& e) { return to_json(e); }, *entry);
        return {spec, std::move(j)};
    }
    return {spec, parse_text(read_file(spec))};
}

}  // namespace flexlab::io
