#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flexlab/app.hpp"

using namespace flexlab;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = app::run(args, out, err);
    return {code, out.str(), err.str()};
}

bool contains(const std::string& s, const std::string& what) { return s.find(what) != std::string::npos; }

const std::string data = FLEXLAB_DATA_DIR;

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "flexlab-cli-test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Cli, AnalyzeClassifications) {
    auto r = run({"analyze", "builtin:tetrahedron"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "first-order rigid, nontrivial flex dim 0")) << r.out;
    r = run({"analyze", "builtin:subdivided-tetrahedron", "--exact"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "first-order nonrigid, nontrivial flex dim 1, stress dim 1")) << r.out;
    EXPECT_TRUE(contains(r.out, "(agrees)"));
}

TEST(Cli, ParseErrorsExitTwo) {
    auto r = run({"analyze", data + "/malformed.json"});
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(contains(r.err, "line 4")) << r.err;
    EXPECT_EQ(run({"analyze", "builtin:nope"}).code, 2);
    EXPECT_EQ(run({"analyze", "/does/not/exist.json"}).code, 2);
    EXPECT_EQ(run({"analyze", "builtin:hinge", "--tol", "abc"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"analyze", "builtin:hinge-fold-curve"}).code, 2);
}

TEST(Cli, Extend) {
    auto r = run({"extend", "builtin:subdivided-tetrahedron", "--flex", "0", "--order", "2"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "OBSTRUCTED at order 2"));
    EXPECT_TRUE(contains(r.out, "stress certificate"));
    EXPECT_TRUE(contains(r.out, "stress energy"));
    r = run({"extend", "builtin:hinge", "--flex", "0", "--order", "4"});
    EXPECT_TRUE(contains(r.out, "extended to order 4")) << r.out;
    r = run({"extend", "builtin:tetrahedron", "--flex-field", data + "/tetrahedron-translation-flex.json", "--order", "3"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "extended to order 3")) << r.out << r.err;
}

TEST(Cli, ExtendRejectsBadFlex) {
    const auto bad = scratch("bad-flex.json");
    std::ofstream(bad) << R"({"schema_version": 1, "flex": [[0,0,0],[1,0,0],[0,0,0],[0,0,0]]})";
    auto r = run({"extend", "builtin:tetrahedron", "--flex-field", bad.string()});
    EXPECT_EQ(r.code, 3);
    EXPECT_TRUE(contains(r.err, "residual")) << r.err;
    EXPECT_EQ(run({"extend", "builtin:hinge", "--flex", "3"}).code, 3);
    EXPECT_EQ(run({"extend", "builtin:tetrahedron"}).code, 3);
}

TEST(Cli, TangentExtend) {
    const auto csv = scratch("table.csv");
    auto r = run({"tangent-extend", "builtin:hinge-fold-curve", "--csv", csv.string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "log-log slope 2")) << r.out;
    std::ifstream in(csv, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(text.rfind("h,residual\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
    EXPECT_FALSE(contains(text, "\r"));

    r = run({"tangent-extend", "builtin:fig1-green-curve"});
    EXPECT_EQ(r.code, 4);
    EXPECT_TRUE(contains(r.err, "(ii) velocity match")) << r.err;
    EXPECT_FALSE(contains(r.err, "(i) nonrigidity;"));

    r = run({"tangent-extend", data + "/curve-missing-base.json"});
    EXPECT_EQ(r.code, 4);
    EXPECT_TRUE(contains(r.err, "no base sample"));
}

TEST(Cli, Surface) {
    auto r = run({"surface", "builtin:plane-tilt-jet", "--order", "2", "--json"});
    EXPECT_EQ(r.code, 0);
    const auto j = io::json::parse(r.out);
    for (const auto& o : j["surface"]["orders"]) EXPECT_LT(o["rms"].get<double>(), 1e-12);
    r = run({"surface", "builtin:plane-normal-bump", "--order", "2", "--json"});
    const auto k = io::json::parse(r.out);
    EXPECT_LT(k["surface"]["orders"][0]["rms"].get<double>(), 1e-12);
    EXPECT_GT(k["surface"]["orders"][1]["rms"].get<double>(), 0.0);
    EXPECT_EQ(run({"surface", "builtin:degenerate-grid"}).code, 5);
    EXPECT_EQ(run({"surface", "builtin:plane-tilt-jet", "--order", "3"}).code, 5);

    const auto csv = scratch("surface.csv");
    EXPECT_EQ(run({"surface", "builtin:plane-tilt-jet", "--csv", csv.string()}).code, 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "order,i,j,u,v,uu,uv,vv");
}

TEST(Cli, MakeCurve) {
    const auto out = scratch("hinge-curve.json");
    auto r = run({"make-curve", "builtin:hinge", "--flex", "0", "-o", out.string(), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_LT(io::json::parse(r.out)["max_relative_edge_length_drift"].get<double>(), 1e-10);
    // The written curve feeds straight back into tangent-extend.
    EXPECT_EQ(run({"tangent-extend", out.string()}).code, 0);

    // Without -o the curve alone goes to stdout; notes go to stderr.
    r = run({"make-curve", "builtin:hinge", "--steps", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::json::parse(r.out)["samples"].size(), 5u);
    EXPECT_TRUE(contains(r.err, "drift"));

    r = run({"make-curve", "builtin:subdivided-tetrahedron", "--flex", "0"});
    EXPECT_EQ(r.code, 6);
    EXPECT_TRUE(contains(r.err, "no finite motion found along flex 0")) << r.err;
    r = run({"make-curve", "builtin:tetrahedron"});
    EXPECT_EQ(r.code, 3);
    EXPECT_TRUE(contains(r.err, "no nontrivial flex to follow"));
}

TEST(Cli, ReportsAreReproducible) {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"analyze", "builtin:subdivided-tetrahedron", "--json"},
             {"extend", "builtin:hinge", "--order", "3", "--json"},
             {"tangent-extend", "builtin:hinge-fold-curve", "--json"}}) {
        const auto a = run(args), b = run(args);
        EXPECT_EQ(a.out, b.out);
        const auto j = io::json::parse(a.out);
        EXPECT_EQ(j["input_digest"].get<std::string>().size(), std::string("fnv1a64:").size() + 16);
        EXPECT_EQ(j["policy"]["rel_tol"].get<double>(), 1e-10);
    }
    const auto t = io::json::parse(run({"analyze", "builtin:hinge", "--tol", "1e-6:1e-9", "--json"}).out);
    EXPECT_EQ(t["policy"]["rel_tol"].get<double>(), 1e-6);
    EXPECT_EQ(t["flex_space"]["judgment"]["threshold_used"].get<double>() > 1e-7, true);
}

TEST(Cli, BatchKeepsPerInputOrder) {
    const auto dir = scratch("batch");
    std::filesystem::create_directories(dir);
    for (const auto& f : {"square-with-diagonal.json", "malformed.json"})
        std::filesystem::copy_file(data + "/" + f, dir / f, std::filesystem::copy_options::overwrite_existing);
    const auto r = run({"analyze", "--batch", dir.string()});
    EXPECT_EQ(r.code, 2);  // worst exit code across inputs
    const auto a = r.out.find("malformed.json"), b = r.out.find("square-with-diagonal.json");
    ASSERT_NE(a, std::string::npos);
    ASSERT_NE(b, std::string::npos);
    EXPECT_LT(a, b);
    EXPECT_TRUE(contains(r.out, "first-order nonrigid, nontrivial flex dim 1, stress dim 0"));
}
