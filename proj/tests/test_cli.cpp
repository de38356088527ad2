#include "noke/cli.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace noke;
using noke::test::make;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("noke_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::string write(const std::string& name, const std::string& text) const
    {
        const auto p = path_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

private:
    std::filesystem::path path_;
};

const Parameters p236{2, 3, 6};

// forest (F): 12|3 -> 45|6 -> 78|9 in the orientation A B C, A->3, A->B, B->6, B->C, C->9
const char* kForestF = R"({"d":2,"k":3,"n":9,
  "squares":[[1,2],[4,5],[7,8]],
  "rounds":[{"member":3,"attached":0},{"member":6,"attached":1},{"member":9,"attached":2}],
  "edges":[{"tail":"s0","head":"r0"},{"tail":"s0","head":"s1"},{"tail":"s1","head":"r1"},
           {"tail":"s1","head":"s2"},{"tail":"s2","head":"r2"}],
  "orientationOrder":["s0","s1","s2","e0","e1","e2","e3","e4"]})";

}  // namespace

// ---------------------------------------------------------------------------
// betti / basis

TEST(CliBetti, JsonTable)
{
    const auto r = run({"betti", "--d", "2", "--k", "3", "--n", "6"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "{\"0\":1,\"3\":20,\"4\":45,\"5\":36,\"6\":20,\"7\":10}\n");
    EXPECT_EQ(run({"betti", "--d", "2", "--k", "3", "--n", "4"}).out, "{\"0\":1,\"3\":4,\"4\":3}\n");
}

TEST(CliBetti, Mod2MatchesIntegral)
{
    for (const auto& [d, k, n] : {std::tuple{2, 3, 6}, std::tuple{3, 3, 5}, std::tuple{2, 4, 8}}) {
        const std::vector<std::string> base{"betti", "--d", std::to_string(d), "--k", std::to_string(k), "--n",
                                            std::to_string(n)};
        auto mod2 = base;
        mod2.push_back("--mod2");
        EXPECT_EQ(run(base).out, run(mod2).out);
    }
}

TEST(CliBetti, OtherFormats)
{
    const auto csv = run({"betti", "--d", "2", "--k", "3", "--n", "4", "--format", "csv"});
    EXPECT_EQ(csv.out, "degree,rank\n0,1\n3,4\n4,3\n");
    const auto ascii = run({"betti", "--d", "2", "--k", "3", "--n", "4", "--format", "ascii"});
    EXPECT_EQ(ascii.out, "H^0 = 1\nH^3 = 4\nH^4 = 3\n");
    EXPECT_EQ(run({"betti", "--d", "2", "--k", "3", "--n", "4", "--format", "xml"}).code, exit_code::usage);
}

TEST(CliBetti, InvalidParameters)
{
    const auto r = run({"betti", "--d", "2", "--k", "3", "--n", "3"});
    EXPECT_EQ(r.code, exit_code::usage);
    EXPECT_NE(r.err.find("n > k"), std::string::npos) << r.err;
    EXPECT_EQ(run({"betti", "--d", "1", "--k", "3", "--n", "5"}).code, exit_code::usage);
    EXPECT_EQ(run({"betti", "--d", "2", "--k", "3"}).code, exit_code::usage);
    EXPECT_EQ(run({}).code, exit_code::usage);
    EXPECT_EQ(run({"frobnicate"}).code, exit_code::usage);
    EXPECT_EQ(run({"--help"}).code, exit_code::ok);
}

TEST(CliBasis, ListsForests)
{
    const auto r = run({"basis", "--d", "2", "--k", "3", "--n", "6", "--degree", "7"});
    ASSERT_EQ(r.code, 0);
    const auto j = Json::parse(r.out);
    EXPECT_EQ(j["count"], 10);
    ASSERT_EQ(j["forests"].size(), 10u);
    for (const auto& f : j["forests"]) {
        const auto parsed = parse_forest(f);
        EXPECT_TRUE(is_basic(parsed.forest, parsed.params));
    }
}

// ---------------------------------------------------------------------------
// tc / predicates / cl / zcl

TEST(CliTc, Examples)
{
    auto tc = [](const std::string& d, const std::string& k, const std::string& n, const std::string& s) {
        const auto r = run({"tc", "--d", d, "--k", k, "--n", n, "--s", s});
        EXPECT_EQ(r.code, 0) << r.err;
        return Json::parse(r.out);
    };
    const auto a = tc("2", "8", "40", "2");
    EXPECT_EQ(a["lower"], 10);
    EXPECT_EQ(a["upperImproved"], 10);
    EXPECT_EQ(a["determined"], true);
    EXPECT_EQ(a["value"], 10);

    const auto b = tc("2", "3", "11", "1");
    EXPECT_EQ(b["lower"], 3);
    EXPECT_EQ(b["upperImproved"], 4);
    EXPECT_EQ(b["determined"], false);
    EXPECT_FALSE(b.contains("value"));

    const auto c = tc("2", "3", "12", "5");
    EXPECT_EQ(c["value"], 20);
    EXPECT_EQ(c["source"], "obstruction-improved");
    EXPECT_EQ(run({"tc", "--d", "2", "--k", "3", "--n", "12", "--s", "0"}).code, exit_code::usage);
}

TEST(CliPredicates, Fields)
{
    const auto j = Json::parse(run({"predicates", "--d", "2", "--k", "4", "--n", "19"}).out);
    EXPECT_EQ(j["omnibus"], false);
    EXPECT_EQ(j["millerFormality"], false);
    const auto k = Json::parse(run({"predicates", "--d", "3", "--k", "4", "--n", "9"}).out);
    EXPECT_EQ(k["millerFormality"], "not-applicable");
}

TEST(CliLengths, WitnessAndExhaustive)
{
    const auto cl = Json::parse(run({"cl", "--d", "2", "--k", "3", "--n", "6"}).out);
    EXPECT_EQ(cl["value"], 2);
    EXPECT_EQ(cl["certificate"]["verified"], true);
    EXPECT_EQ(cl["certificate"]["productNonzeroIn"], 6);

    const auto zcl = Json::parse(run({"zcl", "--d", "2", "--k", "3", "--n", "4", "--s", "2", "--mod2"}).out);
    EXPECT_EQ(zcl["value"], 2);
    EXPECT_EQ(zcl["ring"], "Z2");
    EXPECT_EQ(zcl["certificate"]["product"]["terms"].size(), 2u);

    const auto ex = Json::parse(run({"zcl", "--d", "2", "--k", "3", "--n", "4", "--s", "2", "--exhaustive"}).out);
    EXPECT_EQ(ex["value"], 2);
    EXPECT_EQ(ex["mode"], "exhaustive");

    const auto capped = run({"cl", "--d", "2", "--k", "3", "--n", "6", "--exhaustive", "--cap", "5"});
    EXPECT_EQ(capped.code, exit_code::usage);
    EXPECT_NE(capped.err.find("cap"), std::string::npos);
    EXPECT_EQ(run({"zcl", "--d", "2", "--k", "3", "--n", "6", "--s", "1"}).code, exit_code::usage);
}

TEST(Cli, Deterministic)
{
    const std::vector<std::vector<std::string>> cmds{
        {"betti", "--d", "3", "--k", "3", "--n", "6"},
        {"cl", "--d", "2", "--k", "3", "--n", "7"},
        {"zcl", "--d", "2", "--k", "3", "--n", "6", "--s", "3"},
        {"table", "--d", "2", "--k-min", "3", "--k-max", "6", "--n-min", "4", "--n-max", "30", "--format", "csv"}};
    for (const auto& c : cmds) EXPECT_EQ(run(c).out, run(c).out);
}

// ---------------------------------------------------------------------------
// tables

TEST(CliTable, FourColumnQuestionMarks)
{
    const auto r = run({"table", "--d", "2", "--k-min", "4", "--k-max", "4", "--n-min", "5", "--n-max", "24",
                        "--format", "json"});
    ASSERT_EQ(r.code, 0);
    const auto j = Json::parse(r.out);
    for (const auto& cell : j["cells"]) {
        const int n = cell["n"];
        const bool unknown = cell["value"] == "?";
        EXPECT_EQ(unknown, n == 19 || n == 22 || n == 23) << n;
        EXPECT_EQ(cell["floor"], n / 4);
        if (!unknown) {
            EXPECT_EQ(cell["value"], n / 4);
        }
    }
}

TEST(CliTable, ThreeColumnAscii)
{
    const auto r = run({"table", "--d", "2", "--k-min", "3", "--k-max", "3", "--n-min", "3", "--n-max", "12",
                        "--format", "ascii"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, " n\\k   3");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 10u);
    EXPECT_EQ(rows[0], "   3    ");
    EXPECT_EQ(rows[1], "   4   1");
    EXPECT_EQ(rows[2], "   5   1");
    EXPECT_EQ(rows[8], "  11   ?");
    EXPECT_EQ(rows[9], "  12   4");
    for (std::size_t i = 1; i < 8; ++i) EXPECT_EQ(rows[i].find('?'), std::string::npos);
}

TEST(CliTable, CsvEncoding)
{
    const auto r = run({"table", "--d", "2", "--s", "2", "--k-min", "3", "--k-max", "4", "--n-min", "4", "--n-max",
                        "11", "--format", "csv"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "k,n,floor,determined,value");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 16u);
    EXPECT_EQ(rows[0], "3,4,1,true,2");
    EXPECT_EQ(rows[1], "4,4,,,");
    EXPECT_EQ(rows[14], "3,11,3,false,");
}

TEST(CliTable, FirstRowIsOneForAnyD)
{
    for (int d = 2; d <= 9; ++d) {
        TableSpec spec;
        spec.d = d;
        spec.k_min = 3;
        spec.k_max = 12;
        spec.n_min = 4;
        spec.n_max = 13;
        for (const auto& c : table_cells(spec))
            if (c.n == c.k + 1) {
                EXPECT_EQ(c.value, 1) << d << " " << c.k;
            }
    }
    TableSpec bad;
    bad.k_min = 5;
    bad.k_max = 4;
    EXPECT_THROW((void)table_cells(bad), InvalidParameters);
    EXPECT_EQ(run({"table", "--d", "2", "--k-min", "5", "--k-max", "4", "--n-min", "4", "--n-max", "5"}).code,
              exit_code::usage);
}

// ---------------------------------------------------------------------------
// class and forest JSON

TEST(ClassJson, RoundTrip)
{
    std::mt19937 rng(4);
    for (int deg : {3, 5, 7}) {
        const auto c = noke::test::random_class(p236, deg, rng, 5);
        EXPECT_EQ(parse_class(emit_class(c)), c);
        const auto m = reduce_mod2(c);
        EXPECT_EQ(parse_class(emit_class(m)), m);
    }
    const auto one = CohomologyClass::unit(p236);
    EXPECT_EQ(parse_class(emit_class(one)), one);
    const CohomologyClass zero(p236);
    EXPECT_EQ(parse_class(emit_class(zero)), zero);
    CohomologyClass huge(p236);
    huge.add_basic(make(6, {{1, 2}}, {{3}}), Integer("123456789012345678901234567890"));
    EXPECT_EQ(parse_class(emit_class(huge)), huge);
    EXPECT_EQ(emit_class(parse_class(emit_class(huge))), emit_class(huge));
}

TEST(ClassJson, NonBasicTermsAreStraightened)
{
    const auto f = make(6, {{2, 3}}, {{1}});
    Json j{{"ring", "Z"}, {"terms", Json::array({Json{{"coeff", 1}, {"forest", forest_to_json(f, p236)}}})}};
    const auto c = parse_class(j);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(abs(c.coefficient(make(6, {{1, 2}}, {{3}}))), 1);
}

TEST(ForestJson, PaperForestIsBasic)
{
    const auto parsed = parse_forest(Json::parse(kForestF));
    EXPECT_TRUE(is_canonical(parsed.forest, parsed.params));
    EXPECT_TRUE(is_basic(parsed.forest, parsed.params));
    EXPECT_EQ(degree(parsed.forest, parsed.params), 11);
}

TEST(ForestJson, RuleViolationsNamed)
{
    auto j = Json::parse(kForestF);
    j["squares"][2] = Json::array({7, 3});
    try {
        (void)parse_forest(j);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("partition"), std::string::npos) << e.what();
    }

    auto cyc = Json::parse(kForestF);
    cyc["edges"].push_back(Json{{"tail", "s0"}, {"head", "s2"}});
    cyc["orientationOrder"].push_back("e5");
    try {
        (void)parse_forest(cyc);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("acyclic"), std::string::npos) << e.what();
    }
}

TEST(ForestJson, PointerPaths)
{
    auto j = Json::parse(kForestF);
    j["squares"][1][1] = "five";
    try {
        (void)parse_forest(j);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.where(), "/squares/1/1");
    }
    Json cls{{"ring", "Z"}, {"terms", Json::array({Json{{"coeff", "x"}, {"forest", Json::parse(kForestF)}}})}};
    try {
        (void)parse_class(cls);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.where(), "/terms/0/coeff");
    }
    EXPECT_THROW((void)parse_class(std::string("{\"ring\":\"Z\",")), ParseError);
    EXPECT_THROW((void)parse_class(Json{{"ring", "Q"}, {"terms", Json::array()}}), ParseError);
    EXPECT_THROW((void)parse_class(Json{{"ring", "Z"}, {"terms", Json::array()}}), ParseError);
}

// ---------------------------------------------------------------------------
// mul

TEST(CliMul, Products)
{
    const TempDir dir;
    const auto x3 = x_generator(3, p236), x4 = x_generator(4, p236);
    const auto a = CohomologyClass::basic(make(6, {{1, 2}}, {{3}}), p236);
    const auto b = CohomologyClass::basic(make(6, {{4, 5}}, {{3, 6}}), p236);
    const auto fa = dir.write("a.json", emit_class(a));
    const auto fb = dir.write("b.json", emit_class(b));
    const auto f3 = dir.write("x3.json", emit_class(x3));
    const auto f4 = dir.write("x4.json", emit_class(x4));
    const auto f1 = dir.write("one.json", emit_class(CohomologyClass::unit(p236)));

    const auto ab = run({"mul", "--lhs", fa, "--rhs", fb});
    ASSERT_EQ(ab.code, 0) << ab.err;
    const auto prod = parse_class(ab.out);
    ASSERT_EQ(prod.size(), 1u);
    EXPECT_EQ(prod.coefficient(make(6, {{1, 2}, {4, 5}}, {{3}, {6}}, {{0, 1}})), 1);

    EXPECT_EQ(parse_class(run({"mul", "--lhs", f1, "--rhs", fb}).out), b);
    const auto zero = run({"mul", "--lhs", f3, "--rhs", f4});
    ASSERT_EQ(zero.code, 0);
    EXPECT_TRUE(parse_class(zero.out).is_zero());

    const auto m2 = parse_class(run({"mul", "--lhs", fa, "--rhs", fb, "--mod2"}).out);
    EXPECT_EQ(m2.ring(), CoefficientRing::mod2);
    EXPECT_EQ(m2.size(), 1u);
}

TEST(CliMul, Errors)
{
    const TempDir dir;
    const auto good = dir.write("good.json", emit_class(x_generator(3, p236)));
    const auto other = dir.write("other.json", emit_class(x_generator(3, Parameters{2, 3, 7})));
    const auto broken = dir.write("broken.json", "{\"ring\": \"Z\", \"terms\": [");
    const auto invalid = dir.write("invalid.json", std::string("{\"ring\":\"Z\",\"terms\":[{\"coeff\":1,\"forest\":") +
                                                       [] {
                                                           auto j = Json::parse(kForestF);
                                                           j["squares"][0] = Json::array({1, 4});
                                                           return j.dump();
                                                       }() +
                                                       "}]}");

    EXPECT_EQ(run({"mul", "--lhs", good, "--rhs", other}).code, exit_code::usage);
    const auto b = run({"mul", "--lhs", good, "--rhs", broken});
    EXPECT_EQ(b.code, exit_code::parse);
    EXPECT_NE(b.err.find("byte"), std::string::npos) << b.err;
    EXPECT_NE(b.err.find("broken.json"), std::string::npos) << b.err;
    const auto v = run({"mul", "--lhs", invalid, "--rhs", good});
    EXPECT_EQ(v.code, exit_code::parse);
    EXPECT_NE(v.err.find("/terms/0/forest"), std::string::npos) << v.err;
    EXPECT_EQ(run({"mul", "--lhs", good, "--rhs", "/nonexistent/x.json"}).code, exit_code::parse);
}
