#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "mttlab/format.hpp"
#include "mttlab/normalize.hpp"
#include "oracles/corpus.hpp"

using namespace mttlab;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args) {
    args.push_back("--json");
    Run r = run(args);
    REQUIRE(r.code == cli::ok);
    return json::parse(r.out);
}

std::string fx(const std::string& name) { return oracle::fixture_path(name); }

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "mttlab_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string write(const std::string& name, const std::string& text) {
    auto p = scratch(name);
    std::ofstream(p) << text;
    return p.string();
}

}  // namespace

TEST_CASE("file format round trip") {
    for (auto& name : oracle::fixture_names()) {
        Mtt m = oracle::fixture(name);
        std::string text = print_mtt(m);
        CHECK(print_mtt(parse_mtt(text)) == text);
    }
    for (const Mtt& m : oracle::corpus(20)) CHECK(print_mtt(parse_mtt(print_mtt(m))) == print_mtt(m));
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse_mtt("name X\ninput a/0\noutput a/0\nstates q0/0\ninitial q0\nq0, a -> a(\n");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 6);
        CHECK(e.column() > 0);
    }
}

TEST_CASE("duplicate rule keys") {
    Mtt m = parse_mtt("name D\ninput a/0\noutput b/0 c/0\nstates q0/0\ninitial q0\nq0, a -> b\nq0, a -> c\n");
    CHECK(validate(m).has(ViolationKind::determinism));
}

TEST_CASE("eval") {
    Run r = run({"eval", fx("REVDEWEY"), "a(a(e))"});
    CHECK(r.code == cli::ok);
    CHECK(r.out == "f(f(1(1(e)), 2(1(e))), f(1(2(e)), 2(2(e))))\n");
    json j = run_json({"eval", fx("REVDEWEY"), "a(a(e))"});
    CHECK(j["output"] == "f(f(1(1(e)), 2(1(e))), f(1(2(e)), 2(2(e))))");
    CHECK(j["height"] == 5);
    CHECK(run({"eval", fx("REVDEWEY"), "a(zz)"}).code == cli::invalid_input);
}

TEST_CASE("validate") {
    CHECK(run({"validate", fx("IDENT")}).code == cli::ok);
    std::string broken = write("broken.mtt", "name B\ninput f/2 a/0\noutput a/0\nstates q0/0\ninitial q0\nq0, a -> a\n");
    Run r = run({"validate", broken, "--json"});
    CHECK(r.code == cli::invalid_input);
    json j = json::parse(r.out);
    CHECK(j["ok"] == false);
    CHECK(!j["violations"].empty());
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == cli::usage);
    CHECK(run({"decide", "xyz", fx("IDENT")}).code == cli::usage);
    CHECK(run({"frobnicate"}).code == cli::usage);
    CHECK(run({"eval", "/nonexistent.mtt", "a"}).code == cli::invalid_input);
}

TEST_CASE("decide payload equals the library report") {
    json j = run_json({"decide", "lshi", fx("NEST2")});
    CHECK(j["verdict"] == false);
    CHECK(j["loop"]["kind"] == "Nesting");
    auto r = decide_lshi(oracle::fixture("NEST2"));
    json lib = cli::decision_json(r, "lshi");
    j.erase("timings");
    lib.erase("timings");
    CHECK(j == lib);

    json ml = run_json({"decide", "lhi", fx("MLNEST")});
    CHECK(ml["verdict"] == false);
    CHECK(ml["loop"]["kind"] == "MLNesting");
    json d = run_json({"decide", "lhi", fx("DOUBLE")});
    CHECK(d["verdict"] == true);
    CHECK(d["bound"]["factor"].get<long>() >= 1);
    CHECK(run({"decide", "lshi", fx("NEST2")}).out.rfind("LSHI false", 0) == 0);
}

TEST_CASE("normalize") {
    json j = run_json({"normalize", fx("IMPROP"), "--trace"});
    CHECK(j["iterations"].get<int>() >= 1);
    CHECK(j["trace"].size() == j["iterations"].get<std::size_t>() + 1);
    Mtt n = parse_mtt(j["mtt"].get<std::string>());
    CHECK(is_depth_proper(n).proper);
    CHECK(print_mtt(n) == print_mtt(depth_proper(oracle::fixture("IMPROP")).mtt));
    auto out = scratch("improp_normal.mtt");
    CHECK(run({"normalize", fx("IMPROP"), "-o", out.string()}).code == cli::ok);
    CHECK(print_mtt(load_mtt(out.string())) == print_mtt(n));
}

TEST_CASE("pout") {
    json j = run_json({"pout", fx("IMPROP"), "--state", "q", "--param", "1", "--la", "p", "--budget", "6"});
    CHECK(j["finite"] == true);
    CHECK(j["forms"] == json::array({"y1", "h($, y1)"}));
    CHECK(j["enumerated"]["forms"] == j["forms"]);
    json n = run_json({"pout", fx("NEST2"), "--state", "q", "--param", "1", "--la", "p"});
    CHECK(n["finite"] == false);
    CHECK(n.contains("witness"));
    CHECK(run({"pout", fx("NEST2"), "--state", "nope", "--param", "1", "--la", "p"}).code == cli::invalid_input);
}

TEST_CASE("gadget and profiles") {
    auto g = scratch("gadget.mtt");
    CHECK(run({"gadget", fx("CONSTB"), fx("CONSTC"), "-o", g.string()}).code == cli::ok);
    json p = run_json({"profile", "lsoi", g.string(), "--inputs", "a^N(e)", "--range", "2:11"});
    REQUIRE(p["samples"].size() == 10);
    for (std::size_t k = 0; k < 10; ++k) CHECK(p["samples"][k]["value"].get<std::uint64_t>() >= (1u << (k + 1)));
    CHECK(p["fit"]["hint"] == "SuperLinear");

    Run csv = run({"profile", "height", fx("NEST2"), "--inputs", "a^N(e)", "--range", "1:4", "--csv"});
    CHECK(csv.code == cli::ok);
    CHECK(csv.out.rfind("input,input_size,input_height,height\n", 0) == 0);
    CHECK(csv.out.find("\"a(a(a(e)))\",4,4,5") != std::string::npos);

    CHECK(run({"profile", "size", fx("NEST2"), "--inputs", "a^N(e)"}).code == cli::usage);
    CHECK(to_string(cli::expand_pattern("f(a^N(e), b)", 2)) == "f(a(a(e)), b)");
}

TEST_CASE("equiv-sample") {
    json none = run_json({"equiv-sample", fx("IDENT"), fx("IDENT")});
    CHECK(none["counterexample"].is_null());
    json c = run_json({"equiv-sample", fx("CONSTB"), fx("CONSTC"), "--budget", "4"});
    CHECK(c["counterexample"]["input"] == "e");
}
