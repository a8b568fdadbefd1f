#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>

#include "clmm/app.hpp"
#include "clmm/cli_io.hpp"
#include "clmm/liquidity_measure.hpp"

using namespace clmm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("clmm_cli_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "clmm_lab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = app::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

}  // namespace

TEST_CASE("empty tick list means zero liquidity everywhere", "[ticks]") {
    for (const char* text : {"[]", "{\"ticks\": []}", "{\"base\": 1.0001, \"ticks\": []}"}) {
        const auto prof = io::ingest_ticks(text);
        for (double p : {1e-6, 0.5, 1.0, 2.0, 1e6}) CHECK(prof.value(p) == 0.0);
        const auto r = reserves_from_atoms(prof, 1.7);
        CHECK(r.x == 0.0);
        CHECK(r.y == 0.0);
    }
}

TEST_CASE("two ticks give one finite range", "[ticks]") {
    const auto prof = io::ingest_ticks("[[0, 10], [100, 0]]");
    const double top = std::pow(1.0001, 100);
    CHECK(prof.value(std::nextafter(1.0, 0.0)) == 0.0);
    CHECK(prof.value(1.0) == 10.0);
    CHECK(prof.value(std::nextafter(top, 0.0)) == 10.0);
    CHECK(prof.value(top) == 0.0);
    CHECK(prof.value(1e9) == 0.0);
    // matches the single-position profile
    const auto pos = profile_from_positions({{10, 1.0, top}});
    for (double p : {0.5, 1.0, 1.004, top, 3.0}) {
        const auto a = reserves_from_atoms(prof, p);
        const auto b = reserves_from_atoms(pos, p);
        CHECK(a.x == Catch::Approx(b.x).margin(1e-14));
        CHECK(a.y == Catch::Approx(b.y).margin(1e-14));
    }
}

TEST_CASE("custom base and open-ended top range", "[ticks]") {
    const auto prof = io::ingest_ticks("{\"base\": 2, \"ticks\": [[-1, 3], [2, 5]]}");
    CHECK(prof.value(0.4) == 0.0);
    CHECK(prof.value(0.5) == 3.0);
    CHECK(prof.value(3.9) == 3.0);
    CHECK(prof.value(4.0) == 5.0);
    CHECK(prof.value(1e12) == 5.0);
}

TEST_CASE("bad tick entries report their line", "[ticks]") {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            io::ingest_ticks(text);
        } catch (const io::ParseError& e) {
            return e.line();
        }
        return 0;
    };
    SECTION("duplicate tick") {
        const std::string text = "{\"ticks\": [\n  [0, 1],\n  [5, 2],\n  [5, 3]\n]}";
        CHECK(line_of(text) == 4);
        CHECK_THROWS_WITH(io::ingest_ticks(text), Catch::Matchers::ContainsSubstring("duplicate tick index 5") &&
                                                       Catch::Matchers::ContainsSubstring("line 4"));
    }
    SECTION("negative liquidity") {
        const std::string text = "[\n  [0, 1],\n  [5, -2]\n]";
        CHECK(line_of(text) == 3);
        CHECK_THROWS_WITH(io::ingest_ticks(text), Catch::Matchers::ContainsSubstring(">= 0"));
    }
    SECTION("decreasing ticks") { CHECK(line_of("[[5, 1],\n[4, 1]]") == 2); }
    SECTION("non-integer tick") { CHECK(line_of("[[0.5, 1]]") == 1); }
    SECTION("wrong arity") { CHECK(line_of("[\n\n[1, 2, 3]]") == 3); }
    SECTION("malformed JSON") {
        const std::string text = "{\"ticks\": [\n  [0, 1],\n  [5 2]\n]}";
        CHECK(line_of(text) == 3);
        CHECK_THROWS_WITH(io::ingest_ticks(text), Catch::Matchers::ContainsSubstring("malformed JSON"));
    }
    SECTION("base must exceed one") {
        CHECK_THROWS_AS(io::ingest_ticks("{\"base\": 1, \"ticks\": []}"), io::ParseError);
        CHECK_THROWS_AS(io::ingest_ticks("{\"base\": \"x\", \"ticks\": []}"), io::ParseError);
    }
    SECTION("missing ticks key") { CHECK_THROWS_AS(io::ingest_ticks("{\"base\": 2}"), io::ParseError); }
    SECTION("ticks that overflow the price range") {
        CHECK_THROWS_AS(io::ingest_ticks("[[100000000, 1]]"), ValidationError);
    }
}

TEST_CASE("tick files carry their path in errors", "[ticks]") {
    const auto dir = scratch("ticks");
    io::write_text(dir / "bad.json", "[[1, 1], [1, 1]]");
    CHECK_THROWS_WITH(io::ingest_ticks_file(dir / "bad.json"), Catch::Matchers::ContainsSubstring("bad.json"));
    CHECK_THROWS_AS(io::ingest_ticks_file(dir / "missing.json"), ValidationError);
}

TEST_CASE("numbers format to the shortest round-trip form", "[csv]") {
    CHECK(io::format_number(0.1) == "0.1");
    CHECK(io::format_number(1.0) == "1");
    CHECK(io::format_number(-2.5e-300) == "-2.5e-300");
    CHECK(io::format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(io::format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    for (double v : {1.0 / 3.0, std::exp(1.0), 1e-310, 6.02214076e23, -0.0}) {
        CHECK(std::strtod(io::format_number(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("CSV tables", "[csv]") {
    io::CsvTable t({"name", "value", "count"});
    t.add_row({std::string("plain"), 0.25, std::int64_t{3}});
    t.add_row({std::string("needs, quoting \"here\""), 1e-20, std::int64_t{-1}});
    CHECK(t.str() == "name,value,count\nplain,0.25,3\n\"needs, quoting \"\"here\"\"\",1e-20,-1\n");
    CHECK_THROWS(t.add_row({1.0}));
    const auto dir = scratch("csv");
    t.write(dir / "t.csv");
    CHECK(io::read_file(dir / "t.csv") == t.str());
}

TEST_CASE("SVG line chart", "[svg]") {
    const std::vector<double> x{0, 1, 2};
    const auto svg = io::svg_line_chart("A < B", "t", x, {{"up", {0, 1, 4}}, {"flat", {1, 1, 1}}});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("A &lt; B") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK_THROWS(io::svg_line_chart("bad", "t", x, {{"short", {1.0}}}));
}

TEST_CASE("command-line exit codes", "[cli]") {
    const auto dir = scratch("cli");
    std::string out, err;
    SECTION("help") { CHECK(run_cli({"--help"}, &out) == 0); CHECK(out.find("verify") != std::string::npos); }
    SECTION("usage errors") {
        CHECK(run_cli({"--no-such-flag"}, &out, &err) == 2);
        CHECK(run_cli({}, &out, &err) == 2);
        CHECK(run_cli({"sim", "--pricing", "sideways"}, &out, &err) == 2);
    }
    SECTION("runtime errors print JSON") {
        CHECK(run_cli({"--out", dir.string(), "pool", "--position", "1:2:1"}, &out, &err) == 1);
        const auto j = nlohmann::json::parse(err);
        CHECK(j["error"] == "validation_error");
        CHECK(j["command"] == "pool");
        CHECK_FALSE(j["message"].get<std::string>().empty());
    }
    SECTION("pool output") {
        CHECK(run_cli({"--out", dir.string(), "--svg", "pool", "--position", "1:0.5:2", "--points", "5"}) == 0);
        const auto csv = io::read_file(dir / "pool.csv");
        CHECK(csv.rfind("price,liquidity,x,y,value\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
        CHECK(fs::exists(dir / "pool.svg"));
        CHECK(fs::exists(dir / "effective_config.toml"));
    }
    SECTION("tick file input") {
        io::write_text(dir / "ticks.json", "{\"ticks\": [[0, 10], [100, 0]]}");
        CHECK(run_cli({"--out", dir.string(), "pool", "--ticks", (dir / "ticks.json").string(), "--points", "3"}) == 0);
        io::write_text(dir / "bad.json", "[[0, 1],\n[0, 2]]");
        CHECK(run_cli({"--out", dir.string(), "pool", "--ticks", (dir / "bad.json").string()}, &out, &err) == 1);
        CHECK(nlohmann::json::parse(err)["error"] == "parse_error");
    }
    SECTION("effective config reproduces the run") {
        CHECK(run_cli({"--out", (dir / "a").string(), "--seed", "9", "sim", "--paths", "4", "--dt", "0.05"}) == 0);
        CHECK(run_cli({"--config", (dir / "a" / "effective_config.toml").string(), "--out", (dir / "b").string(), "sim"}) == 0);
        CHECK(io::read_file(dir / "a" / "sim_paths.csv") == io::read_file(dir / "b" / "sim_paths.csv"));
    }
    SECTION("JSON config") {
        io::write_text(dir / "c.json", R"({"seed": 5, "arb": {"finite": {"horizon": 2.0, "rows": 3}}})");
        CHECK(run_cli({"--config", (dir / "c.json").string(), "--out", dir.string(), "arb", "finite"}) == 0);
        const auto csv = io::read_file(dir / "arb_finite.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
        CHECK(csv.find("\n2,0,0,0,") != std::string::npos);
    }
    SECTION("output directory from the environment") {
        ::setenv(app::kOutputEnv, (dir / "env").string().c_str(), 1);
        const int rc = run_cli({"position", "--kmax", "1", "--kstep", "0.5"});
        ::unsetenv(app::kOutputEnv);
        CHECK(rc == 0);
        CHECK(fs::exists(dir / "env" / "position.csv"));
    }
}
