#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    std::string errfile = "/tmp/sudler_cli_err_" + std::to_string(counter++) + ".txt";
    std::string cmd = std::string(CLI_BINARY_PATH) + " " + args + " 2>" + errfile;
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream ef(errfile);
    std::stringstream ss;
    ss << ef.rdbuf();
    r.err = ss.str();
    std::remove(errfile.c_str());
    return r;
}

} // namespace

TEST_CASE("ostrowski encode emits the documented JSON", "[cli]") {
    RunResult r = run_cli("ostrowski encode --alpha golden --n 4 --depth 4");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["n"] == "4");
    CHECK(j["digits"] == nlohmann::json({"0", "1", "0", "1"}));
    CHECK(j["schema_version"] == 1);
}

TEST_CASE("ostrowski decode inverts encode", "[cli]") {
    RunResult r = run_cli("ostrowski decode --alpha golden --digits 0,1,0,1 --depth 4");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["n"] == "4");
}

TEST_CASE("sudler eval CSV schema", "[cli]") {
    RunResult r = run_cli("sudler eval --alpha golden --n 100");
    REQUIRE(r.exit_code == 0);
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "# schema_version=1");
    std::getline(is, line);
    CHECK(line == "N,logP,err,method");
    std::getline(is, line);
    CHECK(line.rfind("100,", 0) == 0);
    CHECK(line.find(",direct") != std::string::npos);
    CHECK(line.find(';') == std::string::npos); // '.' decimal separator only

    RunResult d = run_cli("sudler eval --alpha cf:0;2,(2) --n 50 --method decomposed");
    REQUIRE(d.exit_code == 0);
    CHECK(d.out.find(",decomposed") != std::string::npos);
}

TEST_CASE("direct and decomposed CLI values agree", "[cli]") {
    RunResult a = run_cli("sudler eval --alpha random:seed=3:bits=512 --n 200 --depth 10");
    RunResult b = run_cli(
        "sudler eval --alpha random:seed=3:bits=512 --n 200 --depth 10 --method decomposed");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    auto value_of = [](const std::string& out) {
        auto pos = out.rfind('\n', out.size() - 2);
        std::string row = out.substr(pos + 1);
        auto c1 = row.find(','), c2 = row.find(',', row.find(',') + 1);
        return std::stod(row.substr(c1 + 1, c2 - c1 - 1));
    };
    CHECK(value_of(a.out) == Catch::Approx(value_of(b.out)).margin(1e-9));
}

TEST_CASE("usage errors name the offending flag and exit 2", "[cli]") {
    RunResult r = run_cli("sudler eval --alpha golden --n -5");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("--n") != std::string::npos);

    RunResult r2 = run_cli("sudler eval --alpha golden --n 10 --method sideways");
    CHECK(r2.exit_code == 2);
    CHECK(r2.err.find("method") != std::string::npos);
}

TEST_CASE("precision exhaustion exits 3 with machine-readable JSON", "[cli]") {
    RunResult r = run_cli("cf --alpha dec:0.61803:bits=64 --depth 30");
    CHECK(r.exit_code == 3);
    auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"] == "PrecisionExhausted");
}

TEST_CASE("budget exhaustion exits 4", "[cli]") {
    RunResult r = run_cli("metrics max-period --alpha golden --depth 40 --budget 100");
    CHECK(r.exit_code == 4);
    auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"] == "BudgetExceeded");
}

TEST_CASE("density scan CSV header is exact and runs are byte-identical", "[cli]") {
    std::string cmd =
        "density scan --alpha random:seed=9:bits=512 --psi klogk:1.0 --from 3 --to 4000";
    RunResult r1 = run_cli(cmd);
    REQUIRE(r1.exit_code == 0);
    std::istringstream is(r1.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "# schema_version=1");
    std::getline(is, line);
    CHECK(line == "M_lo,M_hi,upper_count,lower_count,indeterminate,total");
    std::getline(is, line);
    CHECK(line.rfind("3,4000,", 0) == 0);

    RunResult r2 = run_cli(cmd);
    CHECK(r1.out == r2.out); // determinism

    RunResult r4 = run_cli(cmd + " --threads 4");
    CHECK(r1.out == r4.out); // thread-count invariance
}

TEST_CASE("verify report JSON matches the schema", "[cli]") {
    RunResult r = run_cli("verify --alpha cf:0;1,1,1,1000,(1) --depth 5 --check eps");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.contains("name"));
    CHECK(j.contains("instances"));
    CHECK(j.contains("violations"));
    CHECK(j.contains("worst_margin"));
    CHECK(j.contains("fitted_constant"));
    CHECK(j["violations"] == 0);

    RunResult rv = run_cli("verify --alpha cf:0;2,(2) --depth 8 --check vk");
    REQUIRE(rv.exit_code == 0);
    auto jv = nlohmann::json::parse(rv.out);
    CHECK(jv["violations"] == 0);
}

TEST_CASE("metrics subcommands emit stable JSON", "[cli]") {
    RunResult r = run_cli("metrics constant-v");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::fabs(j["value"].get<double>() - 0.1615) < 5e-4);

    RunResult c = run_cli("metrics c-of-t --t 1");
    auto jc = nlohmann::json::parse(c.out);
    CHECK(std::fabs(jc["value"].get<double>() - 0.31731) < 1e-5);

    RunResult e = run_cli("metrics ensemble --kind kl --n 5 --depth 50 --seed 4");
    REQUIRE(e.exit_code == 0);
    std::istringstream is(e.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "# schema_version=1");
    std::getline(is, line);
    CHECK(line == "index,seed,value");
}

TEST_CASE("config dump round-trips through the parser", "[cli]") {
    for (const char* args :
         {"sudler eval --alpha golden --n 100 --method direct",
          "density scan --alpha cf:0;2,(2) --psi klogk:1.0 --from 2 --to 1000",
          "metrics ensemble --kind kl --n 20 --depth 100 --seed 7"}) {
        RunResult r1 = run_cli(std::string(args) + " --dump-config");
        REQUIRE(r1.exit_code == 0);
        std::string canonical = r1.out.substr(0, r1.out.size() - 1);
        RunResult r2 = run_cli(canonical + " --dump-config");
        REQUIRE(r2.exit_code == 0);
        CHECK(r1.out == r2.out);
    }
}
