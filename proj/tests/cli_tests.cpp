// End-to-end tests of the command-line runner: subcommands, exit codes,
// artifact files, config/flag precedence, and byte-identical reruns.
//
// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "bessellab_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr merged
};

CliResult run_cli(const std::string& args) {
    static int call = 0;
    const fs::path capture = work_dir() / ("capture" + std::to_string(call++) + ".txt");
    const std::string cmd = std::string(BESSELLAB_CLI_PATH) + " " + args + " > " +
                            capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult res;
    if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
    std::ifstream in(capture);
    std::ostringstream buf;
    buf << in.rdbuf();
    res.output = buf.str();
    return res;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("list prints every experiment with anchor and defaults") {
    const CliResult res = run_cli("list");
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("beta-law") != std::string::npos);
    REQUIRE(res.output.find("meander-rayleigh") != std::string::npos);
    REQUIRE(res.output.find("hitting-barrier") != std::string::npos);
    REQUIRE(res.output.find("defaults:") != std::string::npos);
    // Alphabetical: beta-law appears before z-tower.
    REQUIRE(res.output.find("beta-law") < res.output.find("z-tower"));
}

TEST_CASE("run writes a schema-1 json report and exits zero on pass") {
    const fs::path out = work_dir() / "identity";
    const CliResult res = run_cli("run identity-suite --mu 0.5 --out " + out.string());
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("RESULT PASS") != std::string::npos);

    const auto j = nlohmann::json::parse(slurp(out / "identity-suite.json"));
    REQUIRE(j.at("schema").get<int>() == 1);
    REQUIRE(j.at("experiment_id").get<std::string>() == "identity-suite");
    REQUIRE(j.at("pass").get<bool>());
    REQUIRE(j.at("reports").size() == 7);
}

TEST_CASE("a failed check exits with status two") {
    const fs::path out = work_dir() / "asprinted";
    const CliResult res =
        run_cli("run identity-suite --mu 0.5 --as-printed --out " + out.string());
    REQUIRE(res.exit_code == 2);
    REQUIRE(res.output.find("FAIL") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(out / "identity-suite.json"));
    REQUIRE_FALSE(j.at("pass").get<bool>());
    REQUIRE(j.at("config").at("as-printed").get<bool>());
}

TEST_CASE("usage errors exit with status one") {
    const CliResult unknown = run_cli("run no-such-experiment");
    REQUIRE(unknown.exit_code == 1);
    REQUIRE(unknown.output.find("valid ids") != std::string::npos);
    REQUIRE(unknown.output.find("beta-law") != std::string::npos);

    REQUIRE(run_cli("run beta-law --mu 1.5").exit_code == 1);
    REQUIRE(run_cli("run beta-law --paths 0").exit_code == 1);
    REQUIRE(run_cli("").exit_code == 1);                    // subcommand required
    REQUIRE(run_cli("run beta-law --bogus 3").exit_code == 1);
}

TEST_CASE("numeric failures inside a run exit with status three") {
    // The pseudo-stopping construction is pinned to horizon 1 and refuses to
    // run elsewhere.
    const fs::path out = work_dir() / "numfail";
    const CliResult res = run_cli("run pseudo-stopping --horizon 2 --paths 50 "
                                  "--steps 500 --out " + out.string());
    REQUIRE(res.exit_code == 3);
    REQUIRE(res.output.find("numeric failure") != std::string::npos);
}

TEST_CASE("identical runs produce byte-identical artifacts") {
    const std::string flags = "run beta-law --paths 60 --steps 300 --seed 7 --out ";
    const fs::path a = work_dir() / "rerun_a";
    const fs::path b = work_dir() / "rerun_b";
    REQUIRE(run_cli(flags + a.string()).exit_code == 0);
    REQUIRE(run_cli(flags + b.string()).exit_code == 0);
    REQUIRE(slurp(a / "beta-law.json") == slurp(b / "beta-law.json"));
    REQUIRE(slurp(a / "beta-law-last-zero.csv") == slurp(b / "beta-law-last-zero.csv"));

    // Worker count is echoed in the config block but must not change any
    // result byte: reports and CSVs stay identical.
    const fs::path c = work_dir() / "rerun_c";
    REQUIRE(run_cli("run beta-law --paths 60 --steps 300 --seed 7 --workers 3 --out " +
                    c.string())
                .exit_code == 0);
    const auto ja = nlohmann::json::parse(slurp(a / "beta-law.json"));
    const auto jc = nlohmann::json::parse(slurp(c / "beta-law.json"));
    REQUIRE(ja.at("reports") == jc.at("reports"));
    REQUIRE(ja.at("pass") == jc.at("pass"));
    REQUIRE(slurp(a / "beta-law-last-zero.csv") == slurp(c / "beta-law-last-zero.csv"));

    // A different seed changes the estimate.
    const fs::path d = work_dir() / "rerun_d";
    REQUIRE(run_cli("run beta-law --paths 60 --steps 300 --seed 8 --out " + d.string())
                .exit_code == 0);
    REQUIRE(slurp(a / "beta-law.json") != slurp(d / "beta-law.json"));
}

TEST_CASE("config file applies and explicit flags win") {
    const fs::path cfg_file = work_dir() / "sweep.cfg";
    {
        std::ofstream out(cfg_file);
        out << "# sweep base\nmu=0.25\npaths=60\nsteps=300\nseed=4\n";
    }
    const fs::path out1 = work_dir() / "cfg_plain";
    REQUIRE(run_cli("run beta-law --config " + cfg_file.string() + " --out " +
                    out1.string())
                .exit_code == 0);
    auto j1 = nlohmann::json::parse(slurp(out1 / "beta-law.json"));
    REQUIRE(j1.at("config").at("mu").get<double>() == 0.25);
    REQUIRE(j1.at("config").at("paths").get<int>() == 60);
    REQUIRE(j1.at("config").at("seed").get<int>() == 4);

    const fs::path out2 = work_dir() / "cfg_override";
    REQUIRE(run_cli("run beta-law --config " + cfg_file.string() +
                    " --mu 0.75 --seed 12 --out " + out2.string())
                .exit_code == 0);
    auto j2 = nlohmann::json::parse(slurp(out2 / "beta-law.json"));
    REQUIRE(j2.at("config").at("mu").get<double>() == 0.75);   // flag beat file
    REQUIRE(j2.at("config").at("seed").get<int>() == 12);      // flag beat file
    REQUIRE(j2.at("config").at("paths").get<int>() == 60);     // file kept

    const fs::path bad = work_dir() / "bad.cfg";
    {
        std::ofstream out(bad);
        out << "mu 0.25\n";
    }
    REQUIRE(run_cli("run beta-law --config " + bad.string()).exit_code == 1);
    REQUIRE(run_cli("run beta-law --config " + (work_dir() / "missing.cfg").string())
                .exit_code == 1);
}

TEST_CASE("dump-paths writes deterministic columnar batches") {
    const fs::path f1 = work_dir() / "dump1.txt";
    const fs::path f2 = work_dir() / "dump2.txt";
    const std::string flags = "dump-paths --paths 3 --steps 50 --seed 2 --out ";
    REQUIRE(run_cli(flags + f1.string()).exit_code == 0);
    REQUIRE(run_cli(flags + f2.string()).exit_code == 0);
    const std::string text = slurp(f1);
    REQUIRE(text == slurp(f2));
    REQUIRE(text.rfind("# bessellab paths construction=direct", 0) == 0);
    REQUIRE(text.find("path time r l clock") != std::string::npos);

    const fs::path f3 = work_dir() / "dump3.txt";
    REQUIRE(run_cli("dump-paths --construction time-change --paths 2 --steps 400 "
                    "--seed 2 --out " + f3.string())
                .exit_code == 0);
    REQUIRE(slurp(f3).find("construction=time-change") != std::string::npos);

    REQUIRE(run_cli("dump-paths --construction bogus").exit_code == 1);
}
