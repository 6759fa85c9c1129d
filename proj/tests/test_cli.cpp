#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "dbd/table_io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "dbd_cli_test";

int run(const std::string& args) {
    fs::create_directories(kWork);
    const std::string cmd = std::string(DBDSIM_PATH) + " " + args + " > " + (kWork / "stdout").string() + " 2> " +
                            (kWork / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string data_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line, out;
    while (std::getline(in, line))
        if (!line.starts_with('#')) out += line + '\n';
    return out;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("exit codes") {
        CHECK(run("") == 2);
        CHECK(run("tscan --no-such-flag") == 2);
        CHECK(run("efficiency --sigma-p 0.5") == 2);
        CHECK(run("efficiency --strategy nope") == 2);
        CHECK(run("-c /nonexistent.json efficiency") == 2);
        CHECK(run("density --engine 5ls") == 2);
        CHECK(run("optimize-mirror") == 2);
        CHECK(run("tscan --strategy C-DBD --t-min 10 --t-max 400 --t-points 3") == 2);
        CHECK(slurp(kWork / "stderr").find("undersampled") != std::string::npos);
        CHECK(run("tscan --engine exact --strategy C-DBD --grid-n 1024 --grid-dp 0.015625 --sigma-p 0.15 "
                  "--t-min 390 --t-max 400 --t-points 3") == 3);
        CHECK(slurp(kWork / "stderr").find("grid boundary") != std::string::npos);
        CHECK(run("--help") == 0);
    }

    TEST_CASE("efficiency table") {
        REQUIRE(run("efficiency --strategy DS-DBD") == 0);
        std::istringstream in(slurp(kWork / "stdout"));
        dbd::OutputHeader h;
        const dbd::Table t = dbd::read_table(in, &h);
        CHECK(h.command == "efficiency");
        REQUIRE(t.rows.size() == 1);
        CHECK(t.text(0, "strategy") == "DS-DBD");
        CHECK(t.number(0, "eta_bs_5ls") > 0.9);
        CHECK(t.number(0, "eta_m_5ls") > 0.9);
    }

    TEST_CASE("output is deterministic and reproducible from its header") {
        const fs::path a = kWork / "a.csv", c = kWork / "c.csv", cfg = kWork / "cfg.json";
        const std::string args = "tscan --strategy OCT --sigma-p 0.02 --t-min 34 --t-max 36 --t-points 5";
        REQUIRE(run(args + " -o " + a.string()) == 0);
        const std::string first = slurp(a);
        REQUIRE(run(args + " -o " + a.string()) == 0);
        CHECK(slurp(a) == first);

        std::ifstream in(a);
        const dbd::OutputHeader h = dbd::read_header(in);
        nlohmann::json j = h.config;
        j["output"] = c.string();
        std::ofstream(cfg) << j.dump();
        REQUIRE(run("-c " + cfg.string() + " tscan") == 0);
        CHECK(data_lines(c) == data_lines(a));
        std::ifstream again(c);
        CHECK(dbd::read_header(again).config == j);
    }

    TEST_CASE("flags override the config file") {
        const fs::path cfg = kWork / "over.json";
        std::ofstream(cfg) << R"({"sigma_p": 0.03, "T": 50})";
        REQUIRE(run("-c " + cfg.string() + " --sigma-p 0.01 --dump-config efficiency") == 0);
        const auto j = nlohmann::json::parse(slurp(kWork / "stdout"));
        CHECK(j["sigma_p"] == 0.01);
        CHECK(j["T"] == 50.0);
    }
}
