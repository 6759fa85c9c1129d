#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dbd/errors.hpp"
#include "dbd/run_config.hpp"
#include "dbd/table_io.hpp"

using namespace dbd;

TEST_SUITE("config") {
    TEST_CASE("defaults survive a JSON round trip") {
        RunConfig cfg;
        cfg.strategy = "DS-DBD";
        cfg.engine = Engine::Both;
        cfg.sigma_p = 0.02;
        cfg.scan.values = {0.01, 0.02};
        cfg.robustness.shared_factor = true;
        const RunConfig back = config_from_json(to_json(cfg));
        CHECK(to_json(back) == to_json(cfg));
        CHECK(back.engine == Engine::Both);
        CHECK(back.scan.values == std::vector<double>{0.01, 0.02});
    }

    TEST_CASE("missing keys keep their defaults") {
        const RunConfig cfg = config_from_json(nlohmann::json::parse(R"({"T": 40, "grid": {"dt": 0.001}})"));
        CHECK(cfg.T == 40.0);
        CHECK(cfg.grid.dt == 0.001);
        CHECK(cfg.grid.n == 0);
        CHECK(cfg.sigma_p == 0.05);
        CHECK(cfg.optimizer.budget == 5000);
    }

    TEST_CASE("unknown keys and bad values are rejected") {
        using nlohmann::json;
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"sigma": 0.1})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"grid": {"points": 10}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"T": "long"})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"engine": "fast"})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"sigma_p": 0.3})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"strategy": "none"})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"tscan": {"points": 2}})")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse("[1, 2]")), ConfigError);
    }

    TEST_CASE("config files may carry comments") {
        const auto path = std::filesystem::temp_directory_path() / "dbd_config_test.json";
        std::ofstream(path) << "{\n  // cloud\n  \"sigma_p\": 0.01\n}\n";
        CHECK(load_config(path).sigma_p == 0.01);
        std::ofstream(path) << "{ \"sigma_p\": ";
        CHECK_THROWS_AS(load_config(path), ConfigError);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(load_config(path), ConfigError);
    }

    TEST_CASE("engine and strategy names") {
        for (Engine e : {Engine::FiveLevel, Engine::Exact, Engine::Both}) CHECK(parse_engine(to_string(e)) == e);
        RunConfig cfg;
        CHECK(cfg.strategies().size() == 4);
        cfg.strategy = "C-DBD";
        REQUIRE(cfg.strategies().size() == 1);
        CHECK(cfg.strategies()[0] == Strategy::CDbd);
    }

    TEST_CASE("exact grid follows the cloud unless given") {
        RunConfig cfg;
        CHECK(cfg.solver(50.0).grid == SpatialGrid::sized_for(0.05, 50.0));
        cfg.grid.n = 4096;
        cfg.grid.dp = 1.0 / 64.0;
        CHECK(cfg.solver(50.0).grid == SpatialGrid(4096, 1.0 / 64.0));
    }
}

TEST_SUITE("table_io") {
    TEST_CASE("numbers print with ten significant digits") {
        CHECK(format_number(0.5) == "0.5");
        CHECK(format_number(1.0 / 3.0) == "0.3333333333");
        CHECK(format_number(-2.0) == "-2");
    }

    TEST_CASE("header and table round trip") {
        OutputHeader h;
        h.command = "tscan";
        h.config = to_json(RunConfig{});
        h.seed = 42;
        h.notes = {"ports: P0=1"};
        Table t;
        t.columns = {"strategy", "T", "P_0"};
        t.add({std::string("DS-DBD"), 35.5, 0.125});
        t.add({std::string("OCT"), 36.0, 1e-12});
        std::stringstream ss;
        write_table(ss, h, t);
        CHECK(ss.str().rfind("# " + version_string(), 0) == 0);

        OutputHeader h2;
        const Table back = read_table(ss, &h2);
        CHECK(h2.command == "tscan");
        CHECK(h2.seed == 42);
        CHECK(h2.config == h.config);
        CHECK(back.columns == t.columns);
        REQUIRE(back.rows.size() == 2);
        CHECK(back.text(0, "strategy") == "DS-DBD");
        CHECK(back.number(1, "T") == 36.0);
        CHECK(back.number(1, "P_0") == 1e-12);
        CHECK_THROWS(back.column_index("P_9"));
    }

    TEST_CASE("rows must match the columns") {
        Table t;
        t.columns = {"a", "b"};
        CHECK_THROWS(t.add({1.0}));
    }
}
