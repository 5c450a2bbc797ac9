#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "detmet/config.hpp"
#include "detmet/csv_io.hpp"
#include "test_helpers.hpp"

using namespace detmet;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("detmet_test_" + name) {
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("well-formed matrix ingests") {
    TempFile file("ok.csv", "file_id,avA,avB\nf1,1,0\nf2,0,0\nf3,1,1\n");
    const IngestResult in = ingest(file.path);
    CHECK(in.matrix.files() == 3);
    CHECK(in.matrix.detectors() == 2);
    CHECK(in.matrix.detector_names[0] == "avA");
    CHECK(in.matrix.labels(0, 0) == 1);
    CHECK(in.matrix.labels(1, 1) == 0);
    CHECK(in.stats.rows_accepted == 3);
}

TEST_CASE("bad label value names the line") {
    TempFile file("bad.csv", "file_id,a,b\nf1,1,0\nf2,2,0\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(ingest(file.path)),
                         doctest::Contains("line 3"), ParseError);
}

TEST_CASE("width mismatch is rejected") {
    TempFile file("wide.csv", "file_id,a,b\nf1,1,0,1\n");
    CHECK_THROWS_AS(static_cast<void>(ingest(file.path)), ParseError);
}

TEST_CASE("lenient mode drops and reports") {
    TempFile file("mixed.csv", "file_id,a,b\nf1,1,0\nf2,x,0\nf3,0,1\n");
    IngestOptions options;
    options.lenient = true;
    const IngestResult in = ingest(file.path, {}, options);
    CHECK(in.matrix.files() == 2);
    CHECK(in.stats.rows_dropped == 1);
    REQUIRE(in.stats.diagnostics.size() == 1);
    CHECK(in.stats.diagnostics[0].find("line 3") != std::string::npos);
}

TEST_CASE("truth file must cover exactly the matrix ids") {
    TempFile matrix("m.csv", "file_id,a,b\nf1,1,0\nf2,0,0\n");
    SUBCASE("matching truth") {
        TempFile truth("t_ok.csv", "file_id,truth\nf2,0\nf1,1\n");
        const IngestResult in = ingest(matrix.path, truth.path);
        REQUIRE(in.truth.has_value());
        CHECK(in.truth->truth[0] == 1);  // aligned to matrix order
        CHECK(in.truth->truth[1] == 0);
    }
    SUBCASE("extra id") {
        TempFile truth("t_extra.csv", "file_id,truth\nf1,1\nf2,0\nf9,1\n");
        CHECK_THROWS_AS(static_cast<void>(ingest(matrix.path, truth.path)), TruthMismatch);
    }
    SUBCASE("missing id") {
        TempFile truth("t_missing.csv", "file_id,truth\nf1,1\n");
        CHECK_THROWS_AS(static_cast<void>(ingest(matrix.path, truth.path)), TruthMismatch);
    }
}

TEST_CASE("ingest then serialize round-trips byte-identically") {
    const std::string text = "file_id,alpha,beta,gamma\nf1,1,0,1\nf2,0,0,0\nf3,1,1,1\nf4,0,1,0\n";
    TempFile file("round.csv", text);
    const IngestResult in = ingest(file.path);
    std::ostringstream out;
    write_matrix_csv(in.matrix, out);
    CHECK(out.str() == text);
}

TEST_CASE("profiles csv round-trips") {
    std::vector<std::string> names = {"a", "b"};
    std::vector<DetectorProfile> profiles = {{0.123456789012345, 0.5}, {0.0, 1.0}};
    std::ostringstream out;
    write_profiles_csv(names, profiles, out);
    TempFile file("profiles.csv", out.str());
    const auto rows = read_profiles_csv(file.path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].first == "a");
    CHECK(rows[0].second.fp == profiles[0].fp);
    CHECK(rows[1].second.fn == 1.0);
}

TEST_CASE("run config parsing") {
    const RunConfig cfg = parse_run_config_text(
        "# reproduction setup\n"
        "mode = mc\n"
        "mc_samples = 5000000\n"
        "seed = 99\n"
        "m = 100000\n"
        "pi1 = 0.58579\n"
        "profiles = fixture\n"
        "kappa = 35\n"
        "replicates = 100\n");
    CHECK(cfg.mode == TailMode::MonteCarlo);
    CHECK(cfg.mc_samples == 5'000'000);
    CHECK(cfg.seed == 99);
    CHECK(cfg.kappa == 35);
    const SimConfig sim = cfg.sim_config();
    CHECK(sim.n == 35);
    CHECK(sim.pi1 == doctest::Approx(0.58579));
    CHECK(sim.n_replicates == 100);
}

TEST_CASE("unknown config keys are rejected") {
    CHECK_THROWS_AS(parse_run_config_text("mode = exact\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text("mode = sometimes\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text("m 100\n"), ConfigError);
}

TEST_CASE("config echo carries every resolved field") {
    const RunConfig cfg = parse_run_config_text("seed = 7\nepsilon = 0.3\nn = 15\n");
    const auto echo = cfg.echo();
    CHECK(echo.at("seed") == "7");
    CHECK(echo.at("epsilon") == "0.3");
    CHECK(echo.at("n") == "15");
    CHECK(echo.at("mode") == "exact");
}
