#include "doctest.h"
#include "support.hpp"

#include "layerq/error.hpp"
#include "layerq/io.hpp"
#include "layerq/photonic.hpp"

#include <filesystem>
#include <stdexcept>
#include <unistd.h>

using namespace layerq;

namespace {

std::filesystem::path scratch_dir() {
    auto p = std::filesystem::temp_directory_path() / ("layerq_io_" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("count files round-trip") {
    const auto rho = photonic::apply_white_noise(photonic::make_psi442(), 0.9);
    const auto records = tomography::simulate_counts(rho, tomography::witness_plan(0.66, 100), 3);
    const auto path = scratch_dir() / "counts.json";
    io::write_counts(path, records, {42u, std::nullopt});
    const auto back = io::read_counts(path);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].setting == records[i].setting);
        CHECK(back[i].outcome == records[i].outcome);
        CHECK(back[i].counts == records[i].counts);
    }
    const auto text = io::read_text(path);
    CHECK(text.find("\"seed\": 42") != std::string::npos);
    CHECK(text.find("timestamp") == std::string::npos);
}

TEST_CASE("bare arrays are accepted") {
    const auto r = io::parse_counts(R"([{"setting": "Z", "outcome": "000", "counts": 5}])");
    REQUIRE(r.size() == 1);
    CHECK(r[0].counts == 5.0);
}

TEST_CASE("malformed count files") {
    CHECK_THROWS_AS(io::parse_counts("{"), IoError);
    CHECK_THROWS_AS(io::parse_counts(R"({"foo": []})"), IoError);
    CHECK_THROWS_AS(io::parse_counts(R"([{"setting": "Z", "outcome": "000"}])"), IoError);
    CHECK_THROWS_AS(io::parse_counts(R"([{"setting": "Z", "outcome": "000", "counts": -2}])"), IoError);
    CHECK_THROWS_AS(io::parse_counts(R"([{"setting": "Z", "outcome": "000", "counts": 1.5}])"), IoError);
    CHECK_THROWS_AS(io::read_counts("/nonexistent/dir/counts.json"), IoError);
}

TEST_CASE("estimates CSV") {
    witness::ElementTable t;
    t.set({"000", "000", 0.25, 0.01, false});
    t.set({"000", "111", 0.2, 0.004, false});
    const auto csv = io::format_estimates_csv(t, {7u, std::string("2026-01-01T00:00:00Z")});
    CHECK(csv == "# seed=7\n# timestamp=2026-01-01T00:00:00Z\nlabel,value,std_dev\n"
                 "<000|rho|000>,0.25,0.01\n<000|rho|111>,0.2,0.004\n");
}

TEST_CASE("QKD CSV leaves pairwise cells empty for two-party layers") {
    qkd::QberReport r;
    r.layer = qkd::LayerId::Ab0;
    r.qber_z = {0.04, 0.0};
    r.qber_x = {0.05, 0.0};
    const auto csv = io::format_qkd_csv({{r, qkd::asymptotic_key_rate(r)}}, {});
    CHECK(csv.rfind("subspace,qber_z,qber_x,qber_z_ab,qber_z_ac,key_per_round_mean,key_per_round_pessimistic\n", 0) == 0);
    CHECK(csv.find("00/22,0.04,0.05,,,") != std::string::npos);
}

TEST_CASE("published fixtures load") {
    const auto sub = io::read_subspace_fixture(support::data_path("subspace_fidelities.json"));
    CHECK(sub.size() == 6);
    CHECK(sub[0].ket_a == "000");
    CHECK(sub[0].ket_b == "111");
    CHECK(sub[0].value == 0.910);
    CHECK(sub[0].std_dev == 0.029);
    const auto layers = io::read_qber_fixture(support::data_path("layer_qbers.json"));
    REQUIRE(layers.size() == 4);
    CHECK(layers[0].report.qber_x.value == 0.069);
    CHECK(layers[0].report.pair(0, 2)->value == 0.033);
    CHECK(layers[0].printed_rate == 0.428);
    CHECK(layers[2].report.pairwise.empty());
}

TEST_CASE("unwritable paths raise IoError") {
    CHECK_THROWS_AS(io::write_text("/proc/layerq/out.csv", "x"), IoError);
}
