#include "doctest.h"
#include "support.hpp"

#include "layerq/layerq.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace {

std::string scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("layerq_capi_" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return (p / name).string();
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::strlen(layerq_version()) > 0);
    CHECK(std::string(layerq_status_name(LAYERQ_ERR_MISSING_DATA)) == "missing data");
}

TEST_CASE("state handles") {
    layerq_state* closed = nullptr;
    layerq_state* circuit = nullptr;
    double p = 0;
    REQUIRE(layerq_state_psi442(&closed) == LAYERQ_OK);
    REQUIRE(layerq_state_from_circuit(&circuit, &p) == LAYERQ_OK);
    CHECK(p == doctest::Approx(0.25));
    double dist = 1;
    CHECK(layerq_state_distance(closed, circuit, &dist) == LAYERQ_OK);
    CHECK(dist < 1e-12);

    int dims[3] = {};
    size_t n = 0;
    CHECK(layerq_state_dims(closed, dims, 3, &n) == LAYERQ_OK);
    CHECK(n == 3);
    CHECK(dims[0] == 4);
    CHECK(dims[2] == 2);
    int ranks[3] = {};
    CHECK(layerq_state_rank_vector(closed, 0.0, ranks, 3, &n) == LAYERQ_OK);
    CHECK(ranks[0] == 4);
    CHECK(ranks[1] == 4);
    CHECK(ranks[2] == 2);

    double re[32], im[32];
    CHECK(layerq_state_amplitudes(closed, re, im, 32, &n) == LAYERQ_OK);
    CHECK(n == 32);
    CHECK(re[0] == doctest::Approx(0.5));
    CHECK(re[20] == doctest::Approx(0.5));   // |220>

    const int cls[3] = {4, 3, 2};
    double fmax = 0;
    CHECK(layerq_state_fmax(closed, cls, 3, &fmax) == LAYERQ_OK);
    CHECK(fmax == doctest::Approx(0.75));

    layerq_state_free(closed);
    layerq_state_free(circuit);
    layerq_state_free(nullptr);
}

TEST_CASE("errors carry codes and messages") {
    CHECK(layerq_state_psi442(nullptr) == LAYERQ_ERR_INVALID_ARGUMENT);
    CHECK(std::string(layerq_last_error()).find("NULL") != std::string::npos);

    layerq_state* psi = nullptr;
    REQUIRE(layerq_state_psi442(&psi) == LAYERQ_OK);
    layerq_density* rho = nullptr;
    CHECK(layerq_density_white_noise(psi, 1.5, &rho) == LAYERQ_ERR_INVALID_ARGUMENT);
    CHECK(rho == nullptr);

    layerq_counts* counts = nullptr;
    CHECK(layerq_counts_load("/nonexistent/counts.json", &counts) == LAYERQ_ERR_IO);
    CHECK(std::string(layerq_last_error()).find("/nonexistent/counts.json") != std::string::npos);

    double h = 0;
    CHECK(layerq_binary_entropy(2.0, &h) == LAYERQ_ERR_INVALID_ARGUMENT);
    CHECK(layerq_binary_entropy(0.5, &h) == LAYERQ_OK);
    CHECK(h == doctest::Approx(1.0));
    layerq_state_free(psi);
}

TEST_CASE("estimate pipeline through the C API") {
    layerq_state* psi = nullptr;
    layerq_density* rho = nullptr;
    layerq_counts* counts = nullptr;
    layerq_estimates* est = nullptr;
    REQUIRE(layerq_state_psi442(&psi) == LAYERQ_OK);
    REQUIRE(layerq_density_white_noise(psi, 0.8493, &rho) == LAYERQ_OK);
    REQUIRE(layerq_counts_simulate(rho, 0.66, 1800, 5, &counts) == LAYERQ_OK);
    CHECK(layerq_counts_size(counts) > 0);

    const auto path = scratch("counts.json");
    const layerq_metadata meta{1, 5, 0};
    REQUIRE(layerq_counts_save(counts, path.c_str(), &meta) == LAYERQ_OK);
    layerq_counts* loaded = nullptr;
    REQUIRE(layerq_counts_load(path.c_str(), &loaded) == LAYERQ_OK);
    CHECK(layerq_counts_size(loaded) == layerq_counts_size(counts));

    REQUIRE(layerq_estimates_from_counts(loaded, 150, 5, &est) == LAYERQ_OK);
    CHECK(layerq_estimates_size(est) == 38);
    layerq_element e{};
    REQUIRE(layerq_estimates_element(est, 0, &e) == LAYERQ_OK);
    CHECK(std::string(e.bra) == "000");
    CHECK(layerq_estimates_element(est, 38, &e) == LAYERQ_ERR_INVALID_ARGUMENT);
    double f = 0, sd = 0;
    REQUIRE(layerq_estimates_fidelity(est, &f, &sd) == LAYERQ_OK);
    CHECK(f > 0.8);
    CHECK(sd > 0.0);
    layerq_estimates_info info{};
    REQUIRE(layerq_estimates_info_get(est, &info) == LAYERQ_OK);
    CHECK(info.trials == 150);
    CHECK(info.degenerate == 0);

    CHECK(layerq_estimates_subspace(est, "000", "111", &f, &sd) == LAYERQ_OK);
    CHECK(f > 0.9);
    CHECK(layerq_estimates_subspace(est, "000", "123", &f, &sd) == LAYERQ_ERR_INVALID_ARGUMENT);
    CHECK(layerq_estimates_subspace(est, "000", "000", &f, &sd) == LAYERQ_ERR_INVALID_ARGUMENT);

    const auto csv = scratch("est.csv");
    CHECK(layerq_estimates_save_csv(est, csv.c_str(), &meta) == LAYERQ_OK);
    CHECK(std::filesystem::exists(csv));

    layerq_estimates_free(est);
    layerq_counts_free(loaded);
    layerq_counts_free(counts);
    layerq_density_free(rho);
    layerq_state_free(psi);
}

TEST_CASE("fixtures through the C API") {
    layerq_estimates* est = nullptr;
    REQUIRE(layerq_estimates_load_fixture(support::data_path("measured_elements.json").c_str(), &est) == LAYERQ_OK);
    double f = 0, sd = 0;
    layerq_estimates_fidelity(est, &f, &sd);
    CHECK(std::abs(f - 0.854) < 1e-3);
    CHECK(sd == 0.007);
    layerq_certification c{};
    REQUIRE(layerq_certify(f, sd, 0.75, &c) == LAYERQ_OK);
    CHECK(c.certified == 1);
    CHECK(c.whole_sigmas >= 14);
    layerq_estimates_free(est);

    layerq_qkd* q = nullptr;
    REQUIRE(layerq_qkd_load_fixture(support::data_path("layer_qbers.json").c_str(), &q) == LAYERQ_OK);
    REQUIRE(layerq_qkd_size(q) == 4);
    layerq_layer_report r{};
    REQUIRE(layerq_qkd_layer(q, 0, &r) == LAYERQ_OK);
    CHECK(std::string(r.subspace) == "000/111");
    CHECK(r.rate_mean == doctest::Approx(0.4286).epsilon(1e-4 / 0.4286));
    CHECK(r.printed_rate == 0.428);
    REQUIRE(layerq_qkd_layer(q, 2, &r) == LAYERQ_OK);
    CHECK(r.has_pairwise == 0);
    CHECK(std::isnan(r.qber_z_ab));
    REQUIRE(layerq_qkd_inject_qber_x(q, 0.5) == LAYERQ_OK);
    for (size_t i = 0; i < 4; ++i) {
        layerq_qkd_layer(q, i, &r);
        CHECK(r.rate_mean == 0.0);
    }
    CHECK(layerq_qkd_inject_qber_x(q, 1.5) == LAYERQ_ERR_INVALID_ARGUMENT);
    layerq_qkd_free(q);
}

TEST_CASE("qkd simulation through the C API") {
    layerq_state* psi = nullptr;
    layerq_density* rho = nullptr;
    layerq_qkd* q = nullptr;
    REQUIRE(layerq_state_psi442(&psi) == LAYERQ_OK);
    REQUIRE(layerq_density_white_noise(psi, 1.0, &rho) == LAYERQ_OK);
    REQUIRE(layerq_qkd_simulate(rho, 5000, 3, &q) == LAYERQ_OK);
    layerq_layer_report r{};
    for (size_t i = 0; i < layerq_qkd_size(q); ++i) {
        layerq_qkd_layer(q, i, &r);
        CHECK(r.rate_mean == doctest::Approx(1.0));
        CHECK(std::isnan(r.printed_rate));
    }
    const auto csv = scratch("qkd.csv");
    CHECK(layerq_qkd_save_csv(q, csv.c_str(), nullptr) == LAYERQ_OK);
    layerq_key_agreement k{};
    REQUIRE(layerq_key_agreement_simulate(rho, 20000, 1, &k) == LAYERQ_OK);
    CHECK(k.abc_agreement == 1.0);
    CHECK(k.ab_agreement == 1.0);
    layerq_qkd_free(q);
    layerq_density_free(rho);
    layerq_state_free(psi);
}
