// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "support.hpp"

#include "layerq/io.hpp"
#include "layerq/photonic.hpp"
#include "layerq/qkd.hpp"
#include "layerq/tomography.hpp"
#include "layerq/witness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace layerq;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome state_construction() {
    const auto t0 = Clock::now();
    const auto circuit = photonic::layered_source();
    const auto closed = photonic::make_psi442();
    const double dist = amplitude_distance(circuit.state, closed);
    const auto rv = rank_vector(closed);
    const auto rv_circuit = rank_vector(circuit.state);
    const double dt = seconds_since(t0);
    const bool ok = dist < 1e-12 && rv == std::vector<int>{4, 4, 2} && rv_circuit == rv && dt < 1.0;
    return {ok, fmt("distance %.3g (< 1e-12), rank vector (%d,%d,%d) expected (4,4,2), %.3f s (< 1 s)", dist, rv[0],
                    rv[1], rv[2], dt)};
}

Outcome witness_bound() {
    const auto t0 = Clock::now();
    const auto psi = photonic::make_psi442();
    const double fmax = witness::layered_fmax();
    // Both class members: rank 3 on B (4,3,2) and rank 3 on A (3,4,2).
    const auto on_b = support::hill_climb_overlap(psi, 1, 3, 10000, 60, 2024, 0.75);
    const auto on_a = support::hill_climb_overlap(psi, 0, 3, 10000, 60, 2025, 0.75);
    const double best = std::max(on_b.best, on_a.best);
    const double violation = std::max(on_b.worst_violation, on_a.worst_violation);
    const double dt = seconds_since(t0);
    const bool ok = std::abs(fmax - 0.75) < 1e-12 && best >= 0.749 && violation <= 1e-6 &&
                    on_b.rank_respected && on_a.rank_respected && dt < 300.0;
    return {ok, fmt("fmax %.12f (0.750), oracle best %.6f (>= 0.749), max excess %.2e (<= 1e-6), %zu restarts, "
                    "%.1f s",
                    fmax, best, violation, on_b.restarts + on_a.restarts, dt)};
}

Outcome fidelity_reproduction() {
    const auto fx = io::read_element_fixture(support::data_path("measured_elements.json"));
    const double f = witness::fidelity_from_elements(fx.elements);
    const auto cert = witness::certify_dimensionality(f, 0.007, witness::layered_fmax());
    const bool ok = std::abs(f - 0.854) <= 0.001 && cert.sigma_margin >= 14.0 && cert.certified;
    return {ok, fmt("F %.5f (published 0.854 +- 0.001), margin %.2f sigma with sigma 0.007 (>= 14)", f,
                    cert.sigma_margin)};
}

Outcome monte_carlo_errors() {
    const auto t0 = Clock::now();
    const auto rho = photonic::apply_white_noise(photonic::make_psi442(), 0.8493);
    const std::size_t trials = 1000;
    std::vector<double> totals, sigmas;
    double sigma_base = 0.0;
    for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
        const auto plan = tomography::witness_plan(0.66 * scale, 1800.0);
        const auto counts = tomography::simulate_counts(rho, plan, 31);
        const auto mc = tomography::monte_carlo_errors(counts, trials, 31);
        double total = 0.0;
        for (const auto& r : counts) total += r.counts;
        totals.push_back(total);
        sigmas.push_back(mc.fidelity_std);
        if (scale == 1.0) sigma_base = mc.fidelity_std;
    }
    const double slope = support::loglog_slope(totals, sigmas);
    const bool ok = sigma_base >= 0.004 && sigma_base <= 0.012 && std::abs(slope + 0.5) <= 0.05;
    return {ok, fmt("sigma(F) %.5f in [0.004, 0.012] (published 0.007), %zu trials; scaling exponent %.3f "
                    "(-0.5 +- 0.05) over 3 decades; %.1f s",
                    sigma_base, trials, slope, seconds_since(t0))};
}

Outcome estimator_consistency() {
    std::mt19937_64 rng(5150);
    const auto psi = photonic::make_psi442();
    const auto plan = tomography::witness_plan(1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto rho = support::random_density(witness::layered_dims(), rng, 1 + t % 32);
        const auto est = tomography::estimate_elements(tomography::expected_counts(rho, plan));
        worst = std::max(worst, std::abs(est.fidelity - fidelity_pure(rho, psi)));
    }
    return {worst <= 1e-9, fmt("max |F_pipeline - F_exact| %.2e over 100 random states (<= 1e-9)", worst)};
}

Outcome subspace_witnesses() {
    const auto plan = tomography::witness_plan(1.0, 1.0);
    const auto ideal = tomography::estimate_elements(
        tomography::expected_counts(DensityOperator::projector(photonic::make_psi442()), plan));
    double worst_ideal = 0.0;
    for (const auto& [a, b] : witness::kSignalPairs)
        worst_ideal =
            std::max(worst_ideal, std::abs(witness::subspace_fidelity_from_elements(ideal.elements, a, b).value - 1.0));

    const bool threshold = !witness::ghz_witness_value(0.5).witnessed &&
                           witness::ghz_witness_value(std::nextafter(0.5, 1.0)).witnessed &&
                           !witness::ghz_witness_value(std::nextafter(0.5, 0.0)).witnessed;

    const auto rho = photonic::apply_white_noise(photonic::make_psi442(), 0.8493);
    const auto counts = tomography::simulate_counts(rho, tomography::witness_plan(0.66, 1800), 77);
    const auto mc = tomography::monte_carlo_errors(counts, 200, 77);
    const auto published = io::read_subspace_fixture(support::data_path("subspace_fidelities.json"));
    double lowest = 1.0;
    std::string table;
    for (const auto& s : mc.subspaces) {
        lowest = std::min(lowest, s.value);
        double ref = NAN;
        for (const auto& p : published)
            if ((p.ket_a == s.ket_a && p.ket_b == s.ket_b) || (p.ket_a == s.ket_b && p.ket_b == s.ket_a)) ref = p.value;
        table += fmt(" %s/%s %.3f(pub %.3f)", s.ket_a.c_str(), s.ket_b.c_str(), s.value, ref);
    }
    const bool ok = worst_ideal < 1e-12 && threshold && lowest > 0.85;
    return {ok, fmt("ideal max |F-1| %.1e, strict F > 0.5 threshold %s, noisy min %.3f (> 0.85);", worst_ideal,
                    threshold ? "ok" : "broken", lowest) +
                    table};
}

Outcome qkd_layers() {
    const auto rho = DensityOperator::projector(photonic::make_psi442());
    const auto s = qkd::simulate_layer_samples(rho, qkd::layer(qkd::LayerId::Abc0), 100000, 99);
    const auto k = qkd::key_agreement(s.z_rounds);
    const bool ok = k.abc_agreement == 1.0 && k.ab_agreement == 1.0 && k.mutual_information < 0.01;
    return {ok, fmt("%zu rounds: k_ABC agreement %.6f, k_AB agreement %.6f, I(k_AB;C) %.2e bits (< 0.01)", k.rounds,
                    k.abc_agreement, k.ab_agreement, k.mutual_information)};
}

Outcome key_rates() {
    const auto rows = io::read_qber_fixture(support::data_path("layer_qbers.json"));
    bool ok = rows.size() == 4;
    std::string table = "\n    subspace  computed  pessimistic  printed  diff";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = qkd::asymptotic_key_rate(rows[i].report);
        const double diff = r.rate_mean - rows[i].printed_rate;
        if (i == 0)
            ok = ok && std::abs(r.rate_mean - 0.4286) < 5e-5 && std::abs(diff) <= 0.001;
        else
            ok = ok && std::abs(diff) <= 0.06;
        table += fmt("\n    %-8s  %.4f    %.4f       %.3f    %+.4f",
                     qkd::layer(rows[i].report.layer).subspace().c_str(), r.rate_mean, r.rate_pessimistic,
                     rows[i].printed_rate, diff);
    }
    return {ok, "row 1 within 0.001 of 0.428, rows 2-4 within 0.06" + table};
}

Outcome post_selection() {
    const auto fuse = photonic::ghz_fuse(photonic::bell_pair(), photonic::bell_pair());
    const auto doubled = photonic::dimension_double(photonic::bell_pair());
    const auto doubled_ghz = photonic::dimension_double(fuse.state);
    const bool ok = std::abs(fuse.success_probability - 0.5) <= 1e-12 &&
                    std::abs(doubled.success_probability - 0.5) <= 1e-12 &&
                    std::abs(doubled_ghz.success_probability - 0.5) <= 1e-12;
    return {ok, fmt("ghz_fuse %.15f, dimension_double %.15f (Bell) %.15f (GHZ input), expected 0.5 +- 1e-12",
                    fuse.success_probability, doubled.success_probability, doubled_ghz.success_probability)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"state construction", state_construction},
        {"witness bound", witness_bound},
        {"fidelity reproduction", fidelity_reproduction},
        {"Monte Carlo errors", monte_carlo_errors},
        {"estimator consistency", estimator_consistency},
        {"subspace witnesses", subspace_witnesses},
        {"QKD layer correctness", qkd_layers},
        {"key rates", key_rates},
        {"post-selection accounting", post_selection},
    };
    const auto t0 = Clock::now();
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %zu %s: %s - %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    const double total = seconds_since(t0);
    std::printf("total %.1f s (budget 600 s); %d of %zu criteria failed\n", total, failed, criteria.size());
    return failed == 0 && total < 600.0 ? 0 : 1;
}
