#include "layerq/layerq.h"

#include "layerq/error.hpp"
#include "layerq/io.hpp"
#include "layerq/photonic.hpp"
#include "layerq/qkd.hpp"
#include "layerq/tensor.hpp"
#include "layerq/tomography.hpp"
#include "layerq/witness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

using namespace layerq;

struct layerq_state {
    PureState psi;
};

struct layerq_density {
    DensityOperator rho;
};

struct layerq_counts {
    std::vector<tomography::CountRecord> records;
};

struct layerq_estimates {
    witness::ElementTable elements;
    double fidelity = 0.0;
    double fidelity_std = 0.0;
    std::vector<tomography::SubspaceEstimate> subspaces;   // empty: propagate linearly
    std::size_t trials = 0;
    bool degenerate = false;
    std::size_t low_statistics_settings = 0;
};

struct QkdRow {
    qkd::QberReport report;
    qkd::LayerKeyReport rate;
    std::optional<double> printed_rate;
};

struct layerq_qkd {
    std::vector<QkdRow> rows;
};

namespace {

thread_local std::string g_last_error;

layerq_status fail(layerq_status status, const char* what) {
    g_last_error = what;
    return status;
}

template <class F>
layerq_status guarded(F&& body) {
    try {
        body();
        return LAYERQ_OK;
    } catch (const MissingDataError& e) {
        return fail(LAYERQ_ERR_MISSING_DATA, e.what());
    } catch (const IoError& e) {
        return fail(LAYERQ_ERR_IO, e.what());
    } catch (const ConsistencyError& e) {
        return fail(LAYERQ_ERR_CONSISTENCY, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(LAYERQ_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::out_of_range& e) {
        return fail(LAYERQ_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(LAYERQ_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(LAYERQ_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(LAYERQ_ERR_INTERNAL, "unknown error");
    }
}

template <class T>
void require(const T* p, const char* name) {
    if (!p) throw std::invalid_argument(std::string(name) + " is NULL");
}

io::RunMetadata metadata(const layerq_metadata* meta) {
    io::RunMetadata m;
    if (meta && meta->has_seed) m.seed = meta->seed;
    if (meta && meta->with_timestamp) m.timestamp = io::utc_timestamp();
    return m;
}

void copy_label(char (&dst)[8], const std::string& src) {
    if (src.size() >= sizeof dst) throw std::invalid_argument("ket label too long: " + src);
    std::memcpy(dst, src.c_str(), src.size() + 1);
}

bool is_signal_ket(const std::string& ket) {
    return std::any_of(witness::kSignalKets.begin(), witness::kSignalKets.end(),
                       [&](const char* k) { return ket == k; });
}

QkdRow make_row(qkd::QberReport report, std::optional<double> printed = std::nullopt) {
    auto rate = qkd::asymptotic_key_rate(report);
    return {std::move(report), rate, printed};
}

} // namespace

extern "C" {

const char* layerq_version(void) { return "1.0.0"; }

const char* layerq_last_error(void) { return g_last_error.c_str(); }

const char* layerq_status_name(layerq_status status) {
    switch (status) {
    case LAYERQ_OK: return "ok";
    case LAYERQ_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LAYERQ_ERR_MISSING_DATA: return "missing data";
    case LAYERQ_ERR_IO: return "i/o error";
    case LAYERQ_ERR_CONSISTENCY: return "consistency failure";
    case LAYERQ_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

// ---- states

layerq_status layerq_state_psi442(layerq_state** out) {
    return guarded([&] {
        require(out, "out");
        *out = new layerq_state{photonic::make_psi442()};
    });
}

layerq_status layerq_state_from_circuit(layerq_state** out, double* success_probability) {
    return guarded([&] {
        require(out, "out");
        auto outcome = photonic::layered_source();
        if (success_probability) *success_probability = outcome.success_probability;
        *out = new layerq_state{std::move(outcome.state)};
    });
}

void layerq_state_free(layerq_state* state) { delete state; }

layerq_status layerq_state_dims(const layerq_state* state, int* dims, size_t capacity, size_t* parties) {
    return guarded([&] {
        require(state, "state");
        const auto& v = state->psi.dims().values();
        if (parties) *parties = v.size();
        if (dims) std::copy_n(v.begin(), std::min(capacity, v.size()), dims);
    });
}

layerq_status layerq_state_amplitudes(const layerq_state* state, double* re, double* im, size_t capacity,
                                      size_t* size) {
    return guarded([&] {
        require(state, "state");
        const auto& a = state->psi.amplitudes();
        const auto n = static_cast<std::size_t>(a.size());
        if (size) *size = n;
        for (std::size_t i = 0; i < std::min(capacity, n); ++i) {
            if (re) re[i] = a[static_cast<Eigen::Index>(i)].real();
            if (im) im[i] = a[static_cast<Eigen::Index>(i)].imag();
        }
    });
}

layerq_status layerq_state_distance(const layerq_state* a, const layerq_state* b, double* out) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        *out = amplitude_distance(a->psi, b->psi);
    });
}

layerq_status layerq_state_rank_vector(const layerq_state* state, double tol, int* ranks, size_t capacity,
                                       size_t* parties) {
    return guarded([&] {
        require(state, "state");
        const auto r = tol > 0.0 ? rank_vector(state->psi, tol) : rank_vector(state->psi);
        if (parties) *parties = r.size();
        if (ranks) std::copy_n(r.begin(), std::min(capacity, r.size()), ranks);
    });
}

layerq_status layerq_state_fmax(const layerq_state* target, const int* ranks, size_t n, double* out) {
    return guarded([&] {
        require(target, "target");
        require(ranks, "ranks");
        require(out, "out");
        *out = witness::fmax_class_bound(target->psi, {std::vector<int>(ranks, ranks + n)});
    });
}

// ---- density operators

layerq_status layerq_density_white_noise(const layerq_state* state, double visibility, layerq_density** out) {
    return guarded([&] {
        require(state, "state");
        require(out, "out");
        *out = new layerq_density{photonic::apply_white_noise(state->psi, visibility)};
    });
}

void layerq_density_free(layerq_density* rho) { delete rho; }

layerq_status layerq_density_fidelity(const layerq_density* rho, const layerq_state* target, double* out) {
    return guarded([&] {
        require(rho, "rho");
        require(target, "target");
        require(out, "out");
        *out = fidelity_pure(rho->rho, target->psi);
    });
}

// ---- counts

layerq_status layerq_counts_simulate(const layerq_density* rho, double rate, double integration_time,
                                     uint64_t seed, layerq_counts** out) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        const auto plan = tomography::witness_plan(rate, integration_time);
        *out = new layerq_counts{tomography::simulate_counts(rho->rho, plan, seed)};
    });
}

layerq_status layerq_counts_expected(const layerq_density* rho, double rate, double integration_time,
                                     layerq_counts** out) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        const auto plan = tomography::witness_plan(rate, integration_time);
        *out = new layerq_counts{tomography::expected_counts(rho->rho, plan)};
    });
}

layerq_status layerq_counts_load(const char* path, layerq_counts** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new layerq_counts{io::read_counts(path)};
    });
}

layerq_status layerq_counts_save(const layerq_counts* counts, const char* path, const layerq_metadata* meta) {
    return guarded([&] {
        require(counts, "counts");
        require(path, "path");
        io::write_counts(path, counts->records, metadata(meta));
    });
}

size_t layerq_counts_size(const layerq_counts* counts) { return counts ? counts->records.size() : 0; }

void layerq_counts_free(layerq_counts* counts) { delete counts; }

// ---- estimates

layerq_status layerq_estimates_from_counts(const layerq_counts* counts, size_t trials, uint64_t seed,
                                           layerq_estimates** out) {
    return guarded([&] {
        require(counts, "counts");
        require(out, "out");
        auto mc = tomography::monte_carlo_errors(counts->records, trials, seed);
        auto* est = new layerq_estimates;
        est->elements = std::move(mc.elements);
        est->fidelity = mc.fidelity;
        est->fidelity_std = mc.fidelity_std;
        est->subspaces = std::move(mc.subspaces);
        est->trials = mc.trials;
        est->degenerate = mc.degenerate;
        est->low_statistics_settings = mc.low_statistics_settings.size();
        *out = est;
    });
}

layerq_status layerq_estimates_load_fixture(const char* path, layerq_estimates** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto fx = io::read_element_fixture(path);
        auto* est = new layerq_estimates;
        est->fidelity = witness::fidelity_from_elements(fx.elements);
        est->fidelity_std = fx.fidelity_std;
        est->elements = std::move(fx.elements);
        *out = est;
    });
}

void layerq_estimates_free(layerq_estimates* est) { delete est; }

size_t layerq_estimates_size(const layerq_estimates* est) { return est ? est->elements.size() : 0; }

layerq_status layerq_estimates_element(const layerq_estimates* est, size_t index, layerq_element* out) {
    return guarded([&] {
        require(est, "estimates");
        require(out, "out");
        if (index >= est->elements.size()) throw std::out_of_range("element index out of range");
        const auto& e = est->elements.entries()[index];
        copy_label(out->bra, e.bra);
        copy_label(out->ket, e.ket);
        out->value = e.value;
        out->std_dev = e.std_dev;
        out->low_statistics = e.low_statistics ? 1 : 0;
    });
}

layerq_status layerq_estimates_info_get(const layerq_estimates* est, layerq_estimates_info* out) {
    return guarded([&] {
        require(est, "estimates");
        require(out, "out");
        out->trials = est->trials;
        out->degenerate = est->degenerate ? 1 : 0;
        out->low_statistics_settings = est->low_statistics_settings;
    });
}

layerq_status layerq_estimates_fidelity(const layerq_estimates* est, double* value, double* std_dev) {
    return guarded([&] {
        require(est, "estimates");
        if (value) *value = est->fidelity;
        if (std_dev) *std_dev = est->fidelity_std;
    });
}

layerq_status layerq_estimates_subspace(const layerq_estimates* est, const char* ket_a, const char* ket_b,
                                        double* value, double* std_dev) {
    return guarded([&] {
        require(est, "estimates");
        require(ket_a, "ket_a");
        require(ket_b, "ket_b");
        const std::string a = ket_a, b = ket_b;
        if (!is_signal_ket(a) || !is_signal_ket(b))
            throw std::invalid_argument("subspace kets must be signal kets (000, 111, 220, 331), got " + a +
                                        " and " + b);
        if (a == b) throw std::invalid_argument("subspace kets must differ");
        // Point value always comes from the elements; the Monte Carlo spread
        // replaces linear propagation when available.
        const auto sf = witness::subspace_fidelity_from_elements(est->elements, a, b);
        double sd = sf.std_dev;
        for (const auto& s : est->subspaces)
            if ((s.ket_a == a && s.ket_b == b) || (s.ket_a == b && s.ket_b == a)) sd = s.std_dev;
        if (value) *value = sf.value;
        if (std_dev) *std_dev = sd;
    });
}

layerq_status layerq_estimates_save_csv(const layerq_estimates* est, const char* path,
                                        const layerq_metadata* meta) {
    return guarded([&] {
        require(est, "estimates");
        require(path, "path");
        io::write_text(path, io::format_estimates_csv(est->elements, metadata(meta)));
    });
}

// ---- certification

layerq_status layerq_certify(double fidelity, double std_dev, double bound, layerq_certification* out) {
    return guarded([&] {
        require(out, "out");
        const auto c = witness::certify_dimensionality(fidelity, std_dev, bound);
        *out = {c.sigma_margin, c.whole_sigmas, c.certified ? 1 : 0};
    });
}

layerq_status layerq_ghz_witness_value(double fidelity, layerq_ghz_witness* out) {
    return guarded([&] {
        require(out, "out");
        const auto w = witness::ghz_witness_value(fidelity);
        *out = {w.expectation, w.margin, w.witnessed ? 1 : 0};
    });
}

// ---- key distribution

layerq_status layerq_qkd_simulate(const layerq_density* rho, size_t rounds, uint64_t seed, layerq_qkd** out) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        auto* q = new layerq_qkd;
        try {
            for (const auto& l : qkd::layers())
                q->rows.push_back(
                    make_row(qkd::compute_qbers(qkd::simulate_layer_samples(rho->rho, l, rounds, seed), l)));
        } catch (...) {
            delete q;
            throw;
        }
        *out = q;
    });
}

layerq_status layerq_qkd_exact(const layerq_density* rho, layerq_qkd** out) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        auto* q = new layerq_qkd;
        try {
            for (const auto& l : qkd::layers()) q->rows.push_back(make_row(qkd::exact_qbers(rho->rho, l)));
        } catch (...) {
            delete q;
            throw;
        }
        *out = q;
    });
}

layerq_status layerq_qkd_load_fixture(const char* path, layerq_qkd** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto rows = io::read_qber_fixture(path);
        for (const auto& l : qkd::layers()) {
            const bool present = std::any_of(rows.begin(), rows.end(),
                                             [&](const io::PublishedLayer& p) { return p.report.layer == l.id; });
            if (!present) throw MissingDataError("missing layer " + l.subspace() + " in " + std::string(path));
        }
        auto* q = new layerq_qkd;
        for (auto& r : rows) q->rows.push_back(make_row(std::move(r.report), r.printed_rate));
        *out = q;
    });
}

void layerq_qkd_free(layerq_qkd* qkd) { delete qkd; }

size_t layerq_qkd_size(const layerq_qkd* qkd) { return qkd ? qkd->rows.size() : 0; }

layerq_status layerq_qkd_layer(const layerq_qkd* q, size_t index, layerq_layer_report* out) {
    return guarded([&] {
        require(q, "qkd");
        require(out, "out");
        if (index >= q->rows.size()) throw std::out_of_range("layer index out of range");
        const auto& row = q->rows[index];
        const auto& r = row.report;
        *out = layerq_layer_report{};
        const auto sub = qkd::layer(r.layer).subspace();
        std::snprintf(out->subspace, sizeof out->subspace, "%s", sub.c_str());
        out->qber_z = r.qber_z.value;
        out->qber_z_std = r.qber_z.std_dev;
        out->qber_x = r.qber_x.value;
        out->qber_x_std = r.qber_x.std_dev;
        const auto ab = r.pair(0, 1);
        const auto ac = r.pair(0, 2);
        out->has_pairwise = (ab || ac) ? 1 : 0;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out->qber_z_ab = ab ? ab->value : nan;
        out->qber_z_ab_std = ab ? ab->std_dev : nan;
        out->qber_z_ac = ac ? ac->value : nan;
        out->qber_z_ac_std = ac ? ac->std_dev : nan;
        out->rate_mean = row.rate.rate_mean;
        out->rate_pessimistic = row.rate.rate_pessimistic;
        out->printed_rate = row.printed_rate.value_or(nan);
        out->z_discard_fraction = r.z_discard_fraction;
        out->x_discard_fraction = r.x_discard_fraction;
    });
}

layerq_status layerq_qkd_inject_qber_x(layerq_qkd* q, double qber_x) {
    return guarded([&] {
        require(q, "qkd");
        if (!(qber_x >= 0.0 && qber_x <= 1.0)) throw std::invalid_argument("injected QBER_X must lie in [0, 1]");
        for (auto& row : q->rows) {
            row.report.qber_x = {qber_x, 0.0};
            row.rate = qkd::asymptotic_key_rate(row.report);
        }
    });
}

layerq_status layerq_qkd_save_csv(const layerq_qkd* q, const char* path, const layerq_metadata* meta) {
    return guarded([&] {
        require(q, "qkd");
        require(path, "path");
        std::vector<io::LayerRow> rows;
        for (const auto& r : q->rows) rows.push_back({r.report, r.rate});
        io::write_text(path, io::format_qkd_csv(rows, metadata(meta)));
    });
}

layerq_status layerq_key_agreement_simulate(const layerq_density* rho, size_t rounds, uint64_t seed,
                                            layerq_key_agreement* out) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        // Z rounds do not depend on the layer; any layer's sampler will do.
        const auto samples = qkd::simulate_layer_samples(rho->rho, qkd::layers()[0], rounds, seed);
        const auto k = qkd::key_agreement(samples.z_rounds);
        *out = {k.abc_agreement, k.ab_agreement, k.mutual_information, k.rounds};
    });
}

layerq_status layerq_binary_entropy(double p, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = qkd::binary_entropy(p);
    });
}

} // extern "C"
