#include "layerq/tomography.hpp"

#include "layerq/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

namespace layerq::tomography {

namespace {

using witness::ElementEstimate;
using witness::ElementTable;

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

Matrix local_projector(const LocalMeasurement& m, char outcome, int dim) {
    Matrix p = Matrix::Zero(dim, dim);
    if (m.kind == LocalMeasurement::Kind::Computational) {
        const int k = outcome - '0';
        p(k, k) = 1.0;
        return p;
    }
    if (outcome == 'r') {
        p = Matrix::Identity(dim, dim);
        p(m.a, m.a) = 0.0;
        p(m.b, m.b) = 0.0;
        return p;
    }
    const double h = std::numbers::sqrt2 / 2.0;
    Vector v = Vector::Zero(dim);
    v(m.a) = h;
    const double sign = outcome == '+' ? 1.0 : -1.0;
    // sigma_x eigenvectors (|a> +- |b>)/sqrt2; sigma_y^{a,b} ones (|a> -+ i|b>)/sqrt2
    v(m.b) = m.kind == LocalMeasurement::Kind::SigmaX ? Complex(sign * h, 0.0) : Complex(0.0, -sign * h);
    return v * v.adjoint();
}

Matrix kron(const Matrix& x, const Matrix& y) {
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
}

/// Records grouped by setting.
class CountTable {
public:
    explicit CountTable(std::span<const CountRecord> records) {
        for (const auto& r : records) {
            if (!(r.counts >= 0.0) || !std::isfinite(r.counts))
                throw std::invalid_argument("count for " + r.setting + "/" + r.outcome +
                                            " must be a finite non-negative number");
            table_[r.setting][r.outcome] += r.counts;
        }
    }

    const std::map<std::string, double>& setting(const std::string& label) const {
        const auto it = table_.find(label);
        if (it == table_.end()) throw MissingDataError("missing measurement setting " + label);
        return it->second;
    }

    double total(const std::string& label) const {
        double t = 0.0;
        for (const auto& [o, c] : setting(label)) t += c;
        return t;
    }

    double count(const std::string& label, const std::string& outcome) const {
        const auto& s = setting(label);
        const auto it = s.find(outcome);
        return it == s.end() ? 0.0 : it->second;
    }

    bool has(const std::string& label) const { return table_.count(label) != 0; }

private:
    std::map<std::string, std::map<std::string, double>> table_;
};

struct PairLevels {
    std::vector<std::vector<int>> levels;   // per party: two differing levels or one common
    std::vector<int> differing;             // party indices with two levels
    std::vector<bool> flipped;              // per differing party: ket_a holds the higher level
};

PairLevels pair_levels(const std::string& ket_a, const std::string& ket_b) {
    const Dims& dims = witness::layered_dims();
    const auto a = parse_ket(ket_a, dims);
    const auto b = parse_ket(ket_b, dims);
    PairLevels out;
    for (std::size_t p = 0; p < a.size(); ++p) {
        if (a[p] == b[p]) {
            out.levels.push_back({a[p]});
        } else {
            out.levels.push_back({std::min(a[p], b[p]), std::max(a[p], b[p])});
            out.differing.push_back(static_cast<int>(p));
            out.flipped.push_back(a[p] > b[p]);
        }
    }
    if (out.differing.empty()) throw std::invalid_argument("off-diagonal pair needs two distinct kets");
    return out;
}

std::string pattern_setting(const PairLevels& pl, const std::string& pattern) {
    std::string label;
    std::size_t k = 0;
    for (std::size_t p = 0; p < pl.levels.size(); ++p) {
        if (p) label += '-';
        if (pl.levels[p].size() == 1) {
            label += 'Z';
        } else {
            label += pattern[k++];
            label += static_cast<char>('0' + pl.levels[p][0]);
            label += static_cast<char>('0' + pl.levels[p][1]);
        }
    }
    return label;
}

std::vector<std::string> witness_setting_labels() {
    std::vector<std::string> labels{"Z"};
    for (const auto& [a, b] : witness::kSignalPairs)
        for (const auto& l : offdiagonal_settings(a, b))
            if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    return labels;
}

Estimate estimate_from_table(const CountTable& table) {
    const Dims& dims = witness::layered_dims();
    std::string missing;
    for (const auto& label : witness_setting_labels())
        if (!table.has(label)) missing += (missing.empty() ? "" : ", ") + label;
    if (!missing.empty()) throw MissingDataError("missing measurement settings: " + missing);
    Estimate out;
    std::set<std::string> low;

    const std::string z = "Z";
    const double c_total = table.total(z);
    if (!(c_total > 0.0)) throw std::invalid_argument("computational setting has no counts");
    if (c_total < kLowStatisticsThreshold) low.insert(z);

    std::map<std::string, double> diag;
    for (const auto& k : witness::computational_kets(dims)) {
        const double c = table.count(z, k);
        diag[k] = c / c_total;
        out.elements.set({k, k, diag[k], 0.0, c == 0.0 || c_total < kLowStatisticsThreshold});
    }

    for (const auto& [ka, kb] : witness::kSignalPairs) {
        const PairLevels pl = pair_levels(ka, kb);
        const MeasurementSetting comp = MeasurementSetting::computational(dims);

        double population = 0.0;
        for (const auto& ket : witness::computational_kets(dims)) {
            const auto d = parse_ket(ket, dims);
            bool inside = true;
            for (std::size_t p = 0; p < d.size(); ++p)
                inside = inside && std::find(pl.levels[p].begin(), pl.levels[p].end(), d[p]) !=
                                       pl.levels[p].end();
            if (inside) population += diag[ket];
        }

        const auto terms = witness::offdiagonal_correlator_terms(pl.differing.size());
        std::vector<double> expectations;
        bool flagged = false;
        for (const auto& term : terms) {
            const std::string label = pattern_setting(pl, term.pattern);
            const auto& outcomes = table.setting(label);
            if (table.total(label) < kLowStatisticsThreshold) {
                low.insert(label);
                flagged = true;
            }
            double in_subspace = 0.0;
            double weighted = 0.0;
            for (const auto& [outcome, c] : outcomes) {
                if (outcome.size() != pl.levels.size())
                    throw std::invalid_argument("outcome '" + outcome + "' does not match setting " + label);
                int ev = 1;
                for (std::size_t p = 0; p < pl.levels.size() && ev != 0; ++p) {
                    if (pl.levels[p].size() == 1)
                        ev = (outcome[p] - '0') == pl.levels[p][0] ? ev : 0;
                    else
                        ev *= LocalMeasurement::eigenvalue(outcome[p]);
                }
                if (ev == 0) continue;
                in_subspace += c;
                weighted += ev * c;
            }
            // settings use ascending levels; sigma_y^{b,a} = -sigma_y^{a,b}
            double orientation = 1.0;
            for (std::size_t k = 0; k < term.pattern.size(); ++k)
                if (term.pattern[k] == 'Y' && pl.flipped[k]) orientation = -orientation;
            if (in_subspace > 0.0) {
                expectations.push_back(orientation * population * weighted / in_subspace);
            } else {
                expectations.push_back(0.0);
                flagged = true;
            }
        }
        const double value = witness::real_offdiagonal_from_correlators(expectations, pl.differing.size());
        out.elements.set({ka, kb, value, 0.0, flagged});
    }

    out.fidelity = witness::fidelity_from_elements(out.elements);
    out.low_statistics_settings.assign(low.begin(), low.end());
    return out;
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double draw_poisson(std::mt19937_64& engine, double mean) {
    if (!(mean > 0.0)) return 0.0;
    std::poisson_distribution<long long> dist(mean);
    return static_cast<double>(dist(engine));
}

} // namespace

std::string LocalMeasurement::token() const {
    switch (kind) {
    case Kind::Computational: return "Z";
    case Kind::SigmaX: return "X" + std::to_string(a) + std::to_string(b);
    case Kind::SigmaY: return "Y" + std::to_string(a) + std::to_string(b);
    }
    return {};
}

std::vector<char> LocalMeasurement::outcomes(int dim) const {
    std::vector<char> out;
    if (kind == Kind::Computational) {
        for (int k = 0; k < dim; ++k) out.push_back(static_cast<char>('0' + k));
        return out;
    }
    out = {'+', '-'};
    if (dim > 2) out.push_back('r');
    return out;
}

int LocalMeasurement::eigenvalue(char outcome) {
    switch (outcome) {
    case '+': return 1;
    case '-': return -1;
    case 'r': return 0;
    default: throw std::invalid_argument(std::string("not a sigma outcome: '") + outcome + "'");
    }
}

MeasurementSetting MeasurementSetting::parse(const std::string& label, const Dims& dims) {
    if (std::any_of(dims.values().begin(), dims.values().end(), [](int d) { return d > 10; }))
        throw std::invalid_argument("MeasurementSetting: local dimensions above 10 are not labelled");
    MeasurementSetting s;
    s.label_ = label;
    s.dims_ = dims;
    if (label == "Z") {
        s.parties_.assign(dims.parties(), LocalMeasurement{});
        return s;
    }
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (true) {
        const auto dash = label.find('-', start);
        tokens.push_back(label.substr(start, dash - start));
        if (dash == std::string::npos) break;
        start = dash + 1;
    }
    if (tokens.size() != dims.parties())
        throw std::invalid_argument("setting '" + label + "' does not have " +
                                    std::to_string(dims.parties()) + " party tokens");
    for (std::size_t p = 0; p < tokens.size(); ++p) {
        const auto& t = tokens[p];
        LocalMeasurement m;
        if (t == "Z") {
            s.parties_.push_back(m);
            continue;
        }
        if (t.size() != 3 || (t[0] != 'X' && t[0] != 'Y') || !std::isdigit(static_cast<unsigned char>(t[1])) ||
            !std::isdigit(static_cast<unsigned char>(t[2])))
            throw std::invalid_argument("setting '" + label + "': bad token '" + t + "'");
        m.kind = t[0] == 'X' ? LocalMeasurement::Kind::SigmaX : LocalMeasurement::Kind::SigmaY;
        m.a = t[1] - '0';
        m.b = t[2] - '0';
        if (m.a == m.b || m.a >= dims[p] || m.b >= dims[p])
            throw std::invalid_argument("setting '" + label + "': levels of '" + t +
                                        "' must be distinct and below the party dimension");
        s.parties_.push_back(m);
    }
    return s;
}

MeasurementSetting MeasurementSetting::computational(const Dims& dims) { return parse("Z", dims); }

bool MeasurementSetting::is_computational() const {
    return std::all_of(parties_.begin(), parties_.end(), [](const LocalMeasurement& m) {
        return m.kind == LocalMeasurement::Kind::Computational;
    });
}

std::vector<std::string> MeasurementSetting::outcomes() const {
    std::vector<std::string> out{""};
    for (std::size_t p = 0; p < parties_.size(); ++p) {
        std::vector<std::string> next;
        for (const auto& prefix : out)
            for (char c : parties_[p].outcomes(dims_[p])) next.push_back(prefix + c);
        out = std::move(next);
    }
    return out;
}

std::vector<OutcomeProbability> born_probabilities(const DensityOperator& rho,
                                                   const MeasurementSetting& setting) {
    if (!(rho.dims() == setting.dims()))
        throw std::invalid_argument("born_probabilities: setting " + setting.label() +
                                    " was built for dims " + setting.dims().to_string());
    const auto& dims = rho.dims();
    std::vector<OutcomeProbability> out;
    for (const auto& outcome : setting.outcomes()) {
        Matrix proj = local_projector(setting.parties()[0], outcome[0], dims[0]);
        for (std::size_t p = 1; p < dims.parties(); ++p)
            proj = kron(proj, local_projector(setting.parties()[p], outcome[p], dims[p]));
        // Tr(rho P) = sum_ij rho_ij P_ji
        const double prob = (rho.matrix().cwiseProduct(proj.transpose())).sum().real();
        out.push_back({outcome, std::max(prob, 0.0)});
    }
    return out;
}

void ExperimentPlan::validate() const {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("plan: rate must be positive");
    if (!(integration_time > 0.0) || !std::isfinite(integration_time))
        throw std::invalid_argument("plan: integration time must be positive");
    if (settings.empty()) throw std::invalid_argument("plan: no measurement settings");
}

std::vector<std::string> offdiagonal_settings(const std::string& ket_a, const std::string& ket_b) {
    const PairLevels pl = pair_levels(ket_a, ket_b);
    std::vector<std::string> out;
    for (const auto& term : witness::offdiagonal_correlator_terms(pl.differing.size()))
        out.push_back(pattern_setting(pl, term.pattern));
    return out;
}

ExperimentPlan witness_plan(double rate, double integration_time) {
    const Dims& dims = witness::layered_dims();
    ExperimentPlan plan;
    plan.rate = rate;
    plan.integration_time = integration_time;
    plan.settings.push_back(MeasurementSetting::computational(dims));
    std::set<std::string> seen{"Z"};
    for (const auto& [a, b] : witness::kSignalPairs)
        for (const auto& label : offdiagonal_settings(a, b))
            if (seen.insert(label).second) plan.settings.push_back(MeasurementSetting::parse(label, dims));
    plan.validate();
    return plan;
}

std::vector<CountRecord> simulate_counts(const DensityOperator& rho, const ExperimentPlan& plan,
                                         std::uint64_t seed) {
    plan.validate();
    const double scale = plan.rate * plan.integration_time;
    std::vector<CountRecord> out;
    for (std::size_t i = 0; i < plan.settings.size(); ++i) {
        auto engine = make_engine(seed, i);
        for (const auto& [outcome, p] : born_probabilities(rho, plan.settings[i]))
            out.push_back({plan.settings[i].label(), outcome, draw_poisson(engine, scale * p)});
    }
    return out;
}

std::vector<CountRecord> expected_counts(const DensityOperator& rho, const ExperimentPlan& plan) {
    plan.validate();
    const double scale = plan.rate * plan.integration_time;
    std::vector<CountRecord> out;
    for (const auto& setting : plan.settings)
        for (const auto& [outcome, p] : born_probabilities(rho, setting))
            out.push_back({setting.label(), outcome, scale * p});
    return out;
}

Estimate estimate_elements(std::span<const CountRecord> records) {
    return estimate_from_table(CountTable(records));
}

MonteCarloResult monte_carlo_errors(std::span<const CountRecord> records, std::size_t trials,
                                    std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("monte_carlo_errors: at least one trial required");
    const Estimate point = estimate_elements(records);

    const std::size_t n_elements = point.elements.size();
    const std::size_t n_pairs = witness::kSignalPairs.size();
    // per trial: elements, fidelity, subspace fidelities
    const std::size_t stride = n_elements + 1 + n_pairs;
    std::vector<double> samples(trials * stride);

    auto run_trial = [&](std::size_t t) {
        auto engine = make_engine(seed, t);
        std::vector<CountRecord> resampled(records.begin(), records.end());
        for (auto& r : resampled) r.counts = draw_poisson(engine, r.counts);
        const Estimate e = estimate_elements(resampled);
        double* row = samples.data() + t * stride;
        for (std::size_t i = 0; i < n_elements; ++i) {
            const auto& ref = point.elements.entries()[i];
            row[i] = e.elements.at(ref.bra, ref.ket).value;
        }
        row[n_elements] = e.fidelity;
        for (std::size_t k = 0; k < n_pairs; ++k) {
            const auto& [a, b] = witness::kSignalPairs[k];
            const double pop = e.elements.at(a, a).value + e.elements.at(b, b).value;
            row[n_elements + 1 + k] =
                pop > 0.0 ? witness::subspace_fidelity_from_elements(e.elements, a, b).value : 0.5;
        }
    };

    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), trials / 64));
    if (workers == 1) {
        for (std::size_t t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t t = w; t < trials; t += workers) run_trial(t);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }

    auto column_std = [&](std::size_t col) {
        std::vector<double> xs(trials);
        for (std::size_t t = 0; t < trials; ++t) xs[t] = samples[t * stride + col];
        return sample_std(xs);
    };

    MonteCarloResult out;
    out.trials = trials;
    out.degenerate = trials < kMinTrials;
    out.low_statistics_settings = point.low_statistics_settings;
    for (std::size_t i = 0; i < n_elements; ++i) {
        ElementEstimate e = point.elements.entries()[i];
        e.std_dev = column_std(i);
        out.elements.set(std::move(e));
    }
    out.fidelity = point.fidelity;
    out.fidelity_std = column_std(n_elements);
    for (std::size_t k = 0; k < n_pairs; ++k) {
        const auto& [a, b] = witness::kSignalPairs[k];
        out.subspaces.push_back({a, b, witness::subspace_fidelity_from_elements(point.elements, a, b).value,
                                 column_std(n_elements + 1 + k)});
    }
    return out;
}

} // namespace layerq::tomography
