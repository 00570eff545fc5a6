#include "layerq/witness.hpp"

#include "layerq/error.hpp"
#include "layerq/photonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace layerq::witness {

namespace {

constexpr double kExpectationSlack = 1e-12;

std::size_t schmidt_limit(const Dims& dims, std::span<const std::size_t> cut) {
    const std::size_t left = dims.select(cut).total();
    return std::min(left, dims.total() / left);
}

} // namespace

std::vector<std::vector<int>> RankVectorClass::members(const Dims& dims) const {
    if (ranks.size() != dims.parties())
        throw std::invalid_argument("RankVectorClass: " + std::to_string(ranks.size()) +
                                    " ranks for dims " + dims.to_string());
    for (std::size_t p = 0; p < ranks.size(); ++p)
        if (ranks[p] < 1 || ranks[p] > dims[p])
            throw std::invalid_argument("RankVectorClass: rank " + std::to_string(ranks[p]) +
                                        " invalid for party " + std::to_string(p) + " of dims " +
                                        dims.to_string());
    std::vector<int> perm = ranks;
    std::sort(perm.begin(), perm.end());
    std::vector<std::vector<int>> out;
    do {
        bool fits = true;
        for (std::size_t p = 0; p < perm.size(); ++p) fits = fits && perm[p] <= dims[p];
        if (fits) out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

double max_overlap_bounded_rank(const PureState& target, std::span<const std::size_t> cut, int rank) {
    const SchmidtData s = schmidt_decompose(target, cut);
    const std::size_t limit = schmidt_limit(target.dims(), s.cut);
    if (rank < 1 || static_cast<std::size_t>(rank) > limit)
        throw std::invalid_argument("max_overlap_bounded_rank: rank " + std::to_string(rank) +
                                    " outside [1, " + std::to_string(limit) + "]");
    double sum = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(rank) && i < s.coefficients.size(); ++i)
        sum += s.coefficients[i] * s.coefficients[i];
    return std::min(sum, 1.0);
}

double fmax_class_bound(const PureState& target, const RankVectorClass& cls) {
    const Dims& dims = target.dims();
    double best = 0.0;
    for (const auto& member : cls.members(dims)) {
        double bound = 1.0;
        for (std::size_t p = 0; p < dims.parties(); ++p) {
            const std::size_t cut[] = {p};
            const auto cap = std::min<std::size_t>(static_cast<std::size_t>(member[p]),
                                                   schmidt_limit(dims, cut));
            bound = std::min(bound, max_overlap_bounded_rank(target, cut, static_cast<int>(cap)));
        }
        best = std::max(best, bound);
    }
    return best;
}

void ElementTable::set(ElementEstimate e) {
    for (auto& existing : entries_) {
        if ((existing.bra == e.bra && existing.ket == e.ket) ||
            (existing.bra == e.ket && existing.ket == e.bra)) {
            existing = std::move(e);
            return;
        }
    }
    entries_.push_back(std::move(e));
}

const ElementEstimate* ElementTable::find(const std::string& bra, const std::string& ket) const {
    for (const auto& e : entries_)
        if ((e.bra == bra && e.ket == ket) || (e.bra == ket && e.ket == bra)) return &e;
    return nullptr;
}

const ElementEstimate& ElementTable::at(const std::string& bra, const std::string& ket) const {
    if (const auto* e = find(bra, ket)) return *e;
    throw MissingDataError("missing element <" + bra + "|rho|" + ket + ">");
}

std::vector<std::string> computational_kets(const Dims& dims) {
    std::vector<std::string> out;
    out.reserve(dims.total());
    for (std::size_t i = 0; i < dims.total(); ++i) out.push_back(ket_label(dims.digits(i)));
    return out;
}

double fidelity_from_elements(const ElementTable& elements, const Dims& dims,
                              std::span<const std::string> signal_kets) {
    if (signal_kets.empty()) throw std::invalid_argument("fidelity_from_elements: no signal kets");
    double diag_sum = 0.0;
    for (const auto& k : computational_kets(dims)) diag_sum += elements.at(k, k).value;
    if (std::abs(diag_sum - 1.0) > kDiagonalRenormalizationTolerance)
        throw std::invalid_argument("fidelity_from_elements: diagonal elements sum to " +
                                    std::to_string(diag_sum) + ", outside the renormalization window");

    double f = 0.0;
    for (std::size_t a = 0; a < signal_kets.size(); ++a) {
        parse_ket(signal_kets[a], dims);
        f += elements.at(signal_kets[a], signal_kets[a]).value / diag_sum;
        for (std::size_t b = a + 1; b < signal_kets.size(); ++b)
            f += 2.0 * elements.at(signal_kets[a], signal_kets[b]).value;
    }
    return f / static_cast<double>(signal_kets.size());
}

double fidelity_from_elements(const ElementTable& elements) {
    const std::vector<std::string> kets(kSignalKets.begin(), kSignalKets.end());
    return fidelity_from_elements(elements, layered_dims(), kets);
}

std::vector<CorrelatorTerm> offdiagonal_correlator_terms(std::size_t differing_parties) {
    if (differing_parties < 1 || differing_parties > 16)
        throw std::invalid_argument("offdiagonal_correlator_terms: unsupported party count");
    std::vector<CorrelatorTerm> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << differing_parties); ++mask) {
        std::string pattern;
        int ys = 0;
        for (std::size_t p = 0; p < differing_parties; ++p) {
            const bool y = (mask >> (differing_parties - 1 - p)) & 1u;
            pattern += y ? 'Y' : 'X';
            ys += y;
        }
        if (ys % 2) continue;
        out.push_back({pattern, (ys / 2) % 2 ? -1 : 1});
    }
    return out;
}

double real_offdiagonal_from_correlators(std::span<const double> expectations,
                                         std::size_t differing_parties) {
    const auto terms = offdiagonal_correlator_terms(differing_parties);
    if (expectations.size() != terms.size())
        throw std::invalid_argument("real_offdiagonal_from_correlators: expected " +
                                    std::to_string(terms.size()) + " expectation values");
    double acc = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const double e = expectations[i];
        if (!(std::abs(e) <= 1.0 + kExpectationSlack))
            throw std::invalid_argument("correlator " + terms[i].pattern + " expectation " +
                                        std::to_string(e) + " outside [-1, 1]");
        acc += terms[i].sign * e;
    }
    return std::ldexp(acc, -static_cast<int>(differing_parties));
}

double offdiag_from_correlators(double xxx, double yyx, double yxy, double xyy) {
    // term order from offdiagonal_correlator_terms(3): XXX, XYY, YXY, YYX
    const double e[] = {xxx, xyy, yxy, yyx};
    return real_offdiagonal_from_correlators(e, 3);
}

double offdiag_from_two_party_correlators(double xx, double yy) {
    const double e[] = {xx, yy};
    return real_offdiagonal_from_correlators(e, 2);
}

double subspace_fidelity(double diag_a, double diag_b, double offdiag) {
    return (diag_a + diag_b + 2.0 * offdiag) / 2.0;
}

SubspaceFidelity subspace_fidelity_from_elements(const ElementTable& elements, const std::string& ket_a,
                                                 const std::string& ket_b) {
    if (ket_a == ket_b) throw std::invalid_argument("subspace fidelity needs two distinct kets");
    const auto& da = elements.at(ket_a, ket_a);
    const auto& db = elements.at(ket_b, ket_b);
    const auto& off = elements.at(ket_a, ket_b);
    const double pop = da.value + db.value;
    if (!(pop > 0.0))
        throw std::invalid_argument("subspace " + ket_a + "/" + ket_b + " has zero population");
    const double f = subspace_fidelity(da.value / pop, db.value / pop, off.value / pop);
    // f = 1/2 + off / pop
    const double d_off = 1.0 / pop;
    const double d_diag = -off.value / (pop * pop);
    const double var = d_off * d_off * off.std_dev * off.std_dev +
                       d_diag * d_diag * (da.std_dev * da.std_dev + db.std_dev * db.std_dev);
    return {f, std::sqrt(var)};
}

GhzWitness ghz_witness_value(double fidelity) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0))
        throw std::invalid_argument("ghz_witness_value: fidelity must lie in [0, 1]");
    return {0.5 - fidelity, fidelity - 0.5, fidelity > 0.5};
}

Certification certify_dimensionality(double fidelity, double std_dev, double bound) {
    if (!(std_dev > 0.0)) throw std::invalid_argument("certify_dimensionality: std must be positive");
    const double margin = (fidelity - bound) / std_dev;
    return {margin, static_cast<int>(std::floor(margin)), fidelity > bound};
}

double layered_fmax() {
    return fmax_class_bound(photonic::make_psi442(), RankVectorClass{{4, 3, 2}});
}

} // namespace layerq::witness
