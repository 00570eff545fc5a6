#pragma once

// Fidelity-based certification: bounded-rank overlap maxima, the
// dimensionality-class threshold, fidelity assembly from measured density
// matrix elements, and the two-level subspace GHZ witness.

#include "layerq/tensor.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace layerq::witness {

/// Per-party rank caps, e.g. (4,3,2). The class is the convex hull of all
/// states whose rank vector is bounded by some permutation of the caps that
/// fits the local dimensions, so (4,3,2) on dims (4,4,2) covers (4,3,2) and
/// (3,4,2).
struct RankVectorClass {
    std::vector<int> ranks;

    /// Distinct permutations of ranks that fit within dims.
    std::vector<std::vector<int>> members(const Dims& dims) const;
};

/// Largest |<target|phi>|^2 over phi with Schmidt rank <= rank across the cut:
/// the sum of the rank largest squared Schmidt coefficients.
double max_overlap_bounded_rank(const PureState& target, std::span<const std::size_t> cut, int rank);

/// max over class members of min over single-party cuts of the bounded-rank
/// overlap.
double fmax_class_bound(const PureState& target, const RankVectorClass& cls);

struct ElementEstimate {
    std::string bra;
    std::string ket;
    double value = 0.0;        // real part of <bra|rho|ket>
    double std_dev = 0.0;
    bool low_statistics = false;

    bool diagonal() const { return bra == ket; }
    std::string label() const { return "<" + bra + "|rho|" + ket + ">"; }
};

/// Real parts of density-matrix elements keyed by ket pair. Off-diagonal
/// lookups are symmetric since Re<a|rho|b> = Re<b|rho|a>.
class ElementTable {
public:
    /// Replaces an existing entry for the same (unordered) pair.
    void set(ElementEstimate e);
    const ElementEstimate* find(const std::string& bra, const std::string& ket) const;
    /// Throws MissingDataError naming the element.
    const ElementEstimate& at(const std::string& bra, const std::string& ket) const;

    const std::vector<ElementEstimate>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<ElementEstimate> entries_;
};

/// The four kets of the layered target and its dims.
inline const Dims& layered_dims() {
    static const Dims d{4, 4, 2};
    return d;
}
inline constexpr std::array<const char*, 4> kSignalKets = {"000", "111", "220", "331"};
/// The six unique off-diagonal pairs between signal kets.
inline constexpr std::array<std::pair<const char*, const char*>, 6> kSignalPairs = {{
    {"000", "111"}, {"000", "220"}, {"000", "331"},
    {"111", "220"}, {"111", "331"}, {"220", "331"},
}};

/// Every computational ket label of dims in index order.
std::vector<std::string> computational_kets(const Dims& dims);

/// Diagonal sums further than this from one are rejected rather than rescaled.
inline constexpr double kDiagonalRenormalizationTolerance = 0.02;

/// Fidelity with the equal-weight real superposition of signal_kets:
/// (1/n) [sum of signal diagonals + 2 sum of Re off-diagonals]. Requires every
/// computational diagonal of dims; they are rescaled to sum to one.
double fidelity_from_elements(const ElementTable& elements, const Dims& dims,
                              std::span<const std::string> signal_kets);
/// Layered target on (4,4,2).
double fidelity_from_elements(const ElementTable& elements);

/// Pauli-type pattern over the parties whose digits differ between the two
/// kets, with its sign in the real-part expansion.
struct CorrelatorTerm {
    std::string pattern;   // e.g. "XYY"
    int sign;
};

/// Re<a|rho|b> = 2^-m sum_{even #Y} (-1)^{#Y/2} <pattern> for kets differing on
/// m parties (parties that agree are projected onto their common level).
std::vector<CorrelatorTerm> offdiagonal_correlator_terms(std::size_t differing_parties);

/// expectations aligned with offdiagonal_correlator_terms(m); each in [-1, 1].
double real_offdiagonal_from_correlators(std::span<const double> expectations,
                                         std::size_t differing_parties);

/// Three-party element from full-state expectation values Tr(rho O):
/// (<XXX> - <YYX> - <YXY> - <XYY>) / 8.
double offdiag_from_correlators(double xxx, double yyx, double yxy, double xyy);
/// Two-party element: (<XX> - <YY>) / 4.
double offdiag_from_two_party_correlators(double xx, double yy);

/// (diag_a + diag_b + 2 offdiag) / 2 with elements already normalized to the
/// subspace population.
double subspace_fidelity(double diag_a, double diag_b, double offdiag);

struct SubspaceFidelity {
    double value;
    double std_dev;   // linear propagation of the element errors
};

/// Renormalizes the three elements by diag_a + diag_b before subspace_fidelity.
SubspaceFidelity subspace_fidelity_from_elements(const ElementTable& elements, const std::string& ket_a,
                                                 const std::string& ket_b);

/// W = I/2 - |psi><psi| on a two-term GHZ subspace.
struct GhzWitness {
    double expectation;   // Tr(W rho) = 1/2 - F; negative witnesses GME
    double margin;        // F - 1/2
    bool witnessed;       // F > 1/2
};
GhzWitness ghz_witness_value(double fidelity);

struct Certification {
    double sigma_margin;  // (F - bound) / std
    int whole_sigmas;     // floor(sigma_margin)
    bool certified;       // F > bound
};
Certification certify_dimensionality(double fidelity, double std_dev, double bound);

/// Threshold for the (4,3,2) class against the layered target.
double layered_fmax();

} // namespace layerq::witness
