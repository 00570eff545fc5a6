#pragma once

// Dense states and operators on small multipartite Hilbert spaces.
//
// Composite indices are mixed-radix with party 0 as the most significant
// digit, so the ket |ijk> of dims (4,4,2) sits at index (i*4 + j)*2 + k.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace layerq {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr std::size_t kMaxTotalDimension = 4096;

/// Per-party local dimensions.
class Dims {
public:
    Dims() = default;
    Dims(std::initializer_list<int> dims);
    explicit Dims(std::vector<int> dims);

    std::size_t parties() const { return dims_.size(); }
    int operator[](std::size_t party) const { return dims_.at(party); }
    std::size_t total() const { return total_; }
    const std::vector<int>& values() const { return dims_; }

    /// Mixed-radix digits of a composite index.
    std::vector<int> digits(std::size_t index) const;
    /// Composite index of per-party digits; throws on out-of-range digits.
    std::size_t index(std::span<const int> digits) const;

    /// Dims of the listed parties, in the order given.
    Dims select(std::span<const std::size_t> parties) const;
    Dims concat(const Dims& other) const;

    std::string to_string() const;

    friend bool operator==(const Dims&, const Dims&) = default;

private:
    std::vector<int> dims_;
    std::size_t total_ = 1;
};

/// Parses a ket label such as "220" into digits and validates them against dims.
std::vector<int> parse_ket(const std::string& label, const Dims& dims);
std::string ket_label(std::span<const int> digits);

class PureState {
public:
    /// Requires squared norm within 1e-12 of one.
    PureState(Dims dims, Vector amplitudes);

    /// Divides by the norm; throws on a zero vector.
    static PureState normalized(Dims dims, Vector amplitudes);
    static PureState basis(Dims dims, std::span<const int> digits);

    const Dims& dims() const { return dims_; }
    const Vector& amplitudes() const { return amplitudes_; }
    Complex amplitude(std::span<const int> digits) const;

private:
    Dims dims_;
    Vector amplitudes_;
};

class DensityOperator {
public:
    /// Requires Hermiticity and unit trace within 1e-12 and eigenvalues >= -1e-10.
    DensityOperator(Dims dims, Matrix matrix);

    static DensityOperator projector(const PureState& psi);
    static DensityOperator maximally_mixed(Dims dims);

    const Dims& dims() const { return dims_; }
    const Matrix& matrix() const { return matrix_; }
    Complex element(std::size_t row, std::size_t col) const { return matrix_(row, col); }

private:
    Dims dims_;
    Matrix matrix_;
};

struct SchmidtData {
    Dims dims;                          // dims of the decomposed state
    std::vector<std::size_t> cut;       // parties on the left factor, ascending
    std::vector<std::size_t> rest;      // complement, ascending
    std::vector<double> coefficients;   // lambda_i, descending
    std::vector<Vector> left;           // over cut parties
    std::vector<Vector> right;          // over rest parties

    std::size_t rank(double tol) const;
    /// sum_i lambda_i |left_i> (x) |right_i>, re-ordered to the original parties.
    PureState reconstruct() const;
};

PureState tensor_product(const PureState& a, const PureState& b);
DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b);

/// Traces out every party not listed in keep. The result keeps parties in
/// ascending order.
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep);

SchmidtData schmidt_decompose(const PureState& psi, std::span<const std::size_t> cut);

/// Per-party Schmidt rank; a coefficient counts when it exceeds tol times the
/// largest coefficient of that cut.
std::vector<int> rank_vector(const PureState& psi, double tol = 1e-8);

/// <target| rho |target>, clamped to [0, 1].
double fidelity_pure(const DensityOperator& rho, const PureState& target);

/// Euclidean distance between amplitude vectors; throws on dims mismatch.
double amplitude_distance(const PureState& a, const PureState& b);

/// Parties in [0, total_parties) not listed, ascending.
std::vector<std::size_t> complement(std::span<const std::size_t> parties, std::size_t total_parties);

} // namespace layerq
