#include "layerq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace layerq {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kEigenTol = 1e-10;

std::vector<std::size_t> sorted_parties(std::span<const std::size_t> parties, std::size_t total,
                                        const char* what) {
    std::vector<std::size_t> out(parties.begin(), parties.end());
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw std::invalid_argument(std::string(what) + ": repeated party index");
    for (std::size_t p : out)
        if (p >= total)
            throw std::invalid_argument(std::string(what) + ": party index " + std::to_string(p) +
                                        " out of range for " + std::to_string(total) + " parties");
    return out;
}

// For every composite index, its index within the selected parties.
std::vector<std::size_t> sub_indices(const Dims& dims, std::span<const std::size_t> parties) {
    const Dims sub = dims.select(parties);
    std::vector<std::size_t> out(dims.total());
    std::vector<int> picked(parties.size());
    for (std::size_t i = 0; i < dims.total(); ++i) {
        const auto d = dims.digits(i);
        for (std::size_t k = 0; k < parties.size(); ++k) picked[k] = d[parties[k]];
        out[i] = sub.index(picked);
    }
    return out;
}

} // namespace

Dims::Dims(std::initializer_list<int> dims) : Dims(std::vector<int>(dims)) {}

Dims::Dims(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("Dims: at least one party required");
    total_ = 1;
    for (int d : dims_) {
        if (d < 1) throw std::invalid_argument("Dims: every dimension must be >= 1");
        total_ *= static_cast<std::size_t>(d);
        if (total_ > kMaxTotalDimension)
            throw std::invalid_argument("Dims: total dimension exceeds " +
                                        std::to_string(kMaxTotalDimension));
    }
}

std::vector<int> Dims::digits(std::size_t index) const {
    if (index >= total_) throw std::out_of_range("Dims::digits: index out of range");
    std::vector<int> out(dims_.size());
    for (std::size_t p = dims_.size(); p-- > 0;) {
        out[p] = static_cast<int>(index % static_cast<std::size_t>(dims_[p]));
        index /= static_cast<std::size_t>(dims_[p]);
    }
    return out;
}

std::size_t Dims::index(std::span<const int> digits) const {
    if (digits.size() != dims_.size())
        throw std::invalid_argument("Dims::index: expected " + std::to_string(dims_.size()) +
                                    " digits, got " + std::to_string(digits.size()));
    std::size_t idx = 0;
    for (std::size_t p = 0; p < dims_.size(); ++p) {
        if (digits[p] < 0 || digits[p] >= dims_[p])
            throw std::invalid_argument("Dims::index: digit " + std::to_string(digits[p]) +
                                        " out of range for party " + std::to_string(p));
        idx = idx * static_cast<std::size_t>(dims_[p]) + static_cast<std::size_t>(digits[p]);
    }
    return idx;
}

Dims Dims::select(std::span<const std::size_t> parties) const {
    std::vector<int> out;
    out.reserve(parties.size());
    for (std::size_t p : parties) out.push_back(dims_.at(p));
    return Dims(std::move(out));
}

Dims Dims::concat(const Dims& other) const {
    std::vector<int> out = dims_;
    out.insert(out.end(), other.dims_.begin(), other.dims_.end());
    return Dims(std::move(out));
}

std::string Dims::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t p = 0; p < dims_.size(); ++p) os << (p ? "," : "") << dims_[p];
    os << ')';
    return os.str();
}

std::vector<int> parse_ket(const std::string& label, const Dims& dims) {
    if (label.size() != dims.parties())
        throw std::invalid_argument("ket label '" + label + "' does not match " +
                                    std::to_string(dims.parties()) + " parties");
    std::vector<int> digits;
    digits.reserve(label.size());
    for (std::size_t p = 0; p < label.size(); ++p) {
        const char c = label[p];
        if (c < '0' || c > '9' || c - '0' >= dims[p])
            throw std::invalid_argument("ket label '" + label + "' has invalid digit for party " +
                                        std::to_string(p));
        digits.push_back(c - '0');
    }
    return digits;
}

std::string ket_label(std::span<const int> digits) {
    std::string out;
    for (int d : digits) out += static_cast<char>('0' + d);
    return out;
}

PureState::PureState(Dims dims, Vector amplitudes)
    : dims_(std::move(dims)), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != dims_.total())
        throw std::invalid_argument("PureState: amplitude count does not match dims " +
                                    dims_.to_string());
    if (std::abs(amplitudes_.squaredNorm() - 1.0) > kNormTol)
        throw std::invalid_argument("PureState: state is not normalized");
}

PureState PureState::normalized(Dims dims, Vector amplitudes) {
    const double n = amplitudes.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("PureState::normalized: zero or non-finite vector");
    amplitudes /= n;
    return PureState(std::move(dims), std::move(amplitudes));
}

PureState PureState::basis(Dims dims, std::span<const int> digits) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dims.total()));
    v(static_cast<Eigen::Index>(dims.index(digits))) = 1.0;
    return PureState(std::move(dims), std::move(v));
}

Complex PureState::amplitude(std::span<const int> digits) const {
    return amplitudes_(static_cast<Eigen::Index>(dims_.index(digits)));
}

DensityOperator::DensityOperator(Dims dims, Matrix matrix)
    : dims_(std::move(dims)), matrix_(std::move(matrix)) {
    const auto n = static_cast<Eigen::Index>(dims_.total());
    if (matrix_.rows() != n || matrix_.cols() != n)
        throw std::invalid_argument("DensityOperator: matrix size does not match dims " +
                                    dims_.to_string());
    if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
        throw std::invalid_argument("DensityOperator: matrix is not Hermitian");
    if (std::abs(matrix_.trace() - Complex(1.0)) > kTraceTol)
        throw std::invalid_argument("DensityOperator: trace differs from one");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kEigenTol)
        throw std::invalid_argument("DensityOperator: matrix has a negative eigenvalue");
}

DensityOperator DensityOperator::projector(const PureState& psi) {
    Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
    return DensityOperator(psi.dims(), std::move(m));
}

DensityOperator DensityOperator::maximally_mixed(Dims dims) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    Matrix m = Matrix::Identity(n, n) / static_cast<double>(n);
    return DensityOperator(std::move(dims), std::move(m));
}

std::size_t SchmidtData::rank(double tol) const {
    if (coefficients.empty()) return 0;
    const double threshold = tol * coefficients.front();
    return static_cast<std::size_t>(std::count_if(coefficients.begin(), coefficients.end(),
                                                  [&](double c) { return c > threshold; }));
}

PureState SchmidtData::reconstruct() const {
    const Dims cut_dims = dims.select(cut);
    const Dims rest_dims = dims.select(rest);
    const auto row = sub_indices(dims, cut);
    const auto col = sub_indices(dims, rest);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dims.total()));
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        for (std::size_t idx = 0; idx < dims.total(); ++idx)
            out(static_cast<Eigen::Index>(idx)) +=
                coefficients[i] * left[i](static_cast<Eigen::Index>(row[idx])) *
                right[i](static_cast<Eigen::Index>(col[idx]));
    return PureState::normalized(dims, std::move(out));
}

PureState tensor_product(const PureState& a, const PureState& b) {
    const auto& x = a.amplitudes();
    const auto& y = b.amplitudes();
    Vector out(x.size() * y.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out.segment(i * y.size(), y.size()) = x(i) * y;
    return PureState::normalized(a.dims().concat(b.dims()), std::move(out));
}

DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b) {
    const auto& x = a.matrix();
    const auto& y = b.matrix();
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return DensityOperator(a.dims().concat(b.dims()), std::move(out));
}

std::vector<std::size_t> complement(std::span<const std::size_t> parties, std::size_t total_parties) {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < total_parties; ++p)
        if (std::find(parties.begin(), parties.end(), p) == parties.end()) out.push_back(p);
    return out;
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep) {
    const Dims& dims = rho.dims();
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    const auto kept = sorted_parties(keep, dims.parties(), "partial_trace");
    const auto traced = complement(kept, dims.parties());
    const Dims kept_dims = dims.select(kept);
    if (traced.empty()) return DensityOperator(kept_dims, rho.matrix());

    const std::size_t dk = kept_dims.total();
    const std::size_t dt = dims.select(traced).total();
    const auto k_of = sub_indices(dims, kept);
    const auto t_of = sub_indices(dims, traced);
    // full[k * dt + t] = composite index with kept index k and traced index t
    std::vector<std::size_t> full(dims.total());
    for (std::size_t i = 0; i < dims.total(); ++i) full[k_of[i] * dt + t_of[i]] = i;

    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t r = 0; r < dk; ++r)
        for (std::size_t c = 0; c < dk; ++c) {
            Complex acc = 0.0;
            for (std::size_t t = 0; t < dt; ++t)
                acc += rho.element(full[r * dt + t], full[c * dt + t]);
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
        }
    // Summation order can leave rounding-level anti-Hermitian residue.
    Matrix herm = (out + out.adjoint()) / 2.0;
    return DensityOperator(kept_dims, std::move(herm));
}

SchmidtData schmidt_decompose(const PureState& psi, std::span<const std::size_t> cut) {
    const Dims& dims = psi.dims();
    if (cut.empty()) throw std::invalid_argument("schmidt_decompose: cut is empty");
    auto left_parties = sorted_parties(cut, dims.parties(), "schmidt_decompose");
    auto right_parties = complement(left_parties, dims.parties());
    if (right_parties.empty())
        throw std::invalid_argument("schmidt_decompose: cut must be a proper subset");

    const std::size_t rows = dims.select(left_parties).total();
    const std::size_t cols = dims.select(right_parties).total();
    const auto row = sub_indices(dims, left_parties);
    const auto col = sub_indices(dims, right_parties);
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < dims.total(); ++i)
        m(static_cast<Eigen::Index>(row[i]), static_cast<Eigen::Index>(col[i])) =
            psi.amplitudes()(static_cast<Eigen::Index>(i));

    // m = U S V^dagger, so psi = sum_i s_i u_i (x) conj(v_i).
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SchmidtData out;
    out.dims = dims;
    out.cut = std::move(left_parties);
    out.rest = std::move(right_parties);
    const auto& s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        out.coefficients.push_back(s(i));
        out.left.emplace_back(svd.matrixU().col(i));
        out.right.emplace_back(svd.matrixV().col(i).conjugate());
    }
    return out;
}

std::vector<int> rank_vector(const PureState& psi, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("rank_vector: tolerance must be non-negative");
    std::vector<int> out;
    for (std::size_t p = 0; p < psi.dims().parties(); ++p) {
        if (psi.dims().parties() == 1) {
            out.push_back(1);
            continue;
        }
        const std::size_t cut[] = {p};
        out.push_back(static_cast<int>(schmidt_decompose(psi, cut).rank(tol)));
    }
    return out;
}

double fidelity_pure(const DensityOperator& rho, const PureState& target) {
    if (!(rho.dims() == target.dims()))
        throw std::invalid_argument("fidelity_pure: dims mismatch " + rho.dims().to_string() +
                                    " vs " + target.dims().to_string());
    const Complex f = target.amplitudes().dot(rho.matrix() * target.amplitudes());
    return std::clamp(f.real(), 0.0, 1.0);
}

double amplitude_distance(const PureState& a, const PureState& b) {
    if (!(a.dims() == b.dims()))
        throw std::invalid_argument("amplitude_distance: dims mismatch");
    return (a.amplitudes() - b.amplitudes()).norm();
}

} // namespace layerq
