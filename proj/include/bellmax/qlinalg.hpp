#pragma once

// Dense complex linear algebra for small multiqubit systems: Pauli
// observables, Kronecker products, density matrices and correlation tensors.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bellmax/errors.hpp"

namespace bellmax {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec3 = std::array<double, 3>;
using Rng = std::mt19937_64;

inline constexpr int kDefaultMaxQubits = 10;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-10;

/// Size guard for every dense construction. BELLMAX_MAX_QUBITS overrides the
/// default of 10; unparsable or out-of-range values fall back to the default.
inline int max_qubits() {
    const char* env = std::getenv("BELLMAX_MAX_QUBITS");
    if (env == nullptr || *env == '\0') return kDefaultMaxQubits;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 20) return kDefaultMaxQubits;
    return static_cast<int>(v);
}

inline std::size_t dim_for(int n_qubits) { return std::size_t{1} << n_qubits; }

inline Vec3 bloch_vector(double theta, double phi) {
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

/// Polar/azimuthal pair for one dichotomic measurement direction.
struct SettingAngles {
    double theta = 0.0;
    double phi = 0.0;

    Vec3 unit_vector() const { return bloch_vector(theta, phi); }

    bool valid() const {
        return std::isfinite(theta) && std::isfinite(phi) && theta >= 0.0 &&
               theta <= std::numbers::pi && phi >= 0.0 && phi < 2.0 * std::numbers::pi;
    }

    /// Map arbitrary real angles into theta in [0, pi], phi in [0, 2pi) while
    /// keeping the Bloch vector unchanged.
    static SettingAngles canonical(double theta, double phi) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        theta = std::fmod(theta, two_pi);
        if (theta < 0.0) theta += two_pi;
        if (theta > std::numbers::pi) {
            theta = two_pi - theta;
            phi += std::numbers::pi;
        }
        phi = std::fmod(phi, two_pi);
        if (phi < 0.0) phi += two_pi;
        if (phi >= two_pi) phi = 0.0;
        return {theta, phi};
    }

    friend bool operator==(const SettingAngles&, const SettingAngles&) = default;
};

namespace pauli {

inline const ComplexMatrix& identity() {
    static const ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    return m;
}

inline const ComplexMatrix& x() {
    static const ComplexMatrix m = [] {
        ComplexMatrix r(2, 2);
        r << 0.0, 1.0, 1.0, 0.0;
        return r;
    }();
    return m;
}

inline const ComplexMatrix& y() {
    static const ComplexMatrix m = [] {
        ComplexMatrix r(2, 2);
        r << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
        return r;
    }();
    return m;
}

inline const ComplexMatrix& z() {
    static const ComplexMatrix m = [] {
        ComplexMatrix r(2, 2);
        r << 1.0, 0.0, 0.0, -1.0;
        return r;
    }();
    return m;
}

/// sigma_x, sigma_y, sigma_z by index 0, 1, 2.
inline const ComplexMatrix& by_index(int i) {
    switch (i) {
        case 0: return x();
        case 1: return y();
        default: return z();
    }
}

}  // namespace pauli

/// Kronecker product; entry (i*b.dim+k, j*b.dim+l) = a(i,j) * b(k,l).
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const auto limit = static_cast<Eigen::Index>(dim_for(max_qubits()));
    const Eigen::Index rows = a.rows() * b.rows();
    const Eigen::Index cols = a.cols() * b.cols();
    if (rows > limit || cols > limit) {
        throw ResourceError("kron: result dimension " + std::to_string(rows) +
                            " exceeds the configured limit of " + std::to_string(max_qubits()) +
                            " qubits");
    }
    ComplexMatrix out(rows, cols);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const Complex s = a(i, j);
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = s * b;
        }
    return out;
}

/// v . sigma for a real unit vector v.
inline ComplexMatrix pauli_obs(const Vec3& v) {
    ComplexMatrix m(2, 2);
    m << v[2], Complex(v[0], -v[1]), Complex(v[0], v[1]), -v[2];
    return m;
}

inline ComplexMatrix pauli_obs(const SettingAngles& s) { return pauli_obs(s.unit_vector()); }

// ---------------------------------------------------------------------------
// Validation

struct ValidationFailure {
    enum class Kind { dimension, hermiticity, trace, positivity };
    Kind kind;
    double residual;
    std::string message;
};

inline const char* to_string(ValidationFailure::Kind k) {
    switch (k) {
        case ValidationFailure::Kind::dimension: return "dimension";
        case ValidationFailure::Kind::hermiticity: return "hermiticity";
        case ValidationFailure::Kind::trace: return "trace";
        case ValidationFailure::Kind::positivity: return "positivity";
    }
    return "unknown";
}

struct ValidationReport {
    std::vector<ValidationFailure> failures;

    bool valid() const { return failures.empty(); }

    const ValidationFailure* find(ValidationFailure::Kind k) const {
        for (const auto& f : failures)
            if (f.kind == k) return &f;
        return nullptr;
    }

    std::string to_string() const {
        std::ostringstream os;
        os.precision(12);
        for (const auto& f : failures)
            os << bellmax::to_string(f.kind) << ": " << f.message << " (residual " << f.residual
               << ")\n";
        return os.str();
    }
};

/// Checks dimension, hermiticity, unit trace and positive semidefiniteness.
/// Hermiticity and trace use `tol`; the eigenvalue floor is -max(tol, 1e-10).
inline ValidationReport validate_density(const ComplexMatrix& m, int n_qubits,
                                         double tol = kHermitianTolerance) {
    using Kind = ValidationFailure::Kind;
    ValidationReport report;
    if (n_qubits < 1 || n_qubits > 20) {
        report.failures.push_back({Kind::dimension, static_cast<double>(n_qubits),
                                   "qubit count must be in [1, 20]"});
        return report;
    }
    const auto d = static_cast<Eigen::Index>(dim_for(n_qubits));
    if (m.rows() != d || m.cols() != d) {
        report.failures.push_back(
            {Kind::dimension, static_cast<double>(std::abs(m.rows() - d) + std::abs(m.cols() - d)),
             "expected " + std::to_string(d) + "x" + std::to_string(d) + ", got " +
                 std::to_string(m.rows()) + "x" + std::to_string(m.cols())});
        return report;
    }
    double herm = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i; j < d; ++j)
            herm = std::max(herm, std::abs(m(i, j) - std::conj(m(j, i))));
    if (!(herm <= tol)) report.failures.push_back({Kind::hermiticity, herm, "matrix is not Hermitian"});

    const double trace_residual = std::abs(m.trace() - Complex(1.0, 0.0));
    if (!(trace_residual <= tol))
        report.failures.push_back({Kind::trace, trace_residual, "trace differs from 1"});

    const ComplexMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    const double min_eig = es.info() == Eigen::Success ? es.eigenvalues().minCoeff() : -INFINITY;
    if (!(min_eig >= -std::max(tol, kPsdTolerance)))
        report.failures.push_back(
            {Kind::positivity, min_eig, "matrix is not positive semidefinite (minimum eigenvalue)"});
    return report;
}

// ---------------------------------------------------------------------------
// Density matrices

class DensityMatrix {
public:
    /// Throws InvalidStateError carrying the validation report.
    static DensityMatrix from_matrix(ComplexMatrix m, int n_qubits, double tol = kHermitianTolerance) {
        const auto report = validate_density(m, n_qubits, tol);
        if (!report.valid()) throw InvalidStateError(report.to_string());
        return DensityMatrix(n_qubits, std::move(m));
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return dim_for(n_qubits_); }
    const ComplexMatrix& matrix() const { return matrix_; }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return matrix_(i, j); }

    double purity() const { return (matrix_ * matrix_).trace().real(); }

    /// Tr(rho * op).
    Complex expectation(const ComplexMatrix& op) const {
        return (matrix_.array() * op.transpose().array()).sum();
    }

private:
    DensityMatrix(int n, ComplexMatrix m) : n_qubits_(n), matrix_(std::move(m)) {}

    int n_qubits_;
    ComplexMatrix matrix_;
};

namespace detail {

inline void require_qubits(int n, int lo, const char* what) {
    if (n < lo || n > max_qubits())
        throw ArgumentError(std::string(what) + ": qubit count " + std::to_string(n) +
                            " outside [" + std::to_string(lo) + ", " +
                            std::to_string(max_qubits()) + "]");
}

}  // namespace detail

/// (|0...0> + |1...1>)/sqrt(2) as a rank-1 density matrix.
inline DensityMatrix ghz(int n) {
    detail::require_qubits(n, 2, "ghz");
    const auto d = static_cast<Eigen::Index>(dim_for(n));
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(0, 0) = m(0, d - 1) = m(d - 1, 0) = m(d - 1, d - 1) = 0.5;
    return DensityMatrix::from_matrix(std::move(m), n);
}

/// Hilbert-Schmidt ensemble: rho = G G^dagger / Tr(G G^dagger), G Ginibre.
inline DensityMatrix random_density(int n, Rng& rng) {
    detail::require_qubits(n, 1, "random_density");
    const auto d = static_cast<Eigen::Index>(dim_for(n));
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexMatrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            g(i, j) = Complex(re, im);
        }
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    // Exact hermiticity; the product leaves rounding noise in the lower triangle.
    for (Eigen::Index i = 0; i < d; ++i) {
        rho(i, i) = Complex(rho(i, i).real(), 0.0);
        for (Eigen::Index j = i + 1; j < d; ++j) rho(j, i) = std::conj(rho(i, j));
    }
    return DensityMatrix::from_matrix(std::move(rho), n);
}

inline DensityMatrix random_density(int n, std::uint64_t seed) {
    Rng rng(seed);
    return random_density(n, rng);
}

/// Diagonal state with the given computational-basis populations.
inline DensityMatrix diag_density(std::span<const double> probs, int n) {
    detail::require_qubits(n, 1, "diag_density");
    if (probs.size() != dim_for(n))
        throw ArgumentError("diag_density: expected " + std::to_string(dim_for(n)) +
                            " probabilities, got " + std::to_string(probs.size()));
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw ArgumentError("diag_density: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ArgumentError("diag_density: probabilities sum to " + std::to_string(sum));
    const auto d = static_cast<Eigen::Index>(probs.size());
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) = probs[static_cast<std::size_t>(i)];
    return DensityMatrix::from_matrix(std::move(m), n);
}

inline DensityMatrix diag_density(std::initializer_list<double> probs, int n) {
    return diag_density(std::span<const double>(probs.begin(), probs.size()), n);
}

// ---------------------------------------------------------------------------
// Correlation tensor

inline std::size_t pow3(int n) {
    std::size_t r = 1;
    for (int i = 0; i < n; ++i) r *= 3;
    return r;
}

/// T[i1..iN] = Tr(rho sigma_i1 x ... x sigma_iN), i in {x, y, z}. Party 0 is
/// the most significant (leftmost) index, matching kron ordering.
class CorrelationTensor {
public:
    CorrelationTensor(int n_qubits, std::vector<double> values)
        : n_qubits_(n_qubits), values_(std::move(values)) {
        if (values_.size() != pow3(n_qubits_))
            throw ArgumentError("CorrelationTensor: expected 3^N entries");
    }

    int n_qubits() const { return n_qubits_; }
    std::span<const double> values() const { return values_; }

    double at(std::span<const int> index) const {
        std::size_t flat = 0;
        for (int i : index) flat = flat * 3 + static_cast<std::size_t>(i);
        return values_.at(flat);
    }

    double at(std::initializer_list<int> index) const {
        return at(std::span<const int>(index.begin(), index.size()));
    }

private:
    int n_qubits_;
    std::vector<double> values_;
};

/// Uses the one-nonzero-per-row structure of Pauli strings: O(3^N 2^N).
inline CorrelationTensor correlation_tensor(const DensityMatrix& rho) {
    const int n = rho.n_qubits();
    if (n > max_qubits())
        throw ResourceError("correlation_tensor: " + std::to_string(n) + " qubits exceeds limit");
    const std::size_t count = pow3(n);
    const std::size_t d = dim_for(n);
    const ComplexMatrix& m = rho.matrix();
    std::vector<double> values(count);
    std::vector<int> digits(static_cast<std::size_t>(n), 0);
    static constexpr std::array<Complex, 4> minus_i_pow = {Complex(1, 0), Complex(0, -1),
                                                           Complex(-1, 0), Complex(0, 1)};
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::uint64_t flip = 0;   // rows/cols connected by X or Y
        std::uint64_t sign = 0;   // bits contributing (-1) from Y or Z
        int n_y = 0;
        for (int party = 0; party < n; ++party) {
            const std::uint64_t bit = std::uint64_t{1} << (n - 1 - party);
            switch (digits[static_cast<std::size_t>(party)]) {
                case 0: flip |= bit; break;
                case 1: flip |= bit; sign |= bit; ++n_y; break;
                default: sign |= bit; break;
            }
        }
        Complex acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const auto r = static_cast<Eigen::Index>(c ^ flip);
            const Complex e = m(r, static_cast<Eigen::Index>(c));
            acc += (std::popcount(c & sign) & 1) ? -e : e;
        }
        values[flat] = (minus_i_pow[static_cast<std::size_t>(n_y % 4)] * acc).real();

        for (int party = n - 1; party >= 0; --party) {
            auto& dgt = digits[static_cast<std::size_t>(party)];
            if (++dgt < 3) break;
            dgt = 0;
        }
    }
    return CorrelationTensor(n, std::move(values));
}

}  // namespace bellmax
