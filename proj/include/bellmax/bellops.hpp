#pragma once

// Symbolic Bell operators over per-party setting choices, and their
// evaluation Tr(rho B) either by dense assembly or by contraction with the
// state's correlation tensor.

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bellmax/qlinalg.hpp"

namespace bellmax {

/// Which of the party's two settings a term uses (A < B in canonical order).
enum class Choice : std::uint8_t { A = 0, B = 1 };

using Pattern = std::vector<Choice>;

inline Choice flip(Choice c) { return c == Choice::A ? Choice::B : Choice::A; }

inline std::string to_string(const Pattern& p) {
    std::string s;
    s.reserve(p.size());
    for (Choice c : p) s.push_back(c == Choice::A ? 'A' : 'B');
    return s;
}

inline Pattern parse_pattern(std::string_view s) {
    Pattern p;
    p.reserve(s.size());
    for (char ch : s) {
        if (ch == 'A') p.push_back(Choice::A);
        else if (ch == 'B') p.push_back(Choice::B);
        else throw ArgumentError("pattern must contain only 'A' and 'B': " + std::string(s));
    }
    return p;
}

struct Term {
    double coefficient = 0.0;
    Pattern pattern;

    friend bool operator==(const Term&, const Term&) = default;
};

enum class Normalization { recursion_normalized, literal };

inline const char* to_string(Normalization n) {
    return n == Normalization::literal ? "literal" : "recursion-normalized";
}

struct BellTermList {
    int n_parties = 0;
    std::vector<Term> terms;
    std::string name;
    std::optional<double> classical_bound;
    Normalization normalization = Normalization::literal;
};

inline constexpr double kZeroCoefficient = 1e-14;

/// Merge equal patterns, drop |c| <= 1e-14, sort lexicographically by pattern.
inline BellTermList canonicalize(const BellTermList& t) {
    std::map<Pattern, double> merged;
    for (const auto& term : t.terms) {
        if (static_cast<int>(term.pattern.size()) != t.n_parties)
            throw ArgumentError("canonicalize: pattern length differs from party count");
        merged[term.pattern] += term.coefficient;
    }
    BellTermList out = t;
    out.terms.clear();
    for (auto& [pattern, c] : merged)
        if (std::abs(c) > kZeroCoefficient) out.terms.push_back({c, pattern});
    return out;
}

inline BellTermList chsh() {
    using enum Choice;
    return {2, {{1.0, {A, A}}, {1.0, {A, B}}, {1.0, {B, A}}, {-1.0, {B, B}}}, "chsh", 2.0,
            Normalization::literal};
}

inline BellTermList mermin3() {
    using enum Choice;
    return {3,
            {{1.0, {A, A, A}}, {-1.0, {A, B, B}}, {-1.0, {B, A, B}}, {-1.0, {B, B, A}}},
            "mermin",
            2.0,
            Normalization::literal};
}

/// Four-party operator with the literal sign table: + for zero, three or four
/// B choices, - for one or two.
inline BellTermList mabk4() {
    BellTermList t{4, {}, "mabk", 4.0, Normalization::literal};
    for (unsigned bits = 0; bits < 16; ++bits) {
        Pattern p(4);
        int weight = 0;
        for (int j = 0; j < 4; ++j) {
            const bool b = (bits >> (3 - j)) & 1U;
            p[static_cast<std::size_t>(j)] = b ? Choice::B : Choice::A;
            weight += b;
        }
        const double sign = (weight == 1 || weight == 2) ? -1.0 : 1.0;
        t.terms.push_back({sign, std::move(p)});
    }
    return t;
}

/// Exchange A and B in every pattern of every term.
inline BellTermList prime(const BellTermList& t) {
    BellTermList out = t;
    for (auto& term : out.terms)
        for (auto& c : term.pattern) c = flip(c);
    return out;
}

/// B_{N+1} = 1/2 [(A + B) x B_N + (A - B) x B_N'] with the new party first.
inline BellTermList extend(const BellTermList& t) {
    const BellTermList p = prime(t);
    BellTermList out{t.n_parties + 1, {}, "recursion", 2.0, Normalization::recursion_normalized};
    out.terms.reserve(4 * t.terms.size());
    auto push = [&](double c, Choice head, const Pattern& tail) {
        Pattern pat;
        pat.reserve(tail.size() + 1);
        pat.push_back(head);
        pat.insert(pat.end(), tail.begin(), tail.end());
        out.terms.push_back({c, std::move(pat)});
    };
    for (const auto& term : t.terms) {
        push(0.5 * term.coefficient, Choice::A, term.pattern);
        push(0.5 * term.coefficient, Choice::B, term.pattern);
    }
    for (const auto& term : p.terms) {
        push(0.5 * term.coefficient, Choice::A, term.pattern);
        push(-0.5 * term.coefficient, Choice::B, term.pattern);
    }
    return canonicalize(out);
}

/// Recursion-normalized N-party operator: CHSH extended N-2 times.
inline BellTermList build(int n) {
    if (n < 2 || n > max_qubits())
        throw ArgumentError("build: party count " + std::to_string(n) + " outside [2, " +
                            std::to_string(max_qubits()) + "]");
    BellTermList t = canonicalize(chsh());
    t.name = "recursion";
    t.normalization = Normalization::recursion_normalized;
    for (int k = 2; k < n; ++k) t = extend(t);
    return t;
}

/// t with A and B exchanged for each party whose flag is set.
inline BellTermList relabel(const BellTermList& t, const std::vector<bool>& flipped) {
    BellTermList out = t;
    for (auto& term : out.terms)
        for (std::size_t j = 0; j < term.pattern.size() && j < flipped.size(); ++j)
            if (flipped[j]) term.pattern[j] = flip(term.pattern[j]);
    return canonicalize(out);
}

struct Equivalence {
    std::vector<bool> flipped;  // per-party A<->B relabeling applied to the reference
    double scale = 0.0;         // candidate = scale * relabel(reference)
};

/// Every per-party relabeling under which `candidate` is a single scalar
/// multiple of `reference` (relative tolerance `tol` on the ratios).
inline std::vector<Equivalence> equivalences(const BellTermList& candidate,
                                             const BellTermList& reference, double tol = 1e-12) {
    std::vector<Equivalence> found;
    if (candidate.n_parties != reference.n_parties) return found;
    const BellTermList cand = canonicalize(candidate);
    const int n = candidate.n_parties;
    for (unsigned mask = 0; mask < (1U << n); ++mask) {
        std::vector<bool> flipped(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) flipped[static_cast<std::size_t>(j)] = (mask >> j) & 1U;
        const BellTermList ref = relabel(reference, flipped);
        if (ref.terms.size() != cand.terms.size() || ref.terms.empty()) continue;
        const double scale = cand.terms.front().coefficient / ref.terms.front().coefficient;
        bool ok = true;
        for (std::size_t i = 0; i < ref.terms.size() && ok; ++i) {
            ok = ref.terms[i].pattern == cand.terms[i].pattern &&
                 std::abs(cand.terms[i].coefficient - scale * ref.terms[i].coefficient) <=
                     tol * std::abs(cand.terms[i].coefficient);
        }
        if (ok) found.push_back({std::move(flipped), scale});
    }
    return found;
}

// ---------------------------------------------------------------------------
// Settings

struct PartySettings {
    SettingAngles a;
    SettingAngles b;

    const SettingAngles& choose(Choice c) const { return c == Choice::A ? a : b; }

    friend bool operator==(const PartySettings&, const PartySettings&) = default;
};

/// Two measurement directions per party; 4N angles in total, flattened as
/// (a.theta, a.phi, b.theta, b.phi) per party.
struct MeasurementSettings {
    std::vector<PartySettings> parties;

    int n_parties() const { return static_cast<int>(parties.size()); }

    bool valid() const {
        for (const auto& p : parties)
            if (!p.a.valid() || !p.b.valid()) return false;
        return true;
    }

    std::vector<double> to_angles() const {
        std::vector<double> out;
        out.reserve(4 * parties.size());
        for (const auto& p : parties) out.insert(out.end(), {p.a.theta, p.a.phi, p.b.theta, p.b.phi});
        return out;
    }

    /// Angles taken verbatim; use `canonical_from_angles` for arbitrary reals.
    static MeasurementSettings from_angles(std::span<const double> angles) {
        if (angles.size() % 4 != 0) throw ArgumentError("settings need 4 angles per party");
        MeasurementSettings s;
        for (std::size_t i = 0; i < angles.size(); i += 4)
            s.parties.push_back({{angles[i], angles[i + 1]}, {angles[i + 2], angles[i + 3]}});
        return s;
    }

    static MeasurementSettings canonical_from_angles(std::span<const double> angles) {
        MeasurementSettings s = from_angles(angles);
        for (auto& p : s.parties) {
            p.a = SettingAngles::canonical(p.a.theta, p.a.phi);
            p.b = SettingAngles::canonical(p.b.theta, p.b.phi);
        }
        return s;
    }

    /// Unit vectors laid out as [2j + choice].
    std::vector<Vec3> vectors() const {
        std::vector<Vec3> v;
        v.reserve(2 * parties.size());
        for (const auto& p : parties) {
            v.push_back(p.a.unit_vector());
            v.push_back(p.b.unit_vector());
        }
        return v;
    }

    friend bool operator==(const MeasurementSettings&, const MeasurementSettings&) = default;
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline void require_parties(const BellTermList& t, int n, const char* what) {
    if (t.n_parties != n)
        throw ArgumentError(std::string(what) + ": operator has " + std::to_string(t.n_parties) +
                            " parties, expected " + std::to_string(n));
}

inline std::size_t leaf_index(const Pattern& p) {
    std::size_t idx = 0;
    for (Choice c : p) idx = (idx << 1) | static_cast<std::size_t>(c);
    return idx;
}

/// Dense sum of coefficient * kron_j (v_j . sigma) over terms.
inline ComplexMatrix assemble_vectors(const BellTermList& t, std::span<const Vec3> vecs) {
    const int n = t.n_parties;
    if (n < 1 || n > max_qubits())
        throw ResourceError("assemble: " + std::to_string(n) + " parties exceeds limit");
    if (vecs.size() != 2 * static_cast<std::size_t>(n))
        throw ArgumentError("assemble: settings do not match party count");
    const std::size_t d = dim_for(n);

    std::vector<std::array<Complex, 4>> obs(vecs.size());
    for (std::size_t k = 0; k < vecs.size(); ++k) {
        const Vec3& v = vecs[k];
        obs[k] = {Complex(v[2], 0.0), Complex(v[0], -v[1]), Complex(v[0], v[1]), Complex(-v[2], 0.0)};
    }

    ComplexMatrix acc = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    std::vector<Complex> cur(d * d), next(d * d);
    for (const auto& term : t.terms) {
        if (static_cast<int>(term.pattern.size()) != n)
            throw ArgumentError("assemble: pattern length differs from party count");
        cur[0] = term.coefficient;
        std::size_t s = 1;
        for (int j = 0; j < n; ++j) {
            const auto& o = obs[2 * static_cast<std::size_t>(j) +
                                static_cast<std::size_t>(term.pattern[static_cast<std::size_t>(j)])];
            const std::size_t s2 = 2 * s;
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t l = 0; l < s; ++l) {
                    const Complex x = cur[i * s + l];
                    next[(2 * i) * s2 + 2 * l] = x * o[0];
                    next[(2 * i) * s2 + 2 * l + 1] = x * o[1];
                    next[(2 * i + 1) * s2 + 2 * l] = x * o[2];
                    next[(2 * i + 1) * s2 + 2 * l + 1] = x * o[3];
                }
            std::swap(cur, next);
            s = s2;
        }
        Complex* a = acc.data();
        for (std::size_t i = 0; i < d * d; ++i) a[i] += cur[i];
    }
    return acc;
}

inline double trace_product(const ComplexMatrix& rho, const ComplexMatrix& op) {
    const Complex tr = (rho.array() * op.transpose().array()).sum();
    if (std::abs(tr.imag()) > 1e-10)
        throw NumericalError("Tr(rho B) has imaginary residue " + std::to_string(tr.imag()));
    return tr.real();
}

}  // namespace detail

inline ComplexMatrix assemble(const BellTermList& t, const MeasurementSettings& s) {
    detail::require_parties(t, s.n_parties(), "assemble");
    return detail::assemble_vectors(t, s.vectors());
}

inline double value_dense(const DensityMatrix& rho, const BellTermList& t, const MeasurementSettings& s) {
    detail::require_parties(t, rho.n_qubits(), "value_dense");
    detail::require_parties(t, s.n_parties(), "value_dense");
    return detail::trace_product(rho.matrix(), assemble(t, s));
}

/// Tr(rho B) through the correlation tensor. Contracts one party at a time
/// for both of its settings, which yields all 2^N choice patterns in
/// O(3^N) work; terms then index the leaves. Holds scratch space, so one
/// instance must not be shared between threads.
class TensorEvaluator {
public:
    TensorEvaluator(CorrelationTensor tensor, const BellTermList& t) : tensor_(std::move(tensor)) {
        detail::require_parties(t, tensor_.n_qubits(), "value_tensor");
        const BellTermList c = canonicalize(t);
        for (const auto& term : c.terms) {
            leaves_.push_back(detail::leaf_index(term.pattern));
            coefficients_.push_back(term.coefficient);
        }
        scratch_a_.resize(pow3(tensor_.n_qubits()));
        scratch_b_.resize(pow3(tensor_.n_qubits()));
    }

    int n_parties() const { return tensor_.n_qubits(); }

    double operator()(std::span<const Vec3> vecs) const {
        const int n = tensor_.n_qubits();
        if (vecs.size() != 2 * static_cast<std::size_t>(n))
            throw ArgumentError("value_tensor: settings do not match party count");
        const auto src = tensor_.values();
        std::copy(src.begin(), src.end(), scratch_a_.begin());
        std::vector<double>* in = &scratch_a_;
        std::vector<double>* out = &scratch_b_;
        std::size_t blocks = 1;
        std::size_t stride = src.size() / 3;
        for (int j = 0; j < n; ++j) {
            const Vec3& va = vecs[2 * static_cast<std::size_t>(j)];
            const Vec3& vb = vecs[2 * static_cast<std::size_t>(j) + 1];
            const std::size_t len = 3 * stride;
            for (std::size_t b = 0; b < blocks; ++b) {
                const double* x = in->data() + b * len;
                double* oa = out->data() + (2 * b) * stride;
                double* ob = oa + stride;
                for (std::size_t r = 0; r < stride; ++r) {
                    const double x0 = x[r], x1 = x[stride + r], x2 = x[2 * stride + r];
                    oa[r] = va[0] * x0 + va[1] * x1 + va[2] * x2;
                    ob[r] = vb[0] * x0 + vb[1] * x1 + vb[2] * x2;
                }
            }
            std::swap(in, out);
            blocks *= 2;
            stride /= 3;
        }
        double value = 0.0;
        for (std::size_t k = 0; k < leaves_.size(); ++k) value += coefficients_[k] * (*in)[leaves_[k]];
        return value;
    }

private:
    CorrelationTensor tensor_;
    std::vector<std::size_t> leaves_;
    std::vector<double> coefficients_;
    mutable std::vector<double> scratch_a_;
    mutable std::vector<double> scratch_b_;
};

inline double value_tensor(const CorrelationTensor& tensor, const BellTermList& t,
                           const MeasurementSettings& s) {
    detail::require_parties(t, s.n_parties(), "value_tensor");
    return TensorEvaluator(tensor, t)(s.vectors());
}

}  // namespace bellmax
