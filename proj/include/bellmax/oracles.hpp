#pragma once

// Closed-form reference values: the two-qubit CHSH maximum from the
// correlation matrix, GHZ maxima of the recursion family, and pinned
// setting fixtures.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bellmax/anneal.hpp"
#include "bellmax/bellops.hpp"
#include "bellmax/qlinalg.hpp"

namespace bellmax {

/// max over settings of Tr(rho B_CHSH) = 2 sqrt(m1 + m2), with m1 >= m2 the
/// two largest eigenvalues of T^T T, T_ij = Tr(rho sigma_i x sigma_j).
inline double horodecki_chsh(const DensityMatrix& rho) {
    if (rho.n_qubits() != 2) throw ArgumentError("horodecki_chsh: state must have 2 qubits");
    Eigen::Matrix3d t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            t(i, j) = rho.expectation(kron(pauli::by_index(i), pauli::by_index(j))).real();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.transpose() * t, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending
    return 2.0 * std::sqrt(std::max(0.0, ev(1) + ev(2)));
}

/// 2^((n+1)/2): the GHZ value of the recursion-normalized family.
inline double ghz_normalized_max(int n) {
    if (n < 2) throw ArgumentError("ghz_normalized_max: n must be >= 2");
    return std::pow(2.0, (n + 1) / 2.0);
}

/// Diagonal two-qubit state 1/3 (|00><00| + |01><01| + |11><11|).
inline DensityMatrix fig1a_state() { return diag_density({1.0 / 3, 1.0 / 3, 0.0, 1.0 / 3}, 2); }

struct Fixture {
    std::string name;
    int n_parties = 0;
    Family family;
    MeasurementSettings settings;
    double expected_value = 0.0;
    std::string state;  // "ghz2", "ghz3" or "fig1a"
};

inline DensityMatrix fixture_state(const std::string& name) {
    if (name == "ghz2") return ghz(2);
    if (name == "ghz3") return ghz(3);
    if (name == "fig1a") return fig1a_state();
    throw ArgumentError("unknown fixture state '" + name + "'");
}

inline std::vector<Fixture> fixtures() {
    constexpr double pi = std::numbers::pi;
    auto party = [](SettingAngles a, SettingAngles b) { return PartySettings{a, b}; };
    const SettingAngles x{pi / 2, 0.0}, y{pi / 2, pi / 2}, z{0.0, 0.0};

    std::vector<Fixture> out;
    out.push_back({"chsh-optimal", 2, Family::chsh(),
                   MeasurementSettings{{party({pi / 2, 0.0}, {0.0, 0.0}), party({pi / 4, 0.0}, {3 * pi / 4, 0.0})}},
                   2.0 * std::numbers::sqrt2, "ghz2"});
    out.push_back({"mermin-xy", 3, Family::mermin(),
                   MeasurementSettings{{party(x, y), party(x, y), party(x, y)}}, 4.0, "ghz3"});
    out.push_back({"fig1a-z", 2, Family::chsh(), MeasurementSettings{{party(z, z), party(z, z)}}, 2.0 / 3.0,
                   "fig1a"});
    return out;
}

}  // namespace bellmax
