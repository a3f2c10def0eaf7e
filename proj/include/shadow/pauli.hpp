#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shadow {

/// Single-site Pauli operator; I is the multiplicative identity.
enum class Axis : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char axis_char(Axis a);
Axis axis_from_char(char c);

/// Element of {+1, +i, -1, -i}, stored as the exponent k in i^k.
class Phase {
public:
    constexpr Phase() : exp_(0) {}
    constexpr explicit Phase(int exponent) : exp_(static_cast<std::uint8_t>(exponent & 3)) {}

    static constexpr Phase one() { return Phase(0); }
    static constexpr Phase i() { return Phase(1); }
    static constexpr Phase minus_one() { return Phase(2); }
    static constexpr Phase minus_i() { return Phase(3); }

    constexpr int exponent() const { return exp_; }
    constexpr bool is_real() const { return (exp_ & 1) == 0; }

    std::complex<double> value() const {
        switch (exp_) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }

    /// i^k * x for real x, with exact zeros in the untouched component.
    std::complex<double> apply(double x) const {
        switch (exp_) {
            case 0: return {x, 0.0};
            case 1: return {0.0, x};
            case 2: return {-x, 0.0};
            default: return {0.0, -x};
        }
    }

    constexpr Phase operator*(Phase other) const { return Phase(exp_ + other.exp_); }
    constexpr bool operator==(const Phase&) const = default;

private:
    std::uint8_t exp_;
};

/// Tensor product of single-site Paulis over an L-site periodic chain,
/// stored densely (one axis tag per site, site 0 first).
struct PauliString {
    std::vector<Axis> axes;

    PauliString() = default;
    explicit PauliString(std::vector<Axis> a) : axes(std::move(a)) {}

    static PauliString identity(int sites) {
        return PauliString(std::vector<Axis>(static_cast<std::size_t>(sites), Axis::I));
    }

    /// Parse compact text like "IXZY" (site 0 leftmost).
    static PauliString parse(std::string_view text);

    int size() const { return static_cast<int>(axes.size()); }

    /// Number of non-identity sites.
    int weight() const {
        int w = 0;
        for (Axis a : axes) w += (a != Axis::I);
        return w;
    }

    bool is_identity() const { return weight() == 0; }

    Axis at(int site) const { return axes[static_cast<std::size_t>(site)]; }
    void set(int site, Axis a) { axes[static_cast<std::size_t>(site)] = a; }

    /// 2-bit-per-site packing; unique key for L <= 32.
    std::uint64_t packed() const {
        std::uint64_t key = 0;
        for (std::size_t j = 0; j < axes.size(); ++j)
            key |= static_cast<std::uint64_t>(axes[j]) << (2 * j);
        return key;
    }

    std::string str() const;

    bool operator==(const PauliString&) const = default;
};

/// sigma^a sigma^b = phase * sigma^c.
std::pair<Phase, Axis> axis_mul(Axis a, Axis b);

/// Sitewise product with accumulated phase. Pauli strings are Hermitian,
/// so this also evaluates P^dagger Q. Throws ValidationError on length
/// mismatch.
std::pair<Phase, PauliString> string_mul(const PauliString& p, const PauliString& q);

/// All Pauli strings of weight <= k_max in the fixed order every other
/// module indexes through: identity, then weight-1 sorted by (site, axis
/// X<Y<Z), then weight-2 sorted by (site pair, axis pair). Supports
/// k_max in {1, 2}; the matrix dimension for k_max = 2 is
/// 1 + 3L + 9L(L-1)/2.
std::vector<PauliString> enumerate_basis(int sites, int k_max);

/// Strings acting non-trivially on exactly k contiguous sites of the
/// periodic lattice (every site of the window non-identity). Count is
/// 3L for k = 1 and L*9*3^(k-2) for 2 <= k < L.
std::vector<PauliString> enumerate_contiguous(int sites, int k);

} // namespace shadow
