#include "shadow/pauli.hpp"

#include <array>

#include "shadow/errors.hpp"

namespace shadow {

namespace {

// Result axis and phase exponent of sigma^a sigma^b. Row = a, column = b.
// XY = iZ, YZ = iX, ZX = iY; reversed order picks up -i.
constexpr std::array<std::array<std::uint8_t, 4>, 4> kAxisTable = {{
    {0, 1, 2, 3},
    {1, 0, 3, 2},
    {2, 3, 0, 1},
    {3, 2, 1, 0},
}};
constexpr std::array<std::array<std::uint8_t, 4>, 4> kPhaseTable = {{
    {0, 0, 0, 0},
    {0, 0, 1, 3},
    {0, 3, 0, 1},
    {0, 1, 3, 0},
}};

} // namespace

char axis_char(Axis a) {
    switch (a) {
        case Axis::I: return 'I';
        case Axis::X: return 'X';
        case Axis::Y: return 'Y';
        default: return 'Z';
    }
}

Axis axis_from_char(char c) {
    switch (c) {
        case 'I': return Axis::I;
        case 'X': return Axis::X;
        case 'Y': return Axis::Y;
        case 'Z': return Axis::Z;
        default: throw ValidationError(std::string("invalid Pauli axis character '") + c + "'");
    }
}

PauliString PauliString::parse(std::string_view text) {
    std::vector<Axis> axes;
    axes.reserve(text.size());
    for (char c : text) axes.push_back(axis_from_char(c));
    return PauliString(std::move(axes));
}

std::string PauliString::str() const {
    std::string s;
    s.reserve(axes.size());
    for (Axis a : axes) s.push_back(axis_char(a));
    return s;
}

std::pair<Phase, Axis> axis_mul(Axis a, Axis b) {
    auto ia = static_cast<std::size_t>(a);
    auto ib = static_cast<std::size_t>(b);
    return {Phase(kPhaseTable[ia][ib]), static_cast<Axis>(kAxisTable[ia][ib])};
}

std::pair<Phase, PauliString> string_mul(const PauliString& p, const PauliString& q) {
    if (p.size() != q.size())
        throw ValidationError("string_mul: length mismatch (" + std::to_string(p.size()) +
                              " vs " + std::to_string(q.size()) + ")");
    PauliString out = PauliString::identity(p.size());
    int exp = 0;
    for (int j = 0; j < p.size(); ++j) {
        auto ia = static_cast<std::size_t>(p.at(j));
        auto ib = static_cast<std::size_t>(q.at(j));
        exp += kPhaseTable[ia][ib];
        out.set(j, static_cast<Axis>(kAxisTable[ia][ib]));
    }
    return {Phase(exp), std::move(out)};
}

std::vector<PauliString> enumerate_basis(int sites, int k_max) {
    if (sites < 2) throw ValidationError("enumerate_basis: need at least 2 sites");
    if (k_max < 1 || k_max > 2)
        throw ValidationError("enumerate_basis: max weight " + std::to_string(k_max) +
                              " unsupported (matrix dimension envelope requires k_max <= 2)");
    static constexpr Axis kNonId[3] = {Axis::X, Axis::Y, Axis::Z};
    std::vector<PauliString> out;
    std::size_t total = 1 + 3 * static_cast<std::size_t>(sites);
    if (k_max == 2) total += 9 * static_cast<std::size_t>(sites) * (sites - 1) / 2;
    out.reserve(total);

    out.push_back(PauliString::identity(sites));
    for (int j = 0; j < sites; ++j)
        for (Axis a : kNonId) {
            PauliString s = PauliString::identity(sites);
            s.set(j, a);
            out.push_back(std::move(s));
        }
    if (k_max == 2) {
        for (int i = 0; i < sites; ++i)
            for (int j = i + 1; j < sites; ++j)
                for (Axis a : kNonId)
                    for (Axis b : kNonId) {
                        PauliString s = PauliString::identity(sites);
                        s.set(i, a);
                        s.set(j, b);
                        out.push_back(std::move(s));
                    }
    }
    return out;
}

std::vector<PauliString> enumerate_contiguous(int sites, int k) {
    if (k < 1 || k > sites) throw ValidationError("enumerate_contiguous: need 1 <= k <= L");
    static constexpr Axis kNonId[3] = {Axis::X, Axis::Y, Axis::Z};
    std::vector<PauliString> out;
    // k == L: every window start yields the same string set; emit once.
    int starts = (k == sites) ? 1 : sites;
    for (int s = 0; s < starts; ++s) {
        std::vector<int> choice(static_cast<std::size_t>(k), 0);
        for (;;) {
            PauliString p = PauliString::identity(sites);
            for (int m = 0; m < k; ++m) p.set((s + m) % sites, kNonId[choice[static_cast<std::size_t>(m)]]);
            out.push_back(std::move(p));
            int pos = k - 1;
            while (pos >= 0 && choice[static_cast<std::size_t>(pos)] == 2) {
                choice[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++choice[static_cast<std::size_t>(pos)];
        }
    }
    return out;
}

} // namespace shadow
