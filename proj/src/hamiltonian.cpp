#include "shadow/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <unordered_map>

#include "shadow/errors.hpp"

namespace shadow {

HamiltonianSpec expand_square(const HamiltonianSpec& h) {
    std::unordered_map<std::uint64_t, std::pair<PauliString, std::complex<double>>> acc;
    acc.reserve(h.terms.size() * h.terms.size());
    double scale = 0.0;
    for (const auto& a : h.terms)
        for (const auto& b : h.terms) {
            auto [phase, prod] = string_mul(a.op, b.op);
            std::complex<double> c = a.coeff * b.coeff * phase.value();
            scale += std::abs(a.coeff * b.coeff);
            auto [it, inserted] = acc.try_emplace(prod.packed(), prod, c);
            if (!inserted) it->second.second += c;
        }

    HamiltonianSpec out;
    out.name = h.name.empty() ? "squared" : h.name + "^2";
    out.sites = h.sites;
    const double drop = 1e-14 * std::max(scale, 1.0);
    for (auto& [key, entry] : acc) {
        auto& [str, coeff] = entry;
        if (std::abs(coeff.imag()) > drop)
            throw NumericalError("expand_square: residual imaginary coefficient " +
                                 std::to_string(coeff.imag()) + " on " + str.str());
        if (std::abs(coeff.real()) <= drop) continue;
        out.terms.push_back({coeff.real(), str});
    }
    // canonical order, independent of hash-map iteration
    std::sort(out.terms.begin(), out.terms.end(),
              [](const HamiltonianTerm& a, const HamiltonianTerm& b) {
                  return a.op.packed() < b.op.packed();
              });
    return out;
}

} // namespace shadow
