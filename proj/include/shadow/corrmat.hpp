#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "shadow/hamiltonian.hpp"
#include "shadow/pauli.hpp"
#include "shadow/snapshots.hpp"

namespace shadow {

/// Compiled form of a Pauli string for the estimator kernels: support
/// sites and axis indices (0..2 for X..Z), weight and 3^weight. Products
/// of two weight-<=2 strings never exceed weight 4, so the support fits a
/// fixed array.
struct CompiledString {
    std::array<std::uint8_t, 4> site{};
    std::array<std::uint8_t, 4> axis{};
    std::array<std::uint16_t, 4> offset{}; // site*3 + axis, into the n/dn rows
    std::uint8_t weight = 0;
    double pow3 = 1.0;
};

/// Deduplicated table of compiled strings keyed by packed representation.
class StringTable {
public:
    int add(const PauliString& p);
    int find(const PauliString& p) const; // -1 when absent
    int find_packed(std::uint64_t key) const;
    int size() const { return static_cast<int>(strings_.size()); }
    const CompiledString& at(int id) const { return strings_[static_cast<std::size_t>(id)]; }
    const std::vector<CompiledString>& strings() const { return strings_; }

private:
    std::vector<CompiledString> strings_;
    std::unordered_map<std::uint64_t, int> index_;
};

/// Precomputed string products P_b P_a for every ordered basis pair,
/// stored as (string id, phase) plus the deduplicated product table.
/// Computed once and shared read-only by every epoch.
struct ProductCache {
    int sites = 0;
    std::vector<PauliString> basis;
    StringTable table;
    std::vector<std::int32_t> string_id; // dim*dim, row-major (b, a)
    std::vector<std::uint8_t> phase_exp; // dim*dim

    int dim() const { return static_cast<int>(basis.size()); }
    std::size_t pair_index(int b, int a) const {
        return static_cast<std::size_t>(b) * static_cast<std::size_t>(basis.size()) +
               static_cast<std::size_t>(a);
    }
    Phase phase(int b, int a) const { return Phase(phase_exp[pair_index(b, a)]); }
    PauliString product_string(int b, int a) const;
};

ProductCache build_product_cache(std::vector<PauliString> basis);

/// Hermitian matrix of estimated correlators <P_b P_a> over the basis of
/// the cache. Every entry is purely real or purely imaginary and the
/// diagonal is exactly 1.
struct CorrelationMatrix {
    Eigen::MatrixXcd entries;
    const ProductCache* cache = nullptr;
};

/// Element-wise sparse derivative of the correlation matrix with respect
/// to one theta_{j,l}; only entries whose product string touches the site
/// appear.
struct SparseMatrixDeriv {
    struct Entry {
        int row, col;
        std::complex<double> value;
    };
    std::vector<Entry> entries;
};

/// Fused estimator over one bag and one product cache. Owns the Bloch
/// vectors n, their theta-derivatives and per-string estimates; refresh()
/// must be called after any change to bag.theta. All reductions use fixed
/// snapshot blocks (parallel.hpp), so results do not depend on the worker
/// count.
class ShadowEstimator {
public:
    ShadowEstimator(const SnapshotBag& bag, const ProductCache& cache, int threads = 0);

    void refresh();

    const std::vector<double>& estimates() const { return est_; }
    double string_estimate(int id) const { return est_[static_cast<std::size_t>(id)]; }

    CorrelationMatrix matrix() const;

    /// sum over terms of coeff * estimate(term). Term strings must have
    /// been registered through the cache table (register_hamiltonian).
    double energy(const std::vector<std::pair<double, int>>& term_ids) const;

    /// grad_{l,j} += scale * d/dtheta_{j,l} sum_c weights[c] * estimate(c),
    /// where weights runs over table string ids. Used for both the energy
    /// and barrier gradients.
    void accumulate_gradient(const std::vector<double>& weights, double scale,
                             std::vector<double>& grad) const;

    const SnapshotBag& bag() const { return *bag_; }
    const ProductCache& cache() const { return *cache_; }
    int threads() const { return threads_; }

    const std::vector<double>& bloch() const { return n_; }
    const std::vector<double>& bloch_deriv() const { return dn_; }

private:
    const SnapshotBag* bag_;
    const ProductCache* cache_;
    int threads_;
    std::vector<double> n_, dn_;   // count x sites x 3
    std::vector<double> est_;      // per table string

    // strings regrouped by weight with contiguous offset arrays, so the
    // hot kernels run branch-free fixed-trip loops
    struct KernelPlan {
        std::array<std::vector<std::uint16_t>, 5> offsets; // weight -> w entries per string
        std::array<std::vector<std::int32_t>, 5> ids;      // weight -> table id per string
        int built_for = 0;
    };
    KernelPlan plan_;
    void build_plan();
};

/// Register every term of H in the cache table (so the estimator can see
/// them) and return (coeff, string id) pairs. Term weights above 4 are
/// outside the fused-kernel envelope and rejected; use estimate() for
/// arbitrary strings.
std::vector<std::pair<double, int>> register_hamiltonian(ProductCache& cache,
                                                         const HamiltonianSpec& h);

CorrelationMatrix assemble(const SnapshotBag& bag, const ProductCache& cache, int threads = 0);

SparseMatrixDeriv assemble_derivative(const SnapshotBag& bag, const ProductCache& cache,
                                      int site, int l);

double energy(const SnapshotBag& bag, const HamiltonianSpec& h, int threads = 0);

/// d energy / d theta_{j,l}, count x sites row-major, including the 1/N
/// factor.
std::vector<double> energy_grad(const SnapshotBag& bag, const HamiltonianSpec& h,
                                int threads = 0);

/// CSV export: header row of basis labels, entries as "re+imj" text.
void write_matrix_csv(const CorrelationMatrix& m, const std::string& path);

} // namespace shadow
