#include "shadow/corrmat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "shadow/errors.hpp"
#include "shadow/parallel.hpp"

namespace shadow {

int StringTable::add(const PauliString& p) {
    const std::uint64_t key = p.packed();
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const int w = p.weight();
    if (w > 4)
        throw ValidationError("StringTable: weight " + std::to_string(w) +
                              " exceeds the fused-kernel envelope (2*k_M = 4)");
    CompiledString cs;
    cs.weight = static_cast<std::uint8_t>(w);
    cs.pow3 = std::pow(3.0, w);
    int k = 0;
    for (int j = 0; j < p.size(); ++j) {
        if (p.at(j) == Axis::I) continue;
        cs.site[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(j);
        cs.axis[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(p.at(j)) - 1;
        cs.offset[static_cast<std::size_t>(k)] =
            static_cast<std::uint16_t>(3 * j + static_cast<int>(p.at(j)) - 1);
        ++k;
    }
    const int id = static_cast<int>(strings_.size());
    strings_.push_back(cs);
    index_.emplace(key, id);
    return id;
}

int StringTable::find(const PauliString& p) const { return find_packed(p.packed()); }

int StringTable::find_packed(std::uint64_t key) const {
    auto it = index_.find(key);
    return it == index_.end() ? -1 : it->second;
}

PauliString ProductCache::product_string(int b, int a) const {
    return string_mul(basis[static_cast<std::size_t>(b)],
                      basis[static_cast<std::size_t>(a)]).second;
}

ProductCache build_product_cache(std::vector<PauliString> basis) {
    ProductCache cache;
    if (basis.empty()) throw ValidationError("build_product_cache: empty basis");
    cache.sites = basis.front().size();
    cache.basis = std::move(basis);
    const int dim = cache.dim();
    const std::size_t npairs = static_cast<std::size_t>(dim) * dim;
    cache.string_id.resize(npairs);
    cache.phase_exp.resize(npairs);

    std::unordered_map<std::uint64_t, PauliString> distinct;
    std::vector<std::uint64_t> pair_key(npairs);
    for (int b = 0; b < dim; ++b)
        for (int a = 0; a < dim; ++a) {
            auto [phase, prod] = string_mul(cache.basis[static_cast<std::size_t>(b)],
                                            cache.basis[static_cast<std::size_t>(a)]);
            const std::size_t i = cache.pair_index(b, a);
            const std::uint64_t key = prod.packed();
            pair_key[i] = key;
            cache.phase_exp[i] = static_cast<std::uint8_t>(phase.exponent());
            distinct.try_emplace(key, std::move(prod));
        }
    // table ids ordered by (weight, packed key): the estimator kernels
    // then process contiguous equal-weight runs
    std::vector<const PauliString*> order;
    order.reserve(distinct.size());
    for (const auto& [key, str] : distinct) order.push_back(&str);
    std::sort(order.begin(), order.end(), [](const PauliString* x, const PauliString* y) {
        const int wx = x->weight(), wy = y->weight();
        return wx != wy ? wx < wy : x->packed() < y->packed();
    });
    for (const PauliString* s : order) cache.table.add(*s);
    for (std::size_t i = 0; i < npairs; ++i)
        cache.string_id[i] = cache.table.find_packed(pair_key[i]);
    return cache;
}

namespace {

void compute_bloch(const SnapshotBag& bag, int threads, std::vector<double>& n,
                   std::vector<double>& dn) {
    const std::size_t size = bag.theta.size() * 3;
    n.resize(size);
    dn.resize(size);
    const int sites = bag.sites;
    parallel_blocks(block_count(bag.count), threads, [&](int blk) {
        const int l0 = blk * kReduceBlock;
        const int l1 = std::min(bag.count, l0 + kReduceBlock);
        for (int l = l0; l < l1; ++l)
            for (int j = 0; j < sites; ++j) {
                const std::size_t i = bag.idx(l, j);
                const double* r = bag.rot.data() + 6 * i;
                const double st = std::sin(bag.theta[i]);
                const double ct = std::cos(bag.theta[i]);
                double* np = n.data() + 3 * i;
                double* dp = dn.data() + 3 * i;
                for (int a = 0; a < 3; ++a) {
                    np[a] = -st * r[a] + ct * r[3 + a];
                    dp[a] = -(ct * r[a] + st * r[3 + a]);
                }
            }
    });
}

struct WeightedString {
    CompiledString cs;
    double coeff; // folded: weights * pow3 * scale / N
};

// Leave-one-out gradient kernel over a weight-sorted work list: for every
// weighted string and every snapshot in the block, add
// coeff * dn_j * prod_{p != j} n_p to grad[l*sites + j] for each support
// site j.
void gradient_block(const std::vector<WeightedString>& ws, const double* n, const double* dn,
                    int sites, int l0, int l1, double* grad) {
    // weight-partition boundaries (ws sorted by weight ascending, >= 1)
    std::size_t b1 = 0, b2 = 0, b3 = 0, b4 = 0;
    while (b1 < ws.size() && ws[b1].cs.weight < 1) ++b1;
    b2 = b1;
    while (b2 < ws.size() && ws[b2].cs.weight < 2) ++b2;
    b3 = b2;
    while (b3 < ws.size() && ws[b3].cs.weight < 3) ++b3;
    b4 = b3;
    while (b4 < ws.size() && ws[b4].cs.weight < 4) ++b4;

    for (int l = l0; l < l1; ++l) {
        const std::size_t off = static_cast<std::size_t>(l) * sites;
        const double* bn = n + off * 3;
        const double* bd = dn + off * 3;
        double* g = grad + off;
        for (std::size_t i = b1; i < b2; ++i) {
            const CompiledString& cs = ws[i].cs;
            g[cs.site[0]] += ws[i].coeff * bd[cs.offset[0]];
        }
        for (std::size_t i = b2; i < b3; ++i) {
            const CompiledString& cs = ws[i].cs;
            const double c = ws[i].coeff;
            const double f0 = bn[cs.offset[0]], f1 = bn[cs.offset[1]];
            g[cs.site[0]] += c * bd[cs.offset[0]] * f1;
            g[cs.site[1]] += c * bd[cs.offset[1]] * f0;
        }
        for (std::size_t i = b3; i < b4; ++i) {
            const CompiledString& cs = ws[i].cs;
            const double c = ws[i].coeff;
            const double f0 = bn[cs.offset[0]], f1 = bn[cs.offset[1]], f2 = bn[cs.offset[2]];
            g[cs.site[0]] += c * bd[cs.offset[0]] * f1 * f2;
            g[cs.site[1]] += c * bd[cs.offset[1]] * f0 * f2;
            g[cs.site[2]] += c * bd[cs.offset[2]] * f0 * f1;
        }
        for (std::size_t i = b4; i < ws.size(); ++i) {
            const CompiledString& cs = ws[i].cs;
            const double c = ws[i].coeff;
            const double f0 = bn[cs.offset[0]], f1 = bn[cs.offset[1]];
            const double f2 = bn[cs.offset[2]], f3 = bn[cs.offset[3]];
            const double p01 = f0 * f1, p23 = f2 * f3;
            g[cs.site[0]] += c * bd[cs.offset[0]] * f1 * p23;
            g[cs.site[1]] += c * bd[cs.offset[1]] * f0 * p23;
            g[cs.site[2]] += c * bd[cs.offset[2]] * p01 * f3;
            g[cs.site[3]] += c * bd[cs.offset[3]] * p01 * f2;
        }
    }
}

} // namespace

ShadowEstimator::ShadowEstimator(const SnapshotBag& bag, const ProductCache& cache, int threads)
    : bag_(&bag), cache_(&cache), threads_(resolve_threads(threads)) {
    if (bag.sites != cache.sites)
        throw ValidationError("ShadowEstimator: bag and cache disagree on the site count");
    build_plan();
    refresh();
}

void ShadowEstimator::build_plan() {
    const auto& strings = cache_->table.strings();
    for (auto& v : plan_.offsets) v.clear();
    for (auto& v : plan_.ids) v.clear();
    for (std::size_t s = 0; s < strings.size(); ++s) {
        const CompiledString& cs = strings[s];
        auto& off = plan_.offsets[cs.weight];
        for (int k = 0; k < cs.weight; ++k) off.push_back(cs.offset[static_cast<std::size_t>(k)]);
        plan_.ids[cs.weight].push_back(static_cast<std::int32_t>(s));
    }
    plan_.built_for = static_cast<int>(strings.size());
}

void ShadowEstimator::refresh() {
    if (plan_.built_for != cache_->table.size()) build_plan();
    compute_bloch(*bag_, threads_, n_, dn_);
    const std::size_t s_count = cache_->table.strings().size();
    // per-weight-group layout: counts and running offsets into the
    // block-partial rows
    std::array<std::size_t, 5> group_begin{};
    std::size_t total = 0;
    for (int w = 0; w < 5; ++w) {
        group_begin[static_cast<std::size_t>(w)] = total;
        total += plan_.ids[static_cast<std::size_t>(w)].size();
    }
    const int nblocks = block_count(bag_->count);
    std::vector<double> partial(static_cast<std::size_t>(nblocks) * total, 0.0);
    const int sites = bag_->sites;
    parallel_blocks(nblocks, threads_, [&](int blk) {
        const int l0 = blk * kReduceBlock;
        const int l1 = std::min(bag_->count, l0 + kReduceBlock);
        double* row = partial.data() + static_cast<std::size_t>(blk) * total;
        for (int l = l0; l < l1; ++l) {
            const double* base = n_.data() + static_cast<std::size_t>(l) * sites * 3;
            double* acc = row;
            // weight 0: empty product
            for (std::size_t i = 0; i < plan_.ids[0].size(); ++i) acc[i] += 1.0;
            acc += plan_.ids[0].size();
            {
                const auto& off = plan_.offsets[1];
                for (std::size_t i = 0; i < plan_.ids[1].size(); ++i) acc[i] += base[off[i]];
                acc += plan_.ids[1].size();
            }
            {
                const auto& off = plan_.offsets[2];
                for (std::size_t i = 0; i < plan_.ids[2].size(); ++i)
                    acc[i] += base[off[2 * i]] * base[off[2 * i + 1]];
                acc += plan_.ids[2].size();
            }
            {
                const auto& off = plan_.offsets[3];
                for (std::size_t i = 0; i < plan_.ids[3].size(); ++i)
                    acc[i] += base[off[3 * i]] * base[off[3 * i + 1]] * base[off[3 * i + 2]];
                acc += plan_.ids[3].size();
            }
            {
                const auto& off = plan_.offsets[4];
                for (std::size_t i = 0; i < plan_.ids[4].size(); ++i)
                    acc[i] += (base[off[4 * i]] * base[off[4 * i + 1]]) *
                              (base[off[4 * i + 2]] * base[off[4 * i + 3]]);
            }
        }
    });
    // combine blocks in ascending order, then scatter into table order
    std::vector<double> sums(total, 0.0);
    for (int blk = 0; blk < nblocks; ++blk) {
        const double* row = partial.data() + static_cast<std::size_t>(blk) * total;
        for (std::size_t i = 0; i < total; ++i) sums[i] += row[i];
    }
    est_.assign(s_count, 0.0);
    const double inv_n = 1.0 / bag_->count;
    const auto& strings = cache_->table.strings();
    for (int w = 0; w < 5; ++w) {
        const auto& ids = plan_.ids[static_cast<std::size_t>(w)];
        const double* src = sums.data() + group_begin[static_cast<std::size_t>(w)];
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto id = static_cast<std::size_t>(ids[i]);
            est_[id] = src[i] * strings[id].pow3 * inv_n;
        }
    }
}

CorrelationMatrix ShadowEstimator::matrix() const {
    const int dim = cache_->dim();
    CorrelationMatrix m;
    m.cache = cache_;
    m.entries.resize(dim, dim);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
            const std::size_t i = cache_->pair_index(b, a);
            m.entries(b, a) =
                Phase(cache_->phase_exp[i]).apply(est_[static_cast<std::size_t>(cache_->string_id[i])]);
        }
    return m;
}

double ShadowEstimator::energy(const std::vector<std::pair<double, int>>& term_ids) const {
    double e = 0.0;
    for (const auto& [coeff, id] : term_ids) e += coeff * est_[static_cast<std::size_t>(id)];
    return e;
}

void ShadowEstimator::accumulate_gradient(const std::vector<double>& weights, double scale,
                                          std::vector<double>& grad) const {
    const auto& strings = cache_->table.strings();
    if (weights.size() != strings.size())
        throw ValidationError("accumulate_gradient: weight vector size mismatch");
    grad.resize(bag_->theta.size());
    std::vector<WeightedString> ws;
    ws.reserve(256);
    const double inv_n = scale / bag_->count;
    // table ids are weight-sorted for product strings; later-registered
    // Hamiltonian terms may break that, so sort the compact work list
    for (std::size_t s = 0; s < strings.size(); ++s) {
        if (weights[s] == 0.0 || strings[s].weight == 0) continue;
        ws.push_back({strings[s], weights[s] * strings[s].pow3 * inv_n});
    }
    std::stable_sort(ws.begin(), ws.end(), [](const WeightedString& a, const WeightedString& b) {
        return a.cs.weight < b.cs.weight;
    });
    parallel_blocks(block_count(bag_->count), threads_, [&](int blk) {
        const int l0 = blk * kReduceBlock;
        const int l1 = std::min(bag_->count, l0 + kReduceBlock);
        gradient_block(ws, n_.data(), dn_.data(), bag_->sites, l0, l1, grad.data());
    });
}

std::vector<std::pair<double, int>> register_hamiltonian(ProductCache& cache,
                                                         const HamiltonianSpec& h) {
    if (h.sites != cache.sites)
        throw ValidationError("register_hamiltonian: site count mismatch");
    std::vector<std::pair<double, int>> ids;
    ids.reserve(h.terms.size());
    for (const auto& t : h.terms) ids.emplace_back(t.coeff, cache.table.add(t.op));
    return ids;
}

CorrelationMatrix assemble(const SnapshotBag& bag, const ProductCache& cache, int threads) {
    return ShadowEstimator(bag, cache, threads).matrix();
}

SparseMatrixDeriv assemble_derivative(const SnapshotBag& bag, const ProductCache& cache,
                                      int site, int l) {
    if (bag.sites != cache.sites)
        throw ValidationError("assemble_derivative: bag and cache disagree on the site count");
    SparseMatrixDeriv out;
    const int dim = cache.dim();
    const auto& strings = cache.table.strings();
    const double inv_n = 1.0 / bag.count;
    // per-string derivative factor at this (site, l); zero when the string
    // is trivial at the site
    std::vector<double> dval(strings.size(), 0.0);
    std::vector<char> touches(strings.size(), 0);
    for (std::size_t s = 0; s < strings.size(); ++s) {
        const CompiledString& cs = strings[s];
        double prod = 1.0;
        bool hit = false;
        for (int k = 0; k < cs.weight; ++k) {
            const int j = cs.site[static_cast<std::size_t>(k)];
            const int a = cs.axis[static_cast<std::size_t>(k)];
            const RotationCoeffs rc = bag.coeffs_at(l, j);
            const double th = bag.theta_at(l, j);
            if (j == site) {
                prod *= bloch_vector_deriv(rc, th)[static_cast<std::size_t>(a)];
                hit = true;
            } else {
                prod *= bloch_vector(rc, th)[static_cast<std::size_t>(a)];
            }
        }
        if (!hit) continue;
        touches[s] = 1;
        dval[s] = cs.pow3 * prod * inv_n;
    }
    for (int b = 0; b < dim; ++b)
        for (int a = 0; a < dim; ++a) {
            const std::size_t i = cache.pair_index(b, a);
            const auto sid = static_cast<std::size_t>(cache.string_id[i]);
            if (!touches[sid]) continue;
            out.entries.push_back({b, a, Phase(cache.phase_exp[i]).apply(dval[sid])});
        }
    return out;
}

double energy(const SnapshotBag& bag, const HamiltonianSpec& h, int threads) {
    if (h.sites != bag.sites) throw ValidationError("energy: site count mismatch");
    double e = 0.0;
    for (const auto& t : h.terms) e += t.coeff * estimate(bag, t.op, threads);
    return e;
}

std::vector<double> energy_grad(const SnapshotBag& bag, const HamiltonianSpec& h, int threads) {
    if (h.sites != bag.sites) throw ValidationError("energy_grad: site count mismatch");
    std::vector<double> n, dn;
    compute_bloch(bag, threads, n, dn);
    std::vector<WeightedString> ws;
    StringTable table;
    std::vector<double> coeffs;
    for (const auto& t : h.terms) {
        const int id = table.add(t.op);
        if (id == static_cast<int>(coeffs.size()))
            coeffs.push_back(t.coeff);
        else
            coeffs[static_cast<std::size_t>(id)] += t.coeff;
    }
    const double inv_n = 1.0 / bag.count;
    for (int s = 0; s < table.size(); ++s) {
        const CompiledString& cs = table.at(s);
        if (cs.weight == 0 || coeffs[static_cast<std::size_t>(s)] == 0.0) continue;
        ws.push_back({cs, coeffs[static_cast<std::size_t>(s)] * cs.pow3 * inv_n});
    }
    std::stable_sort(ws.begin(), ws.end(), [](const WeightedString& a, const WeightedString& b) {
        return a.cs.weight < b.cs.weight;
    });
    std::vector<double> grad(bag.theta.size(), 0.0);
    parallel_blocks(block_count(bag.count), threads, [&](int blk) {
        const int l0 = blk * kReduceBlock;
        const int l1 = std::min(bag.count, l0 + kReduceBlock);
        gradient_block(ws, n.data(), dn.data(), bag.sites, l0, l1, grad.data());
    });
    return grad;
}

void write_matrix_csv(const CorrelationMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out.precision(17);
    const auto& basis = m.cache->basis;
    for (std::size_t a = 0; a < basis.size(); ++a) out << (a ? "," : "") << basis[a].str();
    out << "\n";
    for (Eigen::Index b = 0; b < m.entries.rows(); ++b) {
        for (Eigen::Index a = 0; a < m.entries.cols(); ++a) {
            const auto v = m.entries(b, a);
            if (a) out << ",";
            out << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "j";
        }
        out << "\n";
    }
}

} // namespace shadow
