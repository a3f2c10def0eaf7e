#include "shadow/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "shadow/errors.hpp"
#include "shadow/parallel.hpp"

namespace shadow {

namespace {

constexpr char kMagic[8] = {'S', 'H', 'D', 'W', 'B', 'A', 'G', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_raw(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
}

void write_vec(std::ofstream& out, const std::vector<double>& v) {
    const std::uint64_t n = v.size();
    write_raw(out, n);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_vec(std::ifstream& in) {
    std::uint64_t n = 0;
    read_raw(in, n);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

} // namespace

void save_checkpoint(const std::string& path, const SnapshotBag& bag,
                     const OptimizerState* state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof kMagic);
    write_raw(out, bag.seed);
    write_raw(out, static_cast<std::int32_t>(bag.count));
    write_raw(out, static_cast<std::int32_t>(bag.sites));
    write_vec(out, bag.theta);
    const std::uint8_t has_state = state ? 1 : 0;
    write_raw(out, has_state);
    if (state) {
        write_raw(out, static_cast<std::int32_t>(state->epoch));
        write_raw(out, state->lr);
        write_raw(out, state->x_eps);
        write_raw(out, static_cast<std::uint8_t>(state->phase));
        write_vec(out, state->m);
        write_vec(out, state->v);
    }
    if (!out) throw NumericalError("short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw ValidationError(path + " is not a snapshot-bag checkpoint");
    std::uint64_t seed = 0;
    std::int32_t count = 0, sites = 0;
    read_raw(in, seed);
    read_raw(in, count);
    read_raw(in, sites);
    std::vector<double> theta = read_vec(in);
    Checkpoint cp{sample_haar(seed, count, sites), std::nullopt};
    if (theta.size() != cp.bag.theta.size())
        throw ValidationError(path + ": theta size mismatch");
    cp.bag.theta = std::move(theta);
    std::uint8_t has_state = 0;
    read_raw(in, has_state);
    if (in && has_state) {
        OptimizerState st;
        std::int32_t epoch = 0;
        std::uint8_t phase = 0;
        read_raw(in, epoch);
        read_raw(in, st.lr);
        read_raw(in, st.x_eps);
        read_raw(in, phase);
        st.epoch = epoch;
        st.phase = static_cast<OptimizerPhase>(phase);
        st.m = read_vec(in);
        st.v = read_vec(in);
        cp.state = std::move(st);
    }
    if (!in) throw ValidationError(path + ": truncated checkpoint");
    return cp;
}

void write_trace_csv(const std::string& path, const std::vector<EpochRecord>& history,
                     int sites) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << "epoch,cost,energy,energy_density,lambda_min,lr,mu,beta1,beta2,x_eps\n";
    char line[512];
    for (const auto& r : history) {
        std::snprintf(line, sizeof line,
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                      r.cost, r.energy, r.energy / sites, r.lambda_min, r.lr, r.mu, r.beta1,
                      r.beta2, r.x_eps);
        out << line;
    }
}

std::vector<double> estimate_many(const SnapshotBag& bag, const std::vector<PauliString>& ops,
                                  int threads) {
    struct Support {
        std::vector<std::pair<int, int>> sites; // (site, axis 0..2)
        double pow3;
    };
    std::vector<Support> supports;
    supports.reserve(ops.size());
    for (const auto& p : ops) {
        if (p.size() != bag.sites)
            throw ValidationError("estimate_many: string length mismatch");
        Support s;
        for (int j = 0; j < p.size(); ++j)
            if (p.at(j) != Axis::I)
                s.sites.emplace_back(j, static_cast<int>(p.at(j)) - 1);
        s.pow3 = std::pow(3.0, static_cast<double>(s.sites.size()));
        supports.push_back(std::move(s));
    }
    const int nblocks = block_count(bag.count);
    std::vector<double> partial(static_cast<std::size_t>(nblocks) * ops.size(), 0.0);
    parallel_blocks(nblocks, threads, [&](int blk) {
        const int l0 = blk * kReduceBlock;
        const int l1 = std::min(bag.count, l0 + kReduceBlock);
        double* acc = partial.data() + static_cast<std::size_t>(blk) * ops.size();
        std::vector<double> n(static_cast<std::size_t>(bag.sites) * 3);
        for (int l = l0; l < l1; ++l) {
            for (int j = 0; j < bag.sites; ++j) {
                const auto nv = bloch_vector(bag.coeffs_at(l, j), bag.theta_at(l, j));
                n[3 * static_cast<std::size_t>(j) + 0] = nv[0];
                n[3 * static_cast<std::size_t>(j) + 1] = nv[1];
                n[3 * static_cast<std::size_t>(j) + 2] = nv[2];
            }
            for (std::size_t s = 0; s < supports.size(); ++s) {
                double prod = 1.0;
                for (const auto& [j, a] : supports[s].sites)
                    prod *= n[3 * static_cast<std::size_t>(j) + static_cast<std::size_t>(a)];
                acc[s] += prod;
            }
        }
    });
    std::vector<double> out(ops.size(), 0.0);
    for (int blk = 0; blk < nblocks; ++blk) {
        const double* acc = partial.data() + static_cast<std::size_t>(blk) * ops.size();
        for (std::size_t s = 0; s < ops.size(); ++s) out[s] += acc[s];
    }
    for (std::size_t s = 0; s < ops.size(); ++s)
        out[s] *= supports[s].pow3 / static_cast<double>(bag.count);
    return out;
}

void write_correlators_csv(const std::string& path, const std::vector<PauliString>& ops,
                           const std::vector<double>& values) {
    if (ops.size() != values.size())
        throw ValidationError("write_correlators_csv: size mismatch");
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << "op,weight,value\n";
    char line[128];
    for (std::size_t i = 0; i < ops.size(); ++i) {
        std::snprintf(line, sizeof line, ",%d,%.17g\n", ops[i].weight(), values[i]);
        out << ops[i].str() << line;
    }
}

} // namespace shadow
