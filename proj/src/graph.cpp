#include "amcsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace amcsim {

bool Graph::valid() const {
    if (offsets.empty() || offsets.front() != 0)
        return false;
    for (size_t i = 1; i < offsets.size(); ++i)
        if (offsets[i] < offsets[i - 1])
            return false;
    if (offsets.back() != neighbors.size())
        return false;
    uint64_t n = vertex_count();
    for (uint64_t u : neighbors)
        if (u >= n)
            return false;
    return true;
}

Graph gen_graph(uint64_t vertex_count, uint64_t avg_degree, DegreeModel model, uint64_t seed) {
    if (vertex_count < 2)
        throw std::invalid_argument("gen_graph needs at least 2 vertices");
    if (avg_degree < 1)
        throw std::invalid_argument("gen_graph needs avg_degree >= 1");
    if (avg_degree >= vertex_count)
        throw std::invalid_argument("avg_degree must be smaller than vertex_count");

    std::mt19937_64 rng(seed);
    std::vector<uint64_t> degrees(vertex_count, avg_degree);

    if (model == DegreeModel::power_law) {
        // Truncated Zipf(s=1.8) over 1..min(n-1, 1024), rescaled so the mean
        // lands on avg_degree.
        const double s = 1.8;
        uint64_t kmax = std::min<uint64_t>(vertex_count - 1, 1024);
        std::vector<double> cdf(kmax);
        double acc = 0.0;
        for (uint64_t k = 1; k <= kmax; ++k) {
            acc += 1.0 / std::pow(static_cast<double>(k), s);
            cdf[k - 1] = acc;
        }
        std::uniform_real_distribution<double> uni(0.0, acc);
        double sum = 0.0;
        std::vector<double> raw(vertex_count);
        for (uint64_t v = 0; v < vertex_count; ++v) {
            double x = uni(rng);
            auto it = std::lower_bound(cdf.begin(), cdf.end(), x);
            raw[v] = static_cast<double>((it - cdf.begin()) + 1);
            sum += raw[v];
        }
        double scale = static_cast<double>(avg_degree) * static_cast<double>(vertex_count) / sum;
        for (uint64_t v = 0; v < vertex_count; ++v) {
            auto d = static_cast<uint64_t>(std::llround(raw[v] * scale));
            degrees[v] = std::clamp<uint64_t>(d, 1, vertex_count - 1);
        }
    }

    Graph g;
    g.offsets.resize(vertex_count + 1);
    g.offsets[0] = 0;
    for (uint64_t v = 0; v < vertex_count; ++v)
        g.offsets[v + 1] = g.offsets[v] + degrees[v];
    g.neighbors.resize(g.offsets.back());

    std::uniform_int_distribution<uint64_t> pick(0, vertex_count - 1);
    for (uint64_t v = 0; v < vertex_count; ++v) {
        for (uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            uint64_t u = pick(rng);
            while (u == v)
                u = pick(rng);
            g.neighbors[e] = u;
        }
    }
    return g;
}

Graph mutate(const Graph& g, const MutationSchedule& schedule) {
    if (schedule.add_fraction < 0 || schedule.add_fraction > 0.5 ||
        schedule.delete_fraction < 0 || schedule.delete_fraction > 0.5)
        throw std::invalid_argument("mutation fractions must be in [0, 0.5]");

    uint64_t n = g.vertex_count();
    auto del_count = static_cast<uint64_t>(std::llround(schedule.delete_fraction * static_cast<double>(n)));
    auto add_count = static_cast<uint64_t>(std::llround(schedule.add_fraction * static_cast<double>(n)));

    std::mt19937_64 rng(schedule.seed);
    std::vector<uint64_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::unordered_set<uint64_t> deleted(ids.begin(), ids.begin() + static_cast<long>(del_count));

    uint64_t new_n = n + add_count;
    uint64_t avg = n ? std::max<uint64_t>(1, g.edge_count() / n) : 1;

    Graph out;
    out.offsets.reserve(new_n + 1);
    out.neighbors.reserve(g.edge_count());
    out.offsets = {0};
    for (uint64_t v = 0; v < n; ++v) {
        if (!deleted.count(v)) {
            for (uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                uint64_t u = g.neighbors[e];
                if (!deleted.count(u))
                    out.neighbors.push_back(u);
            }
        }
        out.offsets.push_back(out.neighbors.size());
    }
    std::uniform_int_distribution<uint64_t> pick(0, new_n - 1);
    for (uint64_t v = n; v < new_n; ++v) {
        for (uint64_t e = 0; e < avg; ++e) {
            uint64_t u = pick(rng);
            while (u == v || deleted.count(u))
                u = pick(rng);
            out.neighbors.push_back(u);
        }
        out.offsets.push_back(out.neighbors.size());
    }
    return out;
}

namespace {

void put_u64(std::ofstream& out, uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i)
        buf[i] = static_cast<char>(v >> (8 * i));
    out.write(buf, 8);
}

uint64_t get_u64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in)
        throw std::runtime_error("truncated CSR file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

} // namespace

void save_csr(const Graph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open CSR file for writing: " + path);
    out.write("CSR1", 4);
    put_u64(out, g.vertex_count());
    put_u64(out, g.edge_count());
    for (uint64_t o : g.offsets)
        put_u64(out, o);
    for (uint64_t u : g.neighbors)
        put_u64(out, u);
}

Graph load_csr(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open CSR file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "CSR1")
        throw std::runtime_error("bad CSR magic in " + path);
    uint64_t n = get_u64(in);
    uint64_t m = get_u64(in);
    Graph g;
    g.offsets.resize(n + 1);
    for (auto& o : g.offsets)
        o = get_u64(in);
    g.neighbors.resize(m);
    for (auto& u : g.neighbors)
        u = get_u64(in);
    if (!g.valid())
        throw std::runtime_error("CSR file fails validation: " + path);
    return g;
}

size_t csr_file_bytes(const Graph& g) {
    return 4 + 8 + 8 + 8 * g.offsets.size() + 8 * g.neighbors.size();
}

} // namespace amcsim
