#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace amcsim {

// CSR directed graph: offsets has vertex_count+1 entries, neighbors holds the
// flat adjacency lists.
struct Graph {
    std::vector<uint64_t> offsets{0};
    std::vector<uint64_t> neighbors;

    uint64_t vertex_count() const { return offsets.size() - 1; }
    uint64_t edge_count() const { return neighbors.size(); }
    uint64_t degree(uint64_t v) const { return offsets[v + 1] - offsets[v]; }

    bool valid() const;
};

enum class DegreeModel : uint8_t { uniform, power_law };

Graph gen_graph(uint64_t vertex_count, uint64_t avg_degree, DegreeModel model, uint64_t seed);

struct MutationSchedule {
    double add_fraction = 0.0;
    double delete_fraction = 0.0;
    uint64_t seed = 0;
};

// Drops all edges touching the deleted vertices (slots stay, isolated) and
// appends new vertices with fresh edges; the input graph is untouched.
Graph mutate(const Graph& g, const MutationSchedule& schedule);

// "CSR1" magic, u64 vertex count, u64 edge count, offsets, neighbors, all LE.
void save_csr(const Graph& g, const std::string& path);
Graph load_csr(const std::string& path);
size_t csr_file_bytes(const Graph& g);

} // namespace amcsim
