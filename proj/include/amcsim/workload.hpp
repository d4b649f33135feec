#pragma once

#include "amcsim/address.hpp"
#include "amcsim/graph.hpp"
#include "amcsim/trace.hpp"

#include <cstdint>
#include <vector>

namespace amcsim {

// Virtual placement of the four kernel arrays. The vertex array (per-vertex
// delta/property values read when a vertex is processed) is the prefetcher
// target; the frontier bitmap drives metadata staging.
struct LayoutPlan {
    RegionDescriptor vertex{};
    RegionDescriptor neighbor{};
    RegionDescriptor property{};
    RegionDescriptor frontier{};

    uint64_t v_addr(uint64_t v) const { return vertex.base.value + v * vertex.element_size; }
    uint64_t n_addr(uint64_t e) const { return neighbor.base.value + e * neighbor.element_size; }
    uint64_t p_addr(uint64_t u) const { return property.base.value + u * property.element_size; }
    uint64_t f_addr(uint64_t v) const { return frontier.base.value + v * frontier.element_size; }

    RegionMap region_map() const { return RegionMap{vertex, frontier}; }
    void validate() const;
};

// Packed arrays (8B vertex entries, 4B neighbor ids, 8B properties, 1B
// frontier flags) in consecutive page-aligned regions.
LayoutPlan default_layout(uint64_t vertex_count, uint64_t edge_count);

struct PgdParams {
    double alpha = 0.85;
    double delta_threshold = 0.0;
    double epsilon = 0.0;
    unsigned max_iterations = 10;

    void validate() const;
};

// Access PCs carried on trace records so PC-localized baselines can train.
inline constexpr uint64_t kPcVertexLoad = 0xA0;
inline constexpr uint64_t kPcNeighborLoad = 0xB0;
inline constexpr uint64_t kPcPropertyAccess = 0xC0;
inline constexpr uint64_t kPcFrontierLoad = 0xF0;

// Per-iteration active flags computed by the embedded delta-PageRank
// evaluation; iteration 0 activates everything, a vertex stays active while
// its accumulated |delta| exceeds the threshold. Stops at convergence
// (error <= epsilon), an empty active set, or max_iterations.
std::vector<std::vector<uint8_t>> pgd_active_history(const Graph& g, const PgdParams& params);

std::vector<TraceEvent> emit_pgd_trace(const Graph& g, const PgdParams& params, const LayoutPlan& layout,
                                       bool with_pcs = true);

// BFS / connected components / Bellman-Ford style kernels under the same
// trace grammar. BFS and Bellman-Ford run twice back to back, the second
// time on the mutated graph.
std::vector<TraceEvent> emit_bfs_trace(const Graph& g, const MutationSchedule& schedule,
                                       const LayoutPlan& layout, unsigned max_iterations,
                                       bool with_pcs = true);
std::vector<TraceEvent> emit_cc_trace(const Graph& g, const LayoutPlan& layout, unsigned max_iterations,
                                      bool with_pcs = true);
std::vector<TraceEvent> emit_bellmanford_trace(const Graph& g, const MutationSchedule& schedule,
                                               const LayoutPlan& layout, unsigned max_iterations,
                                               bool with_pcs = true);

// ---------------------------------------------------------------------------
// Worked example: a two-iteration golden micro-trace with per-access
// miss flags, the recorded-correlation rows it induces, and the golden
// PC-localized streams used for the baseline contrast.

struct FixtureAccess {
    uint64_t vaddr = 0;
    uint64_t pc = 0;
    bool is_store = false;
    bool l2_miss = false; // golden miss flags; test-assertion data
};

struct ExpectedEntry {
    std::vector<uint64_t> trigger_deltas; // byte offsets from the target base
    std::vector<BlockAddress> misses;
};

struct WorkedExample {
    Graph graph;
    LayoutPlan layout; // one 64B cache line per array element
    std::vector<uint64_t> scan_order;           // frontier scan, vertices 1..7
    std::vector<uint64_t> active1, active2;     // active vertex ids per iteration
    std::vector<FixtureAccess> iteration1, iteration2;
    std::vector<ExpectedEntry> expected_entries;  // sequence-derived recording
    std::vector<ExpectedEntry> table_entries; // table variant (four-miss third row)
    std::vector<std::vector<uint64_t>> pc_streams; // golden A/B/C streams as vaddrs

    uint64_t v_addr(uint64_t i) const { return layout.v_addr(i); }
    uint64_t n_addr(uint64_t i) const { return layout.n_addr(i); }
    uint64_t p_addr(uint64_t i) const { return layout.p_addr(i); }
    uint64_t f_addr(uint64_t i) const { return layout.f_addr(i); }
    BlockAddress v_block(uint64_t i) const;
    BlockAddress n_block(uint64_t i) const;
    BlockAddress p_block(uint64_t i) const;

    // Directive-framed traces (no frontier scan; the verbatim listings).
    std::vector<TraceEvent> trace_iteration1() const;
    std::vector<TraceEvent> full_trace() const;
};

WorkedExample worked_example_fixture();

} // namespace amcsim
