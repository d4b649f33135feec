#include "amcsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace amcsim {

namespace {

uint64_t page_align_up(uint64_t v) {
    return (v + 4095) & ~uint64_t{4095};
}

struct TraceSink {
    std::vector<TraceEvent>& out;
    const LayoutPlan& layout;
    bool with_pcs;

    void access(uint64_t vaddr, uint64_t pc, bool is_store = false) {
        out.push_back(with_pcs ? TraceEvent::access_pc(vaddr, pc, is_store)
                               : TraceEvent::access(vaddr, is_store));
    }
    void frontier_load(uint64_t v) { access(layout.f_addr(v), kPcFrontierLoad); }
    void vertex_load(uint64_t v) { access(layout.v_addr(v), kPcVertexLoad); }
    void neighbor_load(uint64_t e) { access(layout.n_addr(e), kPcNeighborLoad); }
    void property_load(uint64_t u) { access(layout.p_addr(u), kPcPropertyAccess); }
    void property_store(uint64_t u) { access(layout.p_addr(u), kPcPropertyAccess, true); }
    void update() { out.push_back(TraceEvent::directive(TraceEvent::Kind::update)); }
};

void emit_prologue(std::vector<TraceEvent>& out, const LayoutPlan& layout) {
    out.push_back(TraceEvent::directive(TraceEvent::Kind::init));
    out.push_back(TraceEvent::region_directive(TraceEvent::Kind::addr_tbase, layout.vertex));
    out.push_back(TraceEvent::region_directive(TraceEvent::Kind::addr_fbase, layout.frontier));
}

// Deterministic per-edge weight for the Bellman-Ford kernel; no weight array
// is modeled in memory.
uint64_t edge_weight(uint64_t edge_index) {
    uint64_t x = edge_index * 0x9e3779b97f4a7c15ULL;
    x ^= x >> 29;
    return 1 + (x & 7);
}

} // namespace

void LayoutPlan::validate() const {
    const RegionDescriptor* regions[4] = {&vertex, &neighbor, &property, &frontier};
    for (const auto* r : regions)
        r->validate();
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            uint64_t a0 = regions[i]->base.value, a1 = a0 + regions[i]->byte_length();
            uint64_t b0 = regions[j]->base.value, b1 = b0 + regions[j]->byte_length();
            if (a0 < b1 && b0 < a1)
                throw std::invalid_argument("layout regions overlap");
        }
    }
    uint32_t t = vertex.element_size, f = frontier.element_size;
    if (t % f != 0 && f % t != 0)
        throw std::invalid_argument("frontier element size must divide the target element size or vice versa");
}

LayoutPlan default_layout(uint64_t vertex_count, uint64_t edge_count) {
    LayoutPlan plan;
    uint64_t base = 0x10000000;
    plan.vertex = {VirtualAddress{base}, vertex_count, 8};
    base = page_align_up(base + plan.vertex.byte_length());
    plan.neighbor = {VirtualAddress{base}, std::max<uint64_t>(edge_count, 1), 4};
    base = page_align_up(base + plan.neighbor.byte_length());
    plan.property = {VirtualAddress{base}, vertex_count, 8};
    base = page_align_up(base + plan.property.byte_length());
    plan.frontier = {VirtualAddress{base}, vertex_count, 1};
    plan.validate();
    return plan;
}

void PgdParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("pgd alpha must be in (0,1)");
    if (delta_threshold < 0.0)
        throw std::invalid_argument("pgd delta_threshold must be >= 0");
    if (epsilon < 0.0)
        throw std::invalid_argument("pgd epsilon must be >= 0");
    if (max_iterations == 0)
        throw std::invalid_argument("pgd max_iterations must be >= 1");
}

std::vector<std::vector<uint8_t>> pgd_active_history(const Graph& g, const PgdParams& params) {
    params.validate();
    uint64_t n = g.vertex_count();
    std::vector<double> delta(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    std::vector<uint8_t> active(n, 1);
    std::vector<std::vector<uint8_t>> history;

    for (unsigned iter = 0; iter < params.max_iterations; ++iter) {
        history.push_back(active);
        std::vector<double> ngh_sum(n, 0.0);
        for (uint64_t v = 0; v < n; ++v) {
            if (!active[v] || g.degree(v) == 0)
                continue;
            double share = delta[v] / static_cast<double>(g.degree(v));
            for (uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e)
                ngh_sum[g.neighbors[e]] += share;
        }
        double error = 0.0;
        std::vector<uint8_t> next(n, 0);
        bool any = false;
        for (uint64_t u = 0; u < n; ++u) {
            error += std::fabs(ngh_sum[u]);
            delta[u] = params.alpha * ngh_sum[u];
            if (std::fabs(delta[u]) > params.delta_threshold) {
                next[u] = 1;
                any = true;
            }
        }
        if (error <= params.epsilon || !any)
            break;
        active = std::move(next);
    }
    return history;
}

std::vector<TraceEvent> emit_pgd_trace(const Graph& g, const PgdParams& params, const LayoutPlan& layout,
                                       bool with_pcs) {
    auto history = pgd_active_history(g, params);
    std::vector<TraceEvent> out;
    emit_prologue(out, layout);
    TraceSink sink{out, layout, with_pcs};
    uint64_t n = g.vertex_count();
    for (const auto& active : history) {
        for (uint64_t v = 0; v < n; ++v) {
            sink.frontier_load(v);
            if (!active[v])
                continue;
            sink.vertex_load(v);
            for (uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                uint64_t u = g.neighbors[e];
                sink.neighbor_load(e);
                sink.property_load(u); // read-modify-write accumulate
                sink.property_store(u);
            }
        }
        sink.update();
    }
    out.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    return out;
}

namespace {

uint64_t pick_source(const Graph& g) {
    for (uint64_t v = 0; v < g.vertex_count(); ++v)
        if (g.degree(v) > 0)
            return v;
    return 0;
}

// One BFS pass; visited checks read the property array, discoveries write it.
void run_bfs_pass(const Graph& g, TraceSink& sink, unsigned max_iterations, uint64_t scan_count) {
    uint64_t n = g.vertex_count();
    std::vector<uint8_t> visited(n, 0);
    std::vector<uint8_t> active(n, 0);
    uint64_t source = pick_source(g);
    visited[source] = 1;
    active[source] = 1;
    bool any = true;
    for (unsigned iter = 0; iter < max_iterations && any; ++iter) {
        std::vector<uint8_t> next(n, 0);
        any = false;
        for (uint64_t v = 0; v < scan_count; ++v) {
            sink.frontier_load(v);
            if (v >= n || !active[v])
                continue;
            sink.vertex_load(v);
            for (uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                uint64_t u = g.neighbors[e];
                sink.neighbor_load(e);
                sink.property_load(u);
                if (!visited[u]) {
                    sink.property_store(u);
                    visited[u] = 1;
                    next[u] = 1;
                    any = true;
                }
            }
        }
        sink.update();
        active = std::move(next);
    }
}

void run_bellmanford_pass(const Graph& g, TraceSink& sink, unsigned max_iterations, uint64_t scan_count) {
    uint64_t n = g.vertex_count();
    constexpr uint64_t inf = std::numeric_limits<uint64_t>::max();
    std::vector<uint64_t> dist(n, inf);
    std::vector<uint8_t> active(n, 0);
    uint64_t source = pick_source(g);
    dist[source] = 0;
    active[source] = 1;
    bool any = true;
    for (unsigned iter = 0; iter < max_iterations && any; ++iter) {
        std::vector<uint8_t> next(n, 0);
        any = false;
        for (uint64_t v = 0; v < scan_count; ++v) {
            sink.frontier_load(v);
            if (v >= n || !active[v])
                continue;
            sink.vertex_load(v);
            for (uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                uint64_t u = g.neighbors[e];
                sink.neighbor_load(e);
                sink.property_load(u);
                uint64_t cand = dist[v] + edge_weight(e);
                if (cand < dist[u]) {
                    sink.property_store(u);
                    dist[u] = cand;
                    next[u] = 1;
                    any = true;
                }
            }
        }
        sink.update();
        active = std::move(next);
    }
}

} // namespace

std::vector<TraceEvent> emit_bfs_trace(const Graph& g, const MutationSchedule& schedule,
                                       const LayoutPlan& layout, unsigned max_iterations, bool with_pcs) {
    Graph g2 = mutate(g, schedule);
    std::vector<TraceEvent> out;
    emit_prologue(out, layout);
    TraceSink sink{out, layout, with_pcs};
    uint64_t scan = std::max(g.vertex_count(), g2.vertex_count());
    run_bfs_pass(g, sink, max_iterations, scan);
    run_bfs_pass(g2, sink, max_iterations, scan);
    out.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    return out;
}

std::vector<TraceEvent> emit_cc_trace(const Graph& g, const LayoutPlan& layout, unsigned max_iterations,
                                      bool with_pcs) {
    std::vector<TraceEvent> out;
    emit_prologue(out, layout);
    TraceSink sink{out, layout, with_pcs};
    uint64_t n = g.vertex_count();
    std::vector<uint64_t> label(n);
    for (uint64_t v = 0; v < n; ++v)
        label[v] = v;
    std::vector<uint8_t> active(n, 1);
    bool any = true;
    for (unsigned iter = 0; iter < max_iterations && any; ++iter) {
        std::vector<uint8_t> next(n, 0);
        any = false;
        for (uint64_t v = 0; v < n; ++v) {
            sink.frontier_load(v);
            if (!active[v])
                continue;
            sink.vertex_load(v);
            for (uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                uint64_t u = g.neighbors[e];
                sink.neighbor_load(e);
                sink.property_load(u);
                if (label[v] < label[u]) {
                    sink.property_store(u);
                    label[u] = label[v];
                    next[u] = 1;
                    any = true;
                }
            }
        }
        sink.update();
        active = std::move(next);
    }
    out.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    return out;
}

std::vector<TraceEvent> emit_bellmanford_trace(const Graph& g, const MutationSchedule& schedule,
                                               const LayoutPlan& layout, unsigned max_iterations,
                                               bool with_pcs) {
    Graph g2 = mutate(g, schedule);
    std::vector<TraceEvent> out;
    emit_prologue(out, layout);
    TraceSink sink{out, layout, with_pcs};
    uint64_t scan = std::max(g.vertex_count(), g2.vertex_count());
    run_bellmanford_pass(g, sink, max_iterations, scan);
    run_bellmanford_pass(g2, sink, max_iterations, scan);
    out.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    return out;
}

// ---------------------------------------------------------------------------
// Worked example fixture

namespace {

// Access-list shorthand: array id, element index, miss flag.
enum class Arr : uint8_t { V, N, P };

struct Step {
    Arr arr;
    uint64_t idx;
    bool miss;
};

FixtureAccess make_access(const LayoutPlan& layout, Step s) {
    FixtureAccess a;
    switch (s.arr) {
    case Arr::V:
        a.vaddr = layout.v_addr(s.idx);
        a.pc = kPcVertexLoad;
        break;
    case Arr::N:
        a.vaddr = layout.n_addr(s.idx);
        a.pc = kPcNeighborLoad;
        break;
    case Arr::P:
        a.vaddr = layout.p_addr(s.idx);
        a.pc = kPcPropertyAccess;
        break;
    }
    a.l2_miss = s.miss;
    return a;
}

} // namespace

BlockAddress WorkedExample::v_block(uint64_t i) const { return block_of(v_addr(i)); }
BlockAddress WorkedExample::n_block(uint64_t i) const { return block_of(n_addr(i)); }
BlockAddress WorkedExample::p_block(uint64_t i) const { return block_of(p_addr(i)); }

WorkedExample worked_example_fixture() {
    WorkedExample fx;

    // 8 vertices, ids 1..7 in use; adjacency reconstructed from the listing.
    fx.graph.offsets = {0};
    std::vector<std::vector<uint64_t>> adj = {
        {}, {2, 3}, {1, 3}, {4, 5, 6}, {3}, {}, {3}, {5},
    };
    for (auto& nbrs : adj) {
        for (uint64_t u : nbrs)
            fx.graph.neighbors.push_back(u);
        fx.graph.offsets.push_back(fx.graph.neighbors.size());
    }

    // Four consecutive pages, one cache line per element.
    fx.layout.vertex = {VirtualAddress{0x10000}, 8, 64};
    fx.layout.neighbor = {VirtualAddress{0x11000}, 8, 64};
    fx.layout.property = {VirtualAddress{0x12000}, 8, 64};
    fx.layout.frontier = {VirtualAddress{0x13000}, 8, 64};
    fx.layout.validate();

    fx.scan_order = {1, 2, 3, 4, 5, 6, 7};
    fx.active1 = {1, 2, 3, 4, 5, 6, 7};
    fx.active2 = {1, 4, 6, 7};

    const Step it1[] = {
        {Arr::V, 1, false}, {Arr::N, 2, true},  {Arr::P, 2, true},  {Arr::N, 3, false}, {Arr::P, 3, true},
        {Arr::V, 2, false}, {Arr::N, 1, false}, {Arr::P, 1, true},  {Arr::N, 3, false}, {Arr::P, 3, true},
        {Arr::V, 3, false}, {Arr::N, 4, true},  {Arr::P, 4, true},  {Arr::N, 5, true},  {Arr::P, 5, true},
        {Arr::N, 6, true},  {Arr::P, 6, true},
        {Arr::V, 4, false}, {Arr::N, 3, false}, {Arr::P, 3, true},
        // Tail past the listing ellipsis: the minimal accesses implied by
        // the recorded rows (V5 window empty, V6 -> N3 miss, V7 -> N5 miss).
        {Arr::V, 5, false},
        {Arr::V, 6, false}, {Arr::N, 3, true},
        {Arr::V, 7, false}, {Arr::N, 5, true},
    };
    const Step it2[] = {
        {Arr::V, 1, false}, {Arr::N, 2, true}, {Arr::P, 2, true}, {Arr::N, 3, true}, {Arr::P, 3, true},
        {Arr::V, 4, false}, {Arr::N, 3, true}, {Arr::P, 3, true},
        {Arr::V, 6, false}, {Arr::N, 3, true}, {Arr::P, 3, true},
        {Arr::V, 7, false}, {Arr::N, 5, true}, {Arr::P, 5, true},
    };
    for (Step s : it1)
        fx.iteration1.push_back(make_access(fx.layout, s));
    for (Step s : it2)
        fx.iteration2.push_back(make_access(fx.layout, s));

    auto delta_of = [&](uint64_t v) { return fx.layout.v_addr(v) - fx.layout.vertex.base.value; };
    auto nb = [&](uint64_t i) { return fx.n_block(i); };
    auto pb = [&](uint64_t i) { return fx.p_block(i); };

    fx.expected_entries = {
        {{delta_of(1)}, {nb(2), pb(2), pb(3)}},
        {{delta_of(1), delta_of(2)}, {pb(1), pb(3)}},
        {{delta_of(2), delta_of(3)}, {nb(4), pb(4), nb(5), pb(5), nb(6), pb(6)}},
        {{delta_of(3), delta_of(4)}, {pb(3)}},
        {{delta_of(5), delta_of(6)}, {nb(3)}},
        {{delta_of(6), delta_of(7)}, {nb(5)}},
    };
    fx.table_entries = fx.expected_entries;
    fx.table_entries[2].misses = {nb(4), pb(4), pb(5), nb(6)};

    // Golden PC-localized streams; independent of the listing above by design.
    auto va = [&](uint64_t i) { return fx.v_addr(i); };
    auto na = [&](uint64_t i) { return fx.n_addr(i); };
    auto pa = [&](uint64_t i) { return fx.p_addr(i); };
    fx.pc_streams = {
        {va(1), va(2), va(3), va(3), va(4), va(5), va(6), va(7)},
        {na(1), na(2), na(4), na(5), na(6), na(3), na(7), na(5)},
        {pa(1), pa(2), pa(4), pa(5), pa(6), pa(3), pa(7), pa(5)},
    };
    return fx;
}

std::vector<TraceEvent> WorkedExample::trace_iteration1() const {
    std::vector<TraceEvent> out;
    emit_prologue(out, layout);
    for (const auto& a : iteration1)
        out.push_back(TraceEvent::access_pc(a.vaddr, a.pc, a.is_store));
    out.push_back(TraceEvent::directive(TraceEvent::Kind::update));
    out.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    return out;
}

std::vector<TraceEvent> WorkedExample::full_trace() const {
    std::vector<TraceEvent> out;
    emit_prologue(out, layout);
    for (const auto& a : iteration1)
        out.push_back(TraceEvent::access_pc(a.vaddr, a.pc, a.is_store));
    out.push_back(TraceEvent::directive(TraceEvent::Kind::update));
    for (const auto& a : iteration2)
        out.push_back(TraceEvent::access_pc(a.vaddr, a.pc, a.is_store));
    out.push_back(TraceEvent::directive(TraceEvent::Kind::update));
    out.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    return out;
}

} // namespace amcsim
