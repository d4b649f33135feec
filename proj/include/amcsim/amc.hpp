#pragma once

#include "amcsim/compress.hpp"
#include "amcsim/prefetcher.hpp"
#include "amcsim/workload.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace amcsim {

struct AmcConfig {
    unsigned miss_cap = kMaxMissesPerEntry; // 0 = unbounded recording (miss-size sweeps)
    size_t cache_tag_capacity = 100;        // AMC cache CAM entries
    size_t cache_payload_capacity = 24 * 1024;
    size_t identifier_window = 100; // index identifier refill batch
    size_t frontier_capacity = 100;
    bool consume_on_hit = false;        // drop a cache entry once it has replayed
    bool collect_iteration_sets = false; // per-iteration candidate/miss sets, for analysis
};

// Off-chip index record: trigger deltas plus the location and shape of the
// compressed miss payload. Accounted at a fixed 16 bytes for storage metrics.
struct IndexEntry {
    uint64_t trigger[2] = {0, 0};
    uint8_t trigger_count = 0;
    DeltaMode mode = DeltaMode::d1;
    uint8_t miss_count = 0;
    uint64_t miss_offset = 0;
    uint32_t payload_bytes = 0;

    uint64_t latest_trigger() const { return trigger_count ? trigger[trigger_count - 1] : 0; }
    bool trigger_contains(uint64_t delta) const {
        for (uint8_t i = 0; i < trigger_count; ++i)
            if (trigger[i] == delta)
                return true;
        return false;
    }
};

inline constexpr size_t kIndexEntryBytes = 16;

// Aligns a frontier-array byte offset with the target array's element
// geometry: target_delta * frontier_element_size == frontier_delta *
// target_element_size, exactly, whenever one element size divides the other.
inline uint64_t frontier_to_target_delta(uint64_t frontier_delta, uint32_t target_element_size,
                                         uint32_t frontier_element_size) {
    if (target_element_size >= frontier_element_size)
        return frontier_delta * (target_element_size / frontier_element_size);
    return frontier_delta / (frontier_element_size / target_element_size);
}

struct MetadataBuffer {
    std::vector<uint8_t> miss_region;
    std::vector<IndexEntry> index;

    size_t bytes() const { return miss_region.size() + index.size() * kIndexEntryBytes; }
    void clear() {
        miss_region.clear();
        index.clear();
    }
};

struct AmcStats {
    uint64_t entries_recorded = 0;
    uint64_t metadata_bytes_written = 0;
    uint64_t metadata_bytes_read = 0;
    size_t peak_metadata_bytes = 0;
    uint64_t candidates_emitted = 0;
    uint64_t cache_hits = 0;
    uint64_t cache_evictions = 0;
    uint64_t identifier_hits = 0;
    uint64_t identifier_refills = 0;
    std::array<uint64_t, 4> mode_histogram{}; // by DeltaMode
    std::map<unsigned, uint64_t> miss_count_histogram;
    std::vector<std::set<uint64_t>> iteration_candidates;       // when collected
    std::vector<std::set<uint64_t>> iteration_nontarget_misses; // when collected
};

// The access-to-miss correlation prefetcher. Records windows of non-target
// L2 misses keyed by the one or two most recent target accesses, stores them
// compressed in double-buffered off-chip metadata, and replays them through
// a FIFO on-chip cache staged by frontier progress.
class AmcPrefetcher final : public Prefetcher {
public:
    explicit AmcPrefetcher(AmcConfig cfg = {});

    // Runtime interface; the trace directives map onto these.
    void init(uint64_t asid = 0);
    void set_target_region(const RegionDescriptor& r);
    void set_frontier_region(const RegionDescriptor& r);
    void update();
    AmcStats end();
    void reset(); // context-switch path: drop metadata, restart recording

    std::vector<BlockAddress> on_access(const PrefetchAccess& a) override;
    std::vector<BlockAddress> on_l2_miss(BlockAddress block, bool is_target) override;
    void on_directive(const TraceEvent& e) override;
    std::string name() const override { return "amc"; }

    bool prefetch_enabled() const { return prefetch_enabled_; }
    uint64_t target_access_count() const { return access_count_; }
    const AmcStats& stats() const { return stats_; }

    const MetadataBuffer& recording_buffer() const { return buffers_[recording_]; }
    const MetadataBuffer& prefetching_buffer() const { return buffers_[recording_ ^ 1]; }
    size_t amc_cache_payload_bytes() const { return cache_payload_bytes_; }
    size_t amc_cache_entries() const { return cache_.size(); }

    // External inspection dump: index as JSON lines, misses as raw bytes with
    // an offsets sidecar.
    void dump_metadata(const std::string& dir) const;

private:
    struct Recorder {
        uint64_t deltas[2] = {0, 0};
        uint8_t live = 0;
        void push(uint64_t d) {
            if (live < 2) {
                deltas[live++] = d;
            } else {
                deltas[0] = deltas[1];
                deltas[1] = d;
            }
        }
        void clear() { live = 0; }
    };
    struct OpenEntry {
        uint64_t window_count = 0;
        uint64_t trigger[2] = {0, 0};
        uint8_t trigger_count = 0;
        std::vector<BlockAddress> misses;
    };
    struct CacheEntry {
        IndexEntry meta;
        std::vector<uint8_t> payload;
        bool written_back = false; // hit entries flow back to recording once
    };

    void finalize_open();
    void append_entry(const IndexEntry& meta, const std::vector<uint8_t>& payload);
    void stage(const IndexEntry& meta);
    void probe_identifier(uint64_t target_delta);
    void note_peak();
    std::set<uint64_t>& iteration_set(std::vector<std::set<uint64_t>>& v);

    AmcConfig cfg_;
    bool initialized_ = false;
    uint64_t asid_ = 0;
    bool has_target_ = false, has_frontier_ = false;
    RegionDescriptor target_region_{}, frontier_region_{};

    Recorder recorder_;
    uint64_t access_count_ = 0;
    Recorder frontier_buffer_;
    bool prefetch_enabled_ = false;
    unsigned iteration_ = 0;

    std::optional<OpenEntry> open_;
    MetadataBuffer buffers_[2];
    int recording_ = 0;

    std::deque<CacheEntry> cache_; // FIFO, front = oldest
    size_t cache_payload_bytes_ = 0;

    size_t ident_pos_ = 0;    // first live window entry
    size_t ident_limit_ = 0;  // one past last loaded entry
    size_t ident_cursor_ = 0; // next index entry to load on refill
    uint64_t ident_max_latest_ = 0; // largest trigger delta the window covers

    AmcStats stats_;
};

// Flag-driven replay of the worked example: records iteration 1 from the
// golden miss flags, then replays iteration 2 with synthesized frontier
// checks. An outstanding prefetch covers the next demand of its block; every
// non-frontier access counts as a baseline miss (thrashing baseline).
struct FixtureReplayResult {
    uint64_t issued = 0;
    uint64_t useful = 0;
    uint64_t baseline_misses = 0;
    std::vector<uint64_t> issue_order; // blocks, for cross-checking

    double accuracy() const { return issued ? static_cast<double>(useful) / static_cast<double>(issued) : 0.0; }
    double coverage() const {
        return baseline_misses ? static_cast<double>(useful) / static_cast<double>(baseline_misses) : 0.0;
    }
};

FixtureReplayResult replay_worked_example(const WorkedExample& fx, const AmcConfig& cfg = {});

// Decodes every entry of a metadata buffer back to trigger + miss list.
std::vector<CorrelationEntry> decode_metadata(const MetadataBuffer& buffer);

} // namespace amcsim
