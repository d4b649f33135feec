#pragma once

#include "amcsim/address.hpp"

#include <cstdint>
#include <deque>
#include <vector>

namespace amcsim {

struct CacheConfig {
    uint64_t capacity_bytes = 0;
    unsigned associativity = 8;
    unsigned hit_latency = 4;

    uint64_t set_count() const { return capacity_bytes / (uint64_t{64} * associativity); }
    void validate() const;
};

inline CacheConfig l1_default() { return {64 * 1024, 8, 4}; }
inline CacheConfig l2_default() { return {256 * 1024, 8, 12}; }

struct AccessOutcome {
    enum class Level : uint8_t { l1, l2, memory };
    Level level_hit = Level::l1;
    unsigned latency_cycles = 0;
    bool has_l2_miss = false; // true iff level_hit == memory
    BlockAddress l2_miss_block{};
    bool was_prefetched_hit = false; // consumed a prefetched line
    bool was_late_prefetch_hit = false;
};

struct PrefetchOutcomes {
    uint64_t consumed_timely = 0;
    uint64_t consumed_late = 0;
    uint64_t evicted_unused = 0;
    uint64_t never_used = 0;

    uint64_t total() const { return consumed_timely + consumed_late + evicted_unused + never_used; }
};

// Two-level non-inclusive set-associative hierarchy with a flat memory
// backend and a scalar clock: each demand access charges its full path
// latency. Prefetches fill L2 only, after memory_latency cycles, through a
// bounded in-flight queue (the MSHR stand-in).
class Hierarchy {
public:
    Hierarchy(CacheConfig l1, CacheConfig l2, unsigned memory_latency = 200, unsigned mshr_entries = 16);

    AccessOutcome demand_access(BlockAddress block, bool is_store = false);

    // Accepted prefetches fill at clock + memory_latency. Rejected when the
    // block is already in L2 or in flight, or when the queue is full.
    bool issue_prefetch(BlockAddress block);

    // Drains outstanding prefetches and classifies every filled one.
    PrefetchOutcomes finalize();

    uint64_t clock() const { return clock_; }
    uint64_t total_latency() const { return total_latency_; }
    uint64_t demand_accesses() const { return demand_accesses_; }
    uint64_t demand_l2_misses() const { return demand_l2_misses_; }
    uint64_t prefetches_accepted() const { return accepted_; }
    uint64_t prefetches_dropped() const { return dropped_overflow_; }
    uint64_t prefetches_rejected_duplicate() const { return rejected_duplicate_; }
    const PrefetchOutcomes& outcomes() const { return outcomes_; }

private:
    struct Line {
        uint64_t tag = 0;
        bool valid = false;
        bool prefetched = false;
        uint64_t last_touch = 0;
    };
    struct LevelState {
        CacheConfig cfg;
        std::vector<Line> lines; // set-major
        Line* find(uint64_t block);
        Line& victim(uint64_t block); // LRU within the set
    };
    struct InFlight {
        BlockAddress block;
        uint64_t issue_cycle;
        uint64_t ready_cycle;
    };

    void drain_ready();
    void fill_l1(uint64_t block);
    void fill_l2(uint64_t block, bool prefetched);

    LevelState l1_, l2_;
    unsigned memory_latency_;
    unsigned mshr_entries_;
    uint64_t clock_ = 0;
    uint64_t lru_tick_ = 0;
    uint64_t total_latency_ = 0;
    uint64_t demand_accesses_ = 0;
    uint64_t demand_l2_misses_ = 0;
    uint64_t accepted_ = 0;
    uint64_t dropped_overflow_ = 0;
    uint64_t rejected_duplicate_ = 0;
    std::deque<InFlight> inflight_;
    PrefetchOutcomes outcomes_;
};

} // namespace amcsim
