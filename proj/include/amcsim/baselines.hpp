#pragma once

#include "amcsim/prefetcher.hpp"
#include "amcsim/workload.hpp"

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

namespace amcsim {

// Stateless next-line at L2: every block that reaches the L2 lookup (miss or
// prefetched hit) prefetches its successor, so a stream keeps chaining once
// covered. No wrap at the top of the 46-bit block space.
class NextLinePrefetcher final : public Prefetcher {
public:
    std::vector<BlockAddress> on_access(const PrefetchAccess& a) override;
    std::vector<BlockAddress> on_l2_miss(BlockAddress block, bool is_target) override;
    std::string name() const override { return "next_line"; }
};

// One-to-one address correlation over the L1 access stream: each block keys
// its single most recent successor. Bounded table, LRU eviction.
class MarkovPrefetcher final : public Prefetcher {
public:
    explicit MarkovPrefetcher(size_t capacity = 4096);

    std::vector<BlockAddress> on_access(const PrefetchAccess& a) override;
    std::vector<BlockAddress> train_and_predict(BlockAddress block);
    std::string name() const override { return "markov"; }
    size_t size() const { return table_.size(); }

private:
    struct Entry {
        BlockAddress successor{};
        bool has_successor = false;
        std::list<uint64_t>::iterator lru_it;
    };
    void touch(uint64_t key);

    size_t capacity_;
    std::unordered_map<uint64_t, Entry> table_;
    std::list<uint64_t> lru_; // front = most recent
    BlockAddress prev_{};
    bool has_prev_ = false;
};

// Classic per-PC stride detection: two confirmations before issuing, then
// degree strided candidates ahead of the access.
class IpStridePrefetcher final : public Prefetcher {
public:
    explicit IpStridePrefetcher(unsigned degree = 4, size_t capacity = 4096);

    std::vector<BlockAddress> on_access(const PrefetchAccess& a) override;
    std::string name() const override { return "ip_stride"; }

private:
    struct Entry {
        uint64_t last_block = 0;
        int64_t stride = 0;
        unsigned confirmations = 0;
        uint64_t tick = 0;
    };
    unsigned degree_;
    size_t capacity_;
    uint64_t tick_ = 0;
    std::unordered_map<uint64_t, Entry> table_;
};

// PC-localized temporal streams, swapped at iteration boundaries: training
// appends to the current iteration's per-PC stream, prediction replays the
// next `degree` blocks after the queried block in the prior iteration's
// stream.
class PcTemporalLitePrefetcher final : public Prefetcher {
public:
    explicit PcTemporalLitePrefetcher(unsigned degree = 1, size_t capacity_per_pc = 1 << 16);

    std::vector<BlockAddress> on_access(const PrefetchAccess& a) override;
    std::vector<BlockAddress> train_and_predict(uint64_t pc, BlockAddress block);
    void on_directive(const TraceEvent& e) override;
    std::string name() const override { return "pc_temporal_lite"; }

    // Prior-iteration stream for a PC (training order), for fixture checks.
    std::vector<BlockAddress> prior_stream(uint64_t pc) const;

private:
    unsigned degree_;
    size_t capacity_per_pc_;
    std::unordered_map<uint64_t, std::vector<BlockAddress>> current_, prior_;
};

// Fixture contrast: trains the PC-localized baseline on the golden
// per-PC streams, then replays iteration 2 under the flag-driven model.
struct BaselineFixtureScore {
    uint64_t issued = 0;
    uint64_t useful = 0;
    uint64_t baseline_misses = 0;

    double accuracy() const { return issued ? static_cast<double>(useful) / static_cast<double>(issued) : 0.0; }
    double coverage() const {
        return baseline_misses ? static_cast<double>(useful) / static_cast<double>(baseline_misses) : 0.0;
    }
};

BaselineFixtureScore score_pc_temporal_on_fixture(const WorkedExample& fx, unsigned degree);

} // namespace amcsim
