#include "amcsim/amc.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace amcsim {

namespace {

// Reassembles a codec entry from index metadata plus its payload slice; the
// stored base heads the payload for delta modes.
CompressedEntry make_compressed(const IndexEntry& meta, const std::vector<uint8_t>& payload) {
    CompressedEntry ce;
    ce.mode = meta.mode;
    ce.count = meta.miss_count;
    ce.payload = payload;
    if (ce.mode != DeltaMode::raw) {
        uint64_t base = 0;
        for (unsigned bit = 0; bit < kBlockBits; ++bit)
            if ((ce.payload[bit / 8] >> (bit % 8)) & 1)
                base |= uint64_t{1} << bit;
        ce.base = BlockAddress{base};
    }
    return ce;
}

} // namespace

AmcPrefetcher::AmcPrefetcher(AmcConfig cfg) : cfg_(cfg) {}

void AmcPrefetcher::init(uint64_t asid) {
    reset();
    asid_ = asid;
    initialized_ = true;
}

void AmcPrefetcher::set_target_region(const RegionDescriptor& r) {
    r.validate();
    target_region_ = r;
    has_target_ = true;
}

void AmcPrefetcher::set_frontier_region(const RegionDescriptor& r) {
    r.validate();
    frontier_region_ = r;
    has_frontier_ = true;
}

void AmcPrefetcher::reset() {
    recorder_.clear();
    frontier_buffer_.clear();
    access_count_ = 0;
    prefetch_enabled_ = false;
    open_.reset();
    buffers_[0].clear();
    buffers_[1].clear();
    recording_ = 0;
    cache_.clear();
    cache_payload_bytes_ = 0;
    ident_pos_ = ident_limit_ = ident_cursor_ = 0;
    ident_max_latest_ = 0;
    iteration_ = 0;
}

std::set<uint64_t>& AmcPrefetcher::iteration_set(std::vector<std::set<uint64_t>>& v) {
    while (v.size() <= iteration_)
        v.emplace_back();
    return v[iteration_];
}

void AmcPrefetcher::note_peak() {
    size_t total = buffers_[0].bytes() + buffers_[1].bytes();
    stats_.peak_metadata_bytes = std::max(stats_.peak_metadata_bytes, total);
}

void AmcPrefetcher::finalize_open() {
    if (!open_)
        return;
    // histogram over the finalized window; unbounded recording (miss_cap 0)
    // still stores the payload in format-sized chunks
    ++stats_.miss_count_histogram[static_cast<unsigned>(open_->misses.size())];
    for (size_t begin = 0; begin < open_->misses.size(); begin += kMaxMissesPerEntry) {
        size_t end = std::min(open_->misses.size(), begin + kMaxMissesPerEntry);
        std::vector<BlockAddress> chunk(open_->misses.begin() + static_cast<long>(begin),
                                        open_->misses.begin() + static_cast<long>(end));
        CompressedEntry compressed = compress(chunk);
        IndexEntry meta;
        meta.trigger[0] = open_->trigger[0];
        meta.trigger[1] = open_->trigger[1];
        meta.trigger_count = open_->trigger_count;
        meta.mode = compressed.mode;
        meta.miss_count = compressed.count;
        meta.payload_bytes = static_cast<uint32_t>(compressed.payload.size());
        append_entry(meta, compressed.payload);
        ++stats_.entries_recorded;
        ++stats_.mode_histogram[static_cast<size_t>(compressed.mode)];
    }
    open_.reset();
}

void AmcPrefetcher::append_entry(const IndexEntry& meta, const std::vector<uint8_t>& payload) {
    MetadataBuffer& rec = buffers_[recording_];
    IndexEntry stored = meta;
    stored.miss_offset = rec.miss_region.size();
    rec.miss_region.insert(rec.miss_region.end(), payload.begin(), payload.end());
    rec.index.push_back(stored);
    stats_.metadata_bytes_written += payload.size() + kIndexEntryBytes;
    note_peak();
}

std::vector<BlockAddress> AmcPrefetcher::on_l2_miss(BlockAddress block, bool is_target) {
    // misses before the iteration's first target access carry no trigger
    // context and could never replay; they are not recorded
    if (!initialized_ || is_target || access_count_ == 0)
        return {};
    if (cfg_.collect_iteration_sets)
        iteration_set(stats_.iteration_nontarget_misses).insert(block.value);
    bool cap_hit = cfg_.miss_cap != 0 && open_ && open_->misses.size() >= cfg_.miss_cap;
    if (open_ && (open_->window_count != access_count_ || cap_hit))
        finalize_open();
    if (!open_) {
        OpenEntry e;
        e.window_count = access_count_;
        e.trigger_count = recorder_.live;
        e.trigger[0] = recorder_.deltas[0];
        e.trigger[1] = recorder_.deltas[1];
        open_ = std::move(e);
    }
    open_->misses.push_back(block);
    return {};
}

void AmcPrefetcher::stage(const IndexEntry& meta) {
    const MetadataBuffer& pref = prefetching_buffer();
    CacheEntry entry;
    entry.meta = meta;
    entry.payload.assign(pref.miss_region.begin() + static_cast<long>(meta.miss_offset),
                         pref.miss_region.begin() + static_cast<long>(meta.miss_offset + meta.payload_bytes));
    stats_.metadata_bytes_read += meta.payload_bytes;

    // FIFO replacement, no write-back: evict until both the tag and the
    // compressed miss RAM have room.
    while (!cache_.empty() &&
           (cache_.size() >= cfg_.cache_tag_capacity ||
            cache_payload_bytes_ + entry.payload.size() > cfg_.cache_payload_capacity)) {
        cache_payload_bytes_ -= cache_.front().payload.size();
        cache_.pop_front();
        ++stats_.cache_evictions;
    }
    cache_payload_bytes_ += entry.payload.size();
    cache_.push_back(std::move(entry));
}

void AmcPrefetcher::probe_identifier(uint64_t target_delta) {
    const auto& index = prefetching_buffer().index;
    for (;;) {
        if (ident_pos_ == ident_limit_ && ident_cursor_ >= index.size())
            return; // window empty, nothing left to load
        if (ident_pos_ == ident_limit_) {
            ident_limit_ = std::min(index.size(), ident_cursor_ + cfg_.identifier_window);
            stats_.metadata_bytes_read += (ident_limit_ - ident_cursor_) * kIndexEntryBytes;
            ++stats_.identifier_refills;
            ident_cursor_ = ident_limit_;
            ident_max_latest_ = 0;
            for (size_t i = ident_pos_; i < ident_limit_; ++i)
                ident_max_latest_ = std::max(ident_max_latest_, index[i].latest_trigger());
        }
        for (size_t i = ident_pos_; i < ident_limit_; ++i) {
            if (index[i].latest_trigger() == target_delta) {
                // Stage the hit and any split siblings sharing the trigger;
                // everything at or before the hit leaves the window.
                size_t j = i;
                while (j < ident_limit_ && index[j].latest_trigger() == target_delta) {
                    stage(index[j]);
                    ++stats_.identifier_hits;
                    ++j;
                }
                ident_pos_ = j;
                return;
            }
        }
        // Miss. Advance to the next batch only when the wanted delta lies
        // past everything the window covers.
        if (ident_limit_ > ident_pos_ && target_delta <= ident_max_latest_)
            return;
        ident_pos_ = ident_limit_;
        if (ident_cursor_ >= index.size())
            return;
    }
}

std::vector<BlockAddress> AmcPrefetcher::on_access(const PrefetchAccess& a) {
    if (!initialized_)
        return {};
    switch (a.region) {
    case Region::other:
        return {};
    case Region::frontier: {
        if (!has_frontier_)
            throw std::logic_error("frontier access before addr_fbase");
        uint64_t fdelta = a.vaddr.value - frontier_region_.base.value;
        frontier_buffer_.push(fdelta);
        if (prefetch_enabled_)
            probe_identifier(frontier_to_target_delta(fdelta, target_region_.element_size,
                                                      frontier_region_.element_size));
        return {};
    }
    case Region::target:
        break;
    }

    if (!has_target_)
        throw std::logic_error("target access before addr_tbase");
    uint64_t delta = a.vaddr.value - target_region_.base.value;
    recorder_.push(delta);
    ++access_count_;
    // the previous window closes when the next target access arrives; this
    // keeps recording order aligned with the frontier scan
    if (open_ && open_->window_count != access_count_)
        finalize_open();
    if (!prefetch_enabled_)
        return {};

    // CAM lookup over every stored trigger delta, probed with both live
    // recorder deltas. Exact pair matches replay first, then FIFO order.
    std::vector<CacheEntry*> matches;
    std::vector<CacheEntry*> partial;
    for (auto& entry : cache_) {
        bool hit = false;
        for (uint8_t k = 0; k < recorder_.live && !hit; ++k)
            hit = entry.meta.trigger_contains(recorder_.deltas[k]);
        if (!hit)
            continue;
        bool exact = entry.meta.trigger_count == recorder_.live &&
                     std::equal(entry.meta.trigger, entry.meta.trigger + entry.meta.trigger_count,
                                recorder_.deltas);
        (exact ? matches : partial).push_back(&entry);
    }
    matches.insert(matches.end(), partial.begin(), partial.end());
    if (matches.empty())
        return {};

    std::vector<BlockAddress> candidates;
    for (CacheEntry* m : matches) {
        ++stats_.cache_hits;
        auto blocks = decompress(make_compressed(m->meta, m->payload));
        candidates.insert(candidates.end(), blocks.begin(), blocks.end());
        // Hit entries flow back to the recording-phase storage, once per
        // staging, so the next iteration can replay them again.
        if (!m->written_back) {
            append_entry(m->meta, m->payload);
            m->written_back = true;
        }
    }
    if (cfg_.consume_on_hit) {
        std::unordered_set<const CacheEntry*> dead(matches.begin(), matches.end());
        size_t removed_bytes = 0;
        std::deque<CacheEntry> kept;
        for (auto& e : cache_) {
            if (dead.count(&e))
                removed_bytes += e.payload.size();
            else
                kept.push_back(std::move(e));
        }
        cache_ = std::move(kept);
        cache_payload_bytes_ -= removed_bytes;
    }

    candidates = dedupe_candidates(std::move(candidates));
    stats_.candidates_emitted += candidates.size();
    if (cfg_.collect_iteration_sets) {
        auto& set = iteration_set(stats_.iteration_candidates);
        for (auto b : candidates)
            set.insert(b.value);
    }
    return candidates;
}

void AmcPrefetcher::update() {
    if (!initialized_)
        return;
    finalize_open();
    recording_ ^= 1;
    buffers_[recording_].clear();
    note_peak();
    prefetch_enabled_ = true;
    access_count_ = 0;
    recorder_.clear();
    frontier_buffer_.clear();
    cache_.clear();
    cache_payload_bytes_ = 0;
    ident_pos_ = ident_limit_ = ident_cursor_ = 0;
    ident_max_latest_ = 0;
    ++iteration_;
}

AmcStats AmcPrefetcher::end() {
    finalize_open();
    AmcStats out = stats_;
    buffers_[0].clear();
    buffers_[1].clear();
    cache_.clear();
    cache_payload_bytes_ = 0;
    initialized_ = false;
    return out;
}

void AmcPrefetcher::on_directive(const TraceEvent& e) {
    switch (e.kind) {
    case TraceEvent::Kind::init:
        init();
        break;
    case TraceEvent::Kind::addr_tbase:
        set_target_region(e.region);
        break;
    case TraceEvent::Kind::addr_fbase:
        set_frontier_region(e.region);
        break;
    case TraceEvent::Kind::update:
        update();
        break;
    case TraceEvent::Kind::end:
        end();
        break;
    default:
        break;
    }
}

std::vector<CorrelationEntry> decode_metadata(const MetadataBuffer& buffer) {
    std::vector<CorrelationEntry> out;
    for (const auto& meta : buffer.index) {
        CorrelationEntry e;
        e.trigger[0] = meta.trigger[0];
        e.trigger[1] = meta.trigger[1];
        e.trigger_count = meta.trigger_count;
        std::vector<uint8_t> payload(buffer.miss_region.begin() + static_cast<long>(meta.miss_offset),
                                     buffer.miss_region.begin() +
                                         static_cast<long>(meta.miss_offset + meta.payload_bytes));
        e.misses = decompress(make_compressed(meta, payload));
        out.push_back(std::move(e));
    }
    return out;
}

void AmcPrefetcher::dump_metadata(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const char* names[2] = {"recording", "prefetching"};
    const MetadataBuffer* bufs[2] = {&recording_buffer(), &prefetching_buffer()};
    for (int b = 0; b < 2; ++b) {
        std::ofstream idx(fs::path(dir) / (std::string(names[b]) + "_index.jsonl"));
        std::ofstream offsets(fs::path(dir) / (std::string(names[b]) + "_offsets.json"));
        std::ofstream raw(fs::path(dir) / (std::string(names[b]) + "_misses.bin"), std::ios::binary);
        nlohmann::json offs = nlohmann::json::array();
        for (const auto& meta : bufs[b]->index) {
            nlohmann::json j;
            j["trigger_deltas"] = std::vector<uint64_t>(meta.trigger, meta.trigger + meta.trigger_count);
            j["mode"] = static_cast<int>(meta.mode);
            j["miss_count"] = meta.miss_count;
            j["miss_offset"] = meta.miss_offset;
            j["payload_bytes"] = meta.payload_bytes;
            idx << j.dump() << '\n';
            offs.push_back(meta.miss_offset);
        }
        offsets << offs.dump() << '\n';
        raw.write(reinterpret_cast<const char*>(bufs[b]->miss_region.data()),
                  static_cast<std::streamsize>(bufs[b]->miss_region.size()));
    }
}

// ---------------------------------------------------------------------------

namespace {

struct Segment {
    uint64_t vertex;
    const FixtureAccess* target;
    std::vector<const FixtureAccess*> body;
};

std::vector<Segment> split_segments(const WorkedExample& fx, const std::vector<FixtureAccess>& accesses,
                                    const std::vector<uint64_t>& actives) {
    std::vector<Segment> segs;
    size_t next_active = 0;
    for (const auto& a : accesses) {
        if (fx.layout.vertex.contains(VirtualAddress{a.vaddr})) {
            Segment s;
            s.vertex = actives.at(next_active++);
            s.target = &a;
            segs.push_back(std::move(s));
        } else {
            segs.back().body.push_back(&a);
        }
    }
    return segs;
}

} // namespace

FixtureReplayResult replay_worked_example(const WorkedExample& fx, const AmcConfig& cfg) {
    AmcPrefetcher amc(cfg);
    RegionMap map = fx.layout.region_map();
    amc.init();
    amc.set_target_region(fx.layout.vertex);
    amc.set_frontier_region(fx.layout.frontier);

    FixtureReplayResult result;
    std::unordered_set<uint64_t> outstanding;

    auto feed_access = [&](const FixtureAccess& acc, bool scoring) {
        PrefetchAccess pa;
        pa.vaddr = VirtualAddress{acc.vaddr};
        pa.block = block_of(acc.vaddr);
        pa.pc = acc.pc;
        pa.has_pc = true;
        pa.is_store = acc.is_store;
        pa.region = classify(map, pa.vaddr);
        bool covered = false;
        if (scoring) {
            ++result.baseline_misses; // thrashing baseline: every non-frontier access misses
            covered = outstanding.erase(pa.block.value) > 0;
            if (covered)
                ++result.useful;
        }
        for (auto c : amc.on_access(pa)) {
            if (outstanding.insert(c.value).second) {
                ++result.issued;
                result.issue_order.push_back(c.value);
            }
        }
        if (acc.l2_miss && !covered)
            amc.on_l2_miss(pa.block, pa.region == Region::target);
    };

    auto run_iteration = [&](const std::vector<FixtureAccess>& accesses, const std::vector<uint64_t>& actives,
                             bool scoring) {
        auto segs = split_segments(fx, accesses, actives);
        size_t seg_i = 0;
        for (uint64_t v : fx.scan_order) {
            FixtureAccess f;
            f.vaddr = fx.f_addr(v);
            f.pc = kPcFrontierLoad;
            f.l2_miss = false;
            feed_access(f, false); // frontier checks are outside the scored listing
            if (seg_i < segs.size() && segs[seg_i].vertex == v) {
                feed_access(*segs[seg_i].target, scoring);
                for (const auto* body : segs[seg_i].body)
                    feed_access(*body, scoring);
                ++seg_i;
            }
        }
        amc.update();
    };

    run_iteration(fx.iteration1, fx.active1, false);
    run_iteration(fx.iteration2, fx.active2, true);
    amc.end();
    return result;
}

} // namespace amcsim
