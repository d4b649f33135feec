#include "amcsim/trace.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace amcsim {

namespace {

constexpr uint8_t kPcFlag = 0x80;

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t get_u64(const std::vector<uint8_t>& in, size_t& pos) {
    if (pos + 8 > in.size())
        throw TraceDecodeError(pos, "truncated u64 field");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(in[pos + i]) << (8 * i);
    pos += 8;
    return v;
}

uint64_t parse_hex(const nlohmann::json& j, const char* field, size_t line_no) {
    if (!j.contains(field))
        throw TraceDecodeError(line_no, std::string("missing field '") + field + "'");
    const auto& v = j.at(field);
    if (v.is_number_unsigned())
        return v.get<uint64_t>();
    if (v.is_string())
        return std::stoull(v.get<std::string>(), nullptr, 16);
    throw TraceDecodeError(line_no, std::string("field '") + field + "' must be hex string or integer");
}

std::string hex(uint64_t v) {
    std::ostringstream os;
    os << "0x" << std::hex << v;
    return os.str();
}

} // namespace

std::vector<uint8_t> trace_encode(const std::vector<TraceEvent>& events) {
    std::vector<uint8_t> out;
    out.reserve(16 + events.size() * 9);
    put_u64(out, events.size());
    for (const auto& e : events) {
        uint8_t tag = static_cast<uint8_t>(e.kind);
        if (e.is_access() && e.has_pc)
            tag |= kPcFlag;
        out.push_back(tag);
        switch (e.kind) {
        case TraceEvent::Kind::load:
        case TraceEvent::Kind::store:
            put_u64(out, e.vaddr);
            if (e.has_pc)
                put_u64(out, e.pc);
            break;
        case TraceEvent::Kind::addr_tbase:
        case TraceEvent::Kind::addr_fbase:
            put_u64(out, e.region.base.value);
            put_u64(out, e.region.element_count);
            out.push_back(static_cast<uint8_t>(e.region.element_size));
            break;
        default:
            break;
        }
    }
    return out;
}

std::vector<TraceEvent> trace_decode(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    uint64_t count = get_u64(bytes, pos);
    std::vector<TraceEvent> events;
    events.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        if (pos >= bytes.size())
            throw TraceDecodeError(pos, "truncated stream: expected " + std::to_string(count) +
                                            " records, got " + std::to_string(i));
        size_t tag_pos = pos;
        uint8_t raw_tag = bytes[pos++];
        bool has_pc = (raw_tag & kPcFlag) != 0;
        uint8_t tag = raw_tag & ~kPcFlag;
        if (tag > static_cast<uint8_t>(TraceEvent::Kind::end))
            throw TraceDecodeError(tag_pos, "unknown record tag " + std::to_string(raw_tag));
        if (has_pc && tag > 1)
            throw TraceDecodeError(tag_pos, "pc flag on non-access record");
        TraceEvent e;
        e.kind = static_cast<TraceEvent::Kind>(tag);
        switch (e.kind) {
        case TraceEvent::Kind::load:
        case TraceEvent::Kind::store:
            e.vaddr = get_u64(bytes, pos);
            if (has_pc) {
                e.pc = get_u64(bytes, pos);
                e.has_pc = true;
            }
            break;
        case TraceEvent::Kind::addr_tbase:
        case TraceEvent::Kind::addr_fbase:
            e.region.base = VirtualAddress{get_u64(bytes, pos)};
            e.region.element_count = get_u64(bytes, pos);
            if (pos >= bytes.size())
                throw TraceDecodeError(pos, "truncated element_size field");
            e.region.element_size = bytes[pos++];
            break;
        default:
            break;
        }
        events.push_back(e);
    }
    if (pos != bytes.size())
        throw TraceDecodeError(pos, "trailing bytes after last record");
    return events;
}

std::string trace_to_jsonl(const std::vector<TraceEvent>& events) {
    std::ostringstream os;
    for (const auto& e : events) {
        nlohmann::json j;
        switch (e.kind) {
        case TraceEvent::Kind::load:
        case TraceEvent::Kind::store:
            j["kind"] = e.kind == TraceEvent::Kind::load ? "load" : "store";
            j["vaddr"] = hex(e.vaddr);
            if (e.has_pc)
                j["pc"] = hex(e.pc);
            break;
        case TraceEvent::Kind::init:
            j["kind"] = "init";
            break;
        case TraceEvent::Kind::addr_tbase:
        case TraceEvent::Kind::addr_fbase:
            j["kind"] = e.kind == TraceEvent::Kind::addr_tbase ? "addr_tbase" : "addr_fbase";
            j["base"] = hex(e.region.base.value);
            j["element_count"] = e.region.element_count;
            j["element_size"] = e.region.element_size;
            break;
        case TraceEvent::Kind::update:
            j["kind"] = "update";
            break;
        case TraceEvent::Kind::end:
            j["kind"] = "end";
            break;
        }
        os << j.dump() << '\n';
    }
    return os.str();
}

std::vector<TraceEvent> trace_from_jsonl(const std::string& text) {
    std::vector<TraceEvent> events;
    std::istringstream is(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw TraceDecodeError(line_no, std::string("bad json line: ") + ex.what());
        }
        std::string kind = j.value("kind", "");
        TraceEvent e;
        if (kind == "load" || kind == "store") {
            e.kind = kind == "load" ? TraceEvent::Kind::load : TraceEvent::Kind::store;
            e.vaddr = parse_hex(j, "vaddr", line_no);
            if (j.contains("pc")) {
                e.pc = parse_hex(j, "pc", line_no);
                e.has_pc = true;
            }
        } else if (kind == "init") {
            e.kind = TraceEvent::Kind::init;
        } else if (kind == "addr_tbase" || kind == "addr_fbase") {
            e.kind = kind == "addr_tbase" ? TraceEvent::Kind::addr_tbase : TraceEvent::Kind::addr_fbase;
            e.region.base = VirtualAddress{parse_hex(j, "base", line_no)};
            e.region.element_count = j.at("element_count").get<uint64_t>();
            e.region.element_size = j.at("element_size").get<uint32_t>();
        } else if (kind == "update") {
            e.kind = TraceEvent::Kind::update;
        } else if (kind == "end") {
            e.kind = TraceEvent::Kind::end;
        } else {
            throw TraceDecodeError(line_no, "unknown event kind '" + kind + "'");
        }
        events.push_back(e);
    }
    return events;
}

void save_trace(const std::vector<TraceEvent>& events, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open trace file for writing: " + path);
    if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") {
        out << trace_to_jsonl(events);
    } else {
        auto bytes = trace_encode(events);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
}

std::vector<TraceEvent> load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open trace file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // A binary stream starts with a LE record count; a JSONL stream starts
    // with '{'. Disambiguate '{' (0x7b) by checking for printable tail bytes.
    bool looks_json = !bytes.empty() && bytes[0] == '{' &&
                      (bytes.size() < 8 || bytes[2] != 0 || bytes[3] != 0);
    if (looks_json)
        return trace_from_jsonl(std::string(bytes.begin(), bytes.end()));
    return trace_decode(bytes);
}

void validate_trace(const std::vector<TraceEvent>& events) {
    bool saw_init = false, saw_update = false, saw_end = false;
    bool saw_tbase = false, saw_fbase = false;
    for (size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (saw_end)
            throw std::invalid_argument("trace has records after end (record " + std::to_string(i) + ")");
        switch (e.kind) {
        case TraceEvent::Kind::init:
            if (saw_init)
                throw std::invalid_argument("trace has more than one init");
            saw_init = true;
            break;
        case TraceEvent::Kind::load:
        case TraceEvent::Kind::store:
            if (!saw_init)
                throw std::invalid_argument("access before init (record " + std::to_string(i) + ")");
            break;
        case TraceEvent::Kind::addr_tbase:
            if (saw_update)
                throw std::invalid_argument("addr_tbase after first update");
            saw_tbase = true;
            break;
        case TraceEvent::Kind::addr_fbase:
            if (saw_update)
                throw std::invalid_argument("addr_fbase after first update");
            saw_fbase = true;
            break;
        case TraceEvent::Kind::update:
            saw_update = true;
            break;
        case TraceEvent::Kind::end:
            saw_end = true;
            break;
        }
    }
    if (!saw_init)
        throw std::invalid_argument("trace has no init");
    if (!saw_end)
        throw std::invalid_argument("trace has no end");
    (void)saw_tbase;
    (void)saw_fbase;
}

} // namespace amcsim
