#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aisf/errors.hpp"
#include "aisf/immune_core.hpp"

namespace aisf {

inline constexpr std::array<char, 4> kStateMagic = {'I', 'M', 'M', 'F'};
inline constexpr std::uint32_t kStateVersion = 1;

namespace ser {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t crc = 0) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc = ~crc;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return ~crc;
}

// Little-endian buffer writer.
class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void str(const std::string& s) {
        u64(s.size());
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    void bits(const BitSequence& b) {
        u64(b.size());
        for (std::uint64_t w : b.words()) u64(w);
    }
    const std::vector<std::uint8_t>& data() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        const std::uint8_t* p = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
        return v;
    }
    std::uint64_t u64() {
        const std::uint8_t* p = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
        return v;
    }
    std::string str() {
        const std::uint64_t n = u64();
        if (n > size_ - pos_) throw CorruptStateError{"string runs past end of payload"};
        const std::uint8_t* p = take(n);
        return std::string(reinterpret_cast<const char*>(p), n);
    }
    BitSequence bits() {
        const std::uint64_t n = u64();
        const std::uint64_t words = (n + 63) / 64;
        if (words * 8 > size_ - pos_) throw CorruptStateError{"bit sequence runs past end"};
        BitSequence b;
        std::vector<std::uint64_t> ws(words);
        for (auto& w : ws) w = u64();
        for (std::uint64_t i = 0; i < n; ++i) b.push_back((ws[i / 64] >> (i % 64)) & 1);
        return b;
    }
    bool at_end() const { return pos_ == size_; }

private:
    const std::uint8_t* take(std::size_t n) {
        if (n > size_ - pos_) throw CorruptStateError{"payload truncated"};
        const std::uint8_t* p = data_ + pos_;
        pos_ += n;
        return p;
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

inline void write_lymphocyte(Writer& w, const Lymphocyte& c) {
    w.u64(c.id);
    w.u8(static_cast<std::uint8_t>(c.role));
    w.bits(c.receptor);
    w.u32(c.weights.replication_attack_match);
    w.u32(c.weights.transaction_match);
    w.u32(c.lifetime);
    w.u32(c.encounters);
}

inline Lymphocyte read_lymphocyte(Reader& r) {
    Lymphocyte c;
    c.id = r.u64();
    const std::uint8_t role = r.u8();
    if (role > 2) throw CorruptStateError{"bad cell role"};
    c.role = static_cast<CellRole>(role);
    c.receptor = r.bits();
    c.weights.replication_attack_match = r.u32();
    c.weights.transaction_match = r.u32();
    c.lifetime = r.u32();
    c.encounters = r.u32();
    return c;
}

inline void write_verdict(Writer& w, const Verdict& v) {
    w.u8(v.label == Label::Spam ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(v.route));
    w.u32(v.tally.helper_stimulations);
    w.u32(v.tally.controller_stimulations);
    w.u64(v.evidence.size());
    for (auto id : v.evidence) w.u64(id);
}

inline Verdict read_verdict(Reader& r) {
    Verdict v;
    v.label = r.u8() ? Label::Spam : Label::Legitimate;
    const std::uint8_t route = r.u8();
    if (route > 2) throw CorruptStateError{"bad verdict route"};
    v.route = static_cast<VerdictRoute>(route);
    v.tally.helper_stimulations = r.u32();
    v.tally.controller_stimulations = r.u32();
    const std::uint64_t n = r.u64();
    v.evidence.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) v.evidence.push_back(r.u64());
    return v;
}

inline void write_microorganism(Writer& w, const Microorganism& mo) {
    w.str(mo.source_id);
    w.bits(mo.pattern.bits);
    w.u64(mo.antigen.peptides.size());
    for (const auto& p : mo.antigen.peptides) w.bits(p.bits);
}

inline Microorganism read_microorganism(Reader& r) {
    Microorganism mo;
    mo.source_id = r.str();
    mo.pattern.bits = r.bits();
    const std::uint64_t n = r.u64();
    mo.antigen.peptides.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) mo.antigen.peptides.push_back(Peptide{r.bits()});
    return mo;
}

}  // namespace ser

// ---------------------------------------------------------------------------
// State container: 'IMMF' magic, version, payload length, payload, CRC32.

inline std::vector<std::uint8_t> encode_state(const ClassifierState& state) {
    ser::Writer w;

    w.u32(state.codebook.version());
    for (auto [sym, code] : state.codebook.entries()) {
        w.u8(static_cast<std::uint8_t>(sym));
        w.u8(code);
    }

    const RunConfig& p = state.params;
    w.u32(p.r);
    w.u8(p.r_pattern ? 1 : 0);
    w.u32(p.r_pattern.value_or(0));
    w.u32(p.b_cell_count);
    w.u32(p.helper_t_count);
    w.u32(p.controller_t_count);
    w.u32(p.initial_lifetime);
    w.u32(p.reward);
    w.u32(p.clone_count);
    w.u32(p.k_max);
    w.u32(p.reset_value);
    w.u64(p.seed);

    w.u8(static_cast<std::uint8_t>(state.mode));
    w.u8(state.initialized ? 1 : 0);
    w.u64(state.encounter_count);
    w.u64(state.next_cell_id);
    std::ostringstream rng_state;
    rng_state << state.rng;
    w.str(rng_state.str());

    auto write_patterns = [&](const std::vector<MolecularPattern>& v) {
        w.u64(v.size());
        for (const auto& x : v) w.bits(x.bits);
    };
    auto write_peptides = [&](const std::vector<Peptide>& v) {
        w.u64(v.size());
        for (const auto& x : v) w.bits(x.bits);
    };
    write_patterns(state.library.self_patterns());
    write_patterns(state.library.nonself_patterns());
    write_peptides(state.library.self_peptides());
    write_peptides(state.library.nonself_peptides());

    w.u64(state.macrophages.size());
    for (const auto& m : state.macrophages) {
        w.u64(m.id);
        w.bits(m.receptor.bits);
    }
    for (const auto* pop : {&state.b_cells, &state.helper_t, &state.controller_t}) {
        w.u64(pop->size());
        for (const auto& c : *pop) ser::write_lymphocyte(w, c);
    }

    w.u64(state.replay_log.size());
    for (const auto& entry : state.replay_log) {
        ser::write_microorganism(w, entry.microorganism);
        ser::write_verdict(w, entry.verdict);
    }
    return w.data();
}

inline ClassifierState decode_state(const std::uint8_t* payload, std::size_t size) {
    ser::Reader r(payload, size);
    ClassifierState state;

    const std::uint32_t cb_version = r.u32();
    std::vector<std::pair<char, std::uint8_t>> entries;
    entries.reserve(kCodebookSize);
    for (std::size_t i = 0; i < kCodebookSize; ++i) {
        const char sym = static_cast<char>(r.u8());
        const std::uint8_t code = r.u8();
        entries.emplace_back(sym, code);
    }
    state.codebook = Codebook::from_entries(entries, cb_version);

    RunConfig& p = state.params;
    p.r = r.u32();
    const bool has_rp = r.u8() != 0;
    const std::uint32_t rp = r.u32();
    p.r_pattern = has_rp ? std::optional<std::uint32_t>{rp} : std::nullopt;
    p.b_cell_count = r.u32();
    p.helper_t_count = r.u32();
    p.controller_t_count = r.u32();
    p.initial_lifetime = r.u32();
    p.reward = r.u32();
    p.clone_count = r.u32();
    p.k_max = r.u32();
    p.reset_value = r.u32();
    p.seed = r.u64();

    const std::uint8_t mode = r.u8();
    if (mode > 3) throw CorruptStateError{"bad stage mode"};
    state.mode = static_cast<StageMode>(mode);
    state.initialized = r.u8() != 0;
    state.encounter_count = r.u64();
    state.next_cell_id = r.u64();
    std::istringstream rng_state(r.str());
    rng_state >> state.rng;
    if (!rng_state) throw CorruptStateError{"bad rng state"};

    const std::uint64_t n_self_pat = r.u64();
    for (std::uint64_t i = 0; i < n_self_pat; ++i)
        state.library.add_self_pattern(MolecularPattern{r.bits()});
    const std::uint64_t n_nonself_pat = r.u64();
    for (std::uint64_t i = 0; i < n_nonself_pat; ++i)
        state.library.add_nonself_pattern(MolecularPattern{r.bits()});
    const std::uint64_t n_self_pep = r.u64();
    for (std::uint64_t i = 0; i < n_self_pep; ++i)
        state.library.add_self_peptide(Peptide{r.bits()});
    const std::uint64_t n_nonself_pep = r.u64();
    for (std::uint64_t i = 0; i < n_nonself_pep; ++i)
        state.library.add_nonself_peptide(Peptide{r.bits()});

    const std::uint64_t n_mac = r.u64();
    for (std::uint64_t i = 0; i < n_mac; ++i) {
        Macrophage m;
        m.id = r.u64();
        m.receptor.bits = r.bits();
        state.macrophages.push_back(std::move(m));
    }
    for (auto* pop : {&state.b_cells, &state.helper_t, &state.controller_t}) {
        const std::uint64_t n = r.u64();
        pop->reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) pop->push_back(ser::read_lymphocyte(r));
    }

    const std::uint64_t n_log = r.u64();
    for (std::uint64_t i = 0; i < n_log; ++i) {
        LogEntry entry;
        entry.microorganism = ser::read_microorganism(r);
        entry.verdict = ser::read_verdict(r);
        state.replay_log.push_back(std::move(entry));
    }
    if (!r.at_end()) throw CorruptStateError{"trailing bytes after payload"};
    return state;
}

// Atomic save: write to a temp file in the target directory, then rename.
inline void save_state(const ClassifierState& state, const std::string& path) {
    const std::vector<std::uint8_t> payload = encode_state(state);
    const std::uint32_t crc = ser::crc32(payload.data(), payload.size());

    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError{"cannot write state file: " + tmp.string()};
        ser::Writer header;
        for (char c : kStateMagic) header.u8(static_cast<std::uint8_t>(c));
        header.u32(kStateVersion);
        header.u64(payload.size());
        out.write(reinterpret_cast<const char*>(header.data().data()),
                  static_cast<std::streamsize>(header.data().size()));
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size()));
        ser::Writer footer;
        footer.u32(crc);
        out.write(reinterpret_cast<const char*>(footer.data().data()), 4);
        if (!out.flush()) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError{"failed writing state file: " + tmp.string()};
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError{"cannot replace state file: " + path};
    }
}

inline ClassifierState load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError{"cannot open state file: " + path};
    std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    if (raw.size() < 4 + 4 + 8 + 4) throw CorruptStateError{"file too short"};
    if (std::memcmp(raw.data(), kStateMagic.data(), 4) != 0)
        throw CorruptStateError{"bad magic bytes"};
    ser::Reader header(raw.data() + 4, raw.size() - 4);
    const std::uint32_t version = header.u32();
    if (version != kStateVersion) throw VersionMismatchError{version, kStateVersion};
    const std::uint64_t payload_size = header.u64();
    const std::size_t payload_off = 4 + 4 + 8;
    if (raw.size() != payload_off + payload_size + 4)
        throw CorruptStateError{"length does not match header"};
    ser::Reader footer(raw.data() + payload_off + payload_size, 4);
    const std::uint32_t want_crc = footer.u32();
    const std::uint32_t got_crc = ser::crc32(raw.data() + payload_off, payload_size);
    if (want_crc != got_crc) throw CorruptStateError{"checksum mismatch"};
    return decode_state(raw.data() + payload_off, payload_size);
}

// ---------------------------------------------------------------------------
// JSON views for `inspect`.

inline nlohmann::json config_to_json(const RunConfig& p) {
    nlohmann::json j{{"r", p.r},
                     {"b_cells", p.b_cell_count},
                     {"helper_t", p.helper_t_count},
                     {"controller_t", p.controller_t_count},
                     {"lifetime", p.initial_lifetime},
                     {"reward", p.reward},
                     {"clones", p.clone_count},
                     {"k_max", p.k_max},
                     {"reset_value", p.reset_value},
                     {"seed", p.seed}};
    if (p.r_pattern) j["r_pattern"] = *p.r_pattern;
    else j["r_pattern"] = nullptr;
    return j;
}

inline nlohmann::json population_summary(const std::vector<Lymphocyte>& pop) {
    nlohmann::json hist = nlohmann::json::object();
    std::uint64_t zero_attack = 0;
    std::uint64_t lifetime_sum = 0;
    for (const auto& c : pop) {
        const std::string key = std::to_string(c.weights.transaction_match);
        hist[key] = hist.value(key, 0) + 1;
        if (c.weights.replication_attack_match == 0) ++zero_attack;
        lifetime_sum += c.lifetime;
    }
    return nlohmann::json{{"size", pop.size()},
                          {"transaction_match_histogram", hist},
                          {"zero_attack_match", zero_attack},
                          {"mean_lifetime", pop.empty() ? 0.0
                                                        : static_cast<double>(lifetime_sum) /
                                                              static_cast<double>(pop.size())}};
}

inline nlohmann::json state_summary_json(const ClassifierState& state) {
    return nlohmann::json{
        {"config", config_to_json(state.params)},
        {"mode", to_string(state.mode)},
        {"encounters", state.encounter_count},
        {"library",
         {{"self_patterns", state.library.self_patterns().size()},
          {"nonself_patterns", state.library.nonself_patterns().size()},
          {"self_peptides", state.library.self_peptides().size()},
          {"nonself_peptides", state.library.nonself_peptides().size()}}},
        {"macrophages", state.macrophages.size()},
        {"b_cells", population_summary(state.b_cells)},
        {"helper_t", population_summary(state.helper_t)},
        {"controller_t", population_summary(state.controller_t)},
        {"replay_log", state.replay_log.size()},
    };
}

// Lossless-in-content export of the populations and libraries for audits.
inline nlohmann::json state_full_json(const ClassifierState& state) {
    auto bits_list = [](const auto& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& x : v) arr.push_back(x.bits.to_string());
        return arr;
    };
    auto cells = [](const std::vector<Lymphocyte>& pop) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : pop)
            arr.push_back({{"id", c.id},
                           {"role", to_string(c.role)},
                           {"receptor", c.receptor.to_string()},
                           {"replication_attack_match", c.weights.replication_attack_match},
                           {"transaction_match", c.weights.transaction_match},
                           {"lifetime", c.lifetime},
                           {"encounters", c.encounters}});
        return arr;
    };
    nlohmann::json j = state_summary_json(state);
    j["library_detail"] = {{"self_patterns", bits_list(state.library.self_patterns())},
                           {"nonself_patterns", bits_list(state.library.nonself_patterns())},
                           {"self_peptides", bits_list(state.library.self_peptides())},
                           {"nonself_peptides", bits_list(state.library.nonself_peptides())}};
    nlohmann::json macs = nlohmann::json::array();
    for (const auto& m : state.macrophages)
        macs.push_back({{"id", m.id}, {"receptor", m.receptor.bits.to_string()}});
    j["macrophage_detail"] = macs;
    j["b_cell_detail"] = cells(state.b_cells);
    j["helper_t_detail"] = cells(state.helper_t);
    j["controller_t_detail"] = cells(state.controller_t);
    return j;
}

}  // namespace aisf
