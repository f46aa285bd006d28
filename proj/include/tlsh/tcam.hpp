#pragma once

#include <atomic>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ternary.hpp"

namespace tlsh {

/// Capacity limits of a hardware target. A table constructed with a profile
/// refuses to grow past them, so planning bugs surface as exceptions rather
/// than as tables no device could hold.
struct HardwareProfile {
    std::size_t max_entries = 0; // 0 means unlimited
    std::size_t max_width = 0;   // 0 means unlimited
};

/// One match reported by a lookup.
struct TcamMatch {
    std::uint64_t address = 0;
    std::uint64_t payload = 0;
};

/// Running counters, readable at any time.
struct TcamStats {
    std::uint64_t lookups = 0;
    std::uint64_t hits = 0;   // lookups that matched at least one entry
    std::uint64_t misses = 0; // lookups that matched nothing
};

/// Software model of a ternary CAM: fixed-width ternary entries at
/// consecutive addresses, searched in parallel by the hardware and by a
/// linear scan here. lookup_first mimics the priority encoder (lowest
/// matching address wins); lookup_all returns every match in address order.
///
/// Entries are stored as interleaved care/value bit planes so a lookup
/// touches one contiguous strip per entry and can reject on the first
/// mismatching 64-bit chunk. Lookups are const and safe to run from many
/// threads; programming is not, and freeze() makes the table immutable.
class TcamTable {
  public:
    explicit TcamTable(std::size_t width) : TcamTable(width, HardwareProfile{}) {}

    TcamTable(std::size_t width, const HardwareProfile& profile)
        : width_(width), chunks_(TernaryWord::chunk_count(width)), profile_(profile) {
        if (width == 0) throw std::invalid_argument("TcamTable: width must be positive");
        if (profile.max_width != 0 && width > profile.max_width)
            throw std::invalid_argument("TcamTable: width exceeds hardware profile");
    }

    TcamTable(TcamTable&& other) noexcept
        : width_(other.width_), chunks_(other.chunks_), profile_(other.profile_),
          planes_(std::move(other.planes_)), payloads_(std::move(other.payloads_)),
          frozen_(other.frozen_), lookups_(other.lookups_.load(std::memory_order_relaxed)),
          hits_(other.hits_.load(std::memory_order_relaxed)),
          misses_(other.misses_.load(std::memory_order_relaxed)) {}

    TcamTable& operator=(TcamTable&& other) noexcept {
        width_ = other.width_;
        chunks_ = other.chunks_;
        profile_ = other.profile_;
        planes_ = std::move(other.planes_);
        payloads_ = std::move(other.payloads_);
        frozen_ = other.frozen_;
        lookups_.store(other.lookups_.load(std::memory_order_relaxed), std::memory_order_relaxed);
        hits_.store(other.hits_.load(std::memory_order_relaxed), std::memory_order_relaxed);
        misses_.store(other.misses_.load(std::memory_order_relaxed), std::memory_order_relaxed);
        return *this;
    }

    TcamTable(const TcamTable&) = delete;
    TcamTable& operator=(const TcamTable&) = delete;

    std::size_t width() const { return width_; }
    std::size_t size() const { return payloads_.size(); }
    bool frozen() const { return frozen_; }
    const HardwareProfile& profile() const { return profile_; }

    /// Append an entry; returns its address. Addresses are assigned in
    /// programming order starting at 0.
    std::uint64_t program(const TernaryWord& entry, std::uint64_t payload) {
        if (frozen_) throw std::runtime_error("TcamTable: table is frozen");
        if (entry.width() != width_)
            throw std::invalid_argument("TcamTable: entry width mismatch");
        if (profile_.max_entries != 0 && payloads_.size() >= profile_.max_entries)
            throw std::runtime_error("TcamTable: hardware profile capacity exceeded");
        const auto& care = entry.care_plane();
        const auto& value = entry.value_plane();
        for (std::size_t c = 0; c < chunks_; ++c) {
            planes_.push_back(care[c]);
            planes_.push_back(value[c]);
        }
        payloads_.push_back(payload);
        return payloads_.size() - 1;
    }

    /// Forbid further programming (lookup-only from here on).
    void freeze() { frozen_ = true; }

    /// Lowest-address entry matching the query, if any.
    std::optional<TcamMatch> lookup_first(const TernaryWord& query) const {
        return lookup_first(query, 0, size());
    }

    /// Lowest matching address within [addr_begin, addr_end).
    std::optional<TcamMatch> lookup_first(const TernaryWord& query, std::uint64_t addr_begin,
                                          std::uint64_t addr_end) const {
        check_query(query, addr_begin, addr_end);
        lookups_.fetch_add(1, std::memory_order_relaxed);
        for (std::uint64_t a = addr_begin; a < addr_end; ++a) {
            if (entry_matches(query, a)) {
                hits_.fetch_add(1, std::memory_order_relaxed);
                return TcamMatch{a, payloads_[a]};
            }
        }
        misses_.fetch_add(1, std::memory_order_relaxed);
        return std::nullopt;
    }

    /// Every matching entry, in address order.
    std::vector<TcamMatch> lookup_all(const TernaryWord& query) const {
        return lookup_all(query, 0, size());
    }

    std::vector<TcamMatch> lookup_all(const TernaryWord& query, std::uint64_t addr_begin,
                                      std::uint64_t addr_end) const {
        check_query(query, addr_begin, addr_end);
        lookups_.fetch_add(1, std::memory_order_relaxed);
        std::vector<TcamMatch> out;
        for (std::uint64_t a = addr_begin; a < addr_end; ++a)
            if (entry_matches(query, a)) out.push_back(TcamMatch{a, payloads_[a]});
        (out.empty() ? misses_ : hits_).fetch_add(1, std::memory_order_relaxed);
        return out;
    }

    std::uint64_t payload(std::uint64_t address) const {
        return payloads_.at(static_cast<std::size_t>(address));
    }

    /// Reconstruct the ternary word stored at an address.
    TernaryWord entry_word(std::uint64_t address) const {
        if (address >= size()) throw std::out_of_range("TcamTable: address out of range");
        TernaryWord word(width_);
        const std::uint64_t* strip = planes_.data() + address * 2 * chunks_;
        for (std::size_t i = 0; i < width_; ++i) {
            std::uint64_t mask = 1ull << (i & 63);
            bool care = (strip[2 * (i >> 6)] & mask) != 0;
            bool value = (strip[2 * (i >> 6) + 1] & mask) != 0;
            word.set(i, !care ? Ternion::Star : value ? Ternion::One : Ternion::Zero);
        }
        return word;
    }

    TcamStats stats() const {
        return TcamStats{lookups_.load(std::memory_order_relaxed),
                         hits_.load(std::memory_order_relaxed),
                         misses_.load(std::memory_order_relaxed)};
    }

    void reset_stats() const {
        lookups_.store(0, std::memory_order_relaxed);
        hits_.store(0, std::memory_order_relaxed);
        misses_.store(0, std::memory_order_relaxed);
    }

    /// Binary dump: width and entry count, then each entry as a serialized
    /// ternary word followed by its 64-bit payload.
    void dump(std::ostream& out) const {
        write_u64(out, width_);
        write_u64(out, size());
        for (std::uint64_t a = 0; a < size(); ++a) {
            entry_word(a).write_binary(out);
            write_u64(out, payloads_[a]);
        }
    }

    static TcamTable load(std::istream& in) { return load(in, HardwareProfile{}); }

    static TcamTable load(std::istream& in, const HardwareProfile& profile) {
        std::uint64_t width = read_u64(in, "TcamTable: truncated dump");
        std::uint64_t count = read_u64(in, "TcamTable: truncated dump");
        TcamTable table(static_cast<std::size_t>(width), profile);
        for (std::uint64_t a = 0; a < count; ++a) {
            TernaryWord word = TernaryWord::read_binary(in);
            if (word.width() != width)
                throw std::runtime_error("TcamTable: entry width differs from header");
            std::uint64_t payload = read_u64(in, "TcamTable: truncated dump");
            table.program(word, payload);
        }
        return table;
    }

  private:
    void check_query(const TernaryWord& query, std::uint64_t addr_begin,
                     std::uint64_t addr_end) const {
        if (query.width() != width_)
            throw std::invalid_argument("TcamTable: query width mismatch");
        if (addr_begin > addr_end || addr_end > size())
            throw std::out_of_range("TcamTable: bad address range");
    }

    bool entry_matches(const TernaryWord& query, std::uint64_t address) const {
        const std::uint64_t* strip = planes_.data() + address * 2 * chunks_;
        const auto& qc = query.care_plane();
        const auto& qv = query.value_plane();
        for (std::size_t c = 0; c < chunks_; ++c)
            if ((qv[c] ^ strip[2 * c + 1]) & qc[c] & strip[2 * c]) return false;
        return true;
    }

    static void write_u64(std::ostream& out, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    static std::uint64_t read_u64(std::istream& in, const char* msg) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            int byte = in.get();
            if (byte == std::istream::traits_type::eof()) throw std::runtime_error(msg);
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(byte)) << (8 * i);
        }
        return v;
    }

    std::size_t width_;
    std::size_t chunks_;
    HardwareProfile profile_;
    std::vector<std::uint64_t> planes_; // per entry: care chunk, value chunk, ...
    std::vector<std::uint64_t> payloads_;
    bool frozen_ = false;
    mutable std::atomic<std::uint64_t> lookups_{0};
    mutable std::atomic<std::uint64_t> hits_{0};
    mutable std::atomic<std::uint64_t> misses_{0};
};

} // namespace tlsh
