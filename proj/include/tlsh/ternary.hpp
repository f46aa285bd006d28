#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlsh {

/// A ternary digit: the two binary values plus a wildcard.
///
/// Star matches everything under the ternary match relation; Zero and One
/// match themselves and Star. The relation is reflexive and symmetric but
/// not transitive (Zero =T Star =T One, yet Zero !=T One).
enum class Ternion : uint8_t { Zero = 0, One = 1, Star = 2 };

/// Ternary match on single ternions.
constexpr bool ternion_match(Ternion a, Ternion b) {
    return a == b || a == Ternion::Star || b == Ternion::Star;
}

constexpr char ternion_char(Ternion t) {
    return t == Ternion::Zero ? '0' : t == Ternion::One ? '1' : '*';
}

/// Fixed-width ternary string packed as two parallel bit planes.
///
/// Plane layout: bit i of the care plane is 1 when position i is Zero or One;
/// the value plane holds the binary value for cared positions. Star positions
/// are canonical: care bit 0 and value bit 0. With both operands canonical,
/// a whole word matches iff ((a.value ^ b.value) & a.care & b.care) == 0 in
/// every 64-bit chunk; padding bits beyond the width are zero in both planes
/// and therefore never influence a match.
///
/// Packed equality (operator==) equals semantic equality because of the
/// canonical-Star invariant.
class TernaryWord {
  public:
    TernaryWord() = default;

    /// Constructs an all-Star word of the given width. Width 0 is the empty
    /// word, which matches everything (including itself, vacuously).
    explicit TernaryWord(size_t width)
        : width_(width), care_(chunk_count(width), 0), value_(chunk_count(width), 0) {}

    size_t width() const { return width_; }

    void set(size_t i, Ternion t) {
        check_pos(i);
        uint64_t bit = uint64_t(1) << (i & 63);
        size_t w = i >> 6;
        if (t == Ternion::Star) {
            care_[w] &= ~bit;
            value_[w] &= ~bit;
        } else {
            care_[w] |= bit;
            if (t == Ternion::One) value_[w] |= bit; else value_[w] &= ~bit;
        }
    }

    Ternion get(size_t i) const {
        check_pos(i);
        uint64_t bit = uint64_t(1) << (i & 63);
        size_t w = i >> 6;
        if (!(care_[w] & bit)) return Ternion::Star;
        return (value_[w] & bit) ? Ternion::One : Ternion::Zero;
    }

    /// Ternary match against another word of the same width.
    /// Throws std::invalid_argument on width mismatch.
    bool matches(const TernaryWord& other) const {
        if (width_ != other.width_)
            throw std::invalid_argument("TernaryWord::matches: width mismatch");
        for (size_t w = 0; w < care_.size(); ++w) {
            if ((value_[w] ^ other.value_[w]) & care_[w] & other.care_[w]) return false;
        }
        return true;
    }

    bool operator==(const TernaryWord& other) const {
        return width_ == other.width_ && care_ == other.care_ && value_ == other.value_;
    }
    bool operator!=(const TernaryWord& other) const { return !(*this == other); }

    /// Renders as a string of '0'/'1'/'*' with position 0 leftmost.
    std::string to_text() const {
        std::string s(width_, '*');
        for (size_t i = 0; i < width_; ++i) s[i] = ternion_char(get(i));
        return s;
    }

    /// Parses a '0'/'1'/'*' string; position 0 is the leftmost character.
    /// Throws std::invalid_argument on any other character or on an empty
    /// string (the empty word must be built explicitly via TernaryWord(0)).
    static TernaryWord from_text(const std::string& text) {
        if (text.empty())
            throw std::invalid_argument("TernaryWord::from_text: empty string");
        TernaryWord word(text.size());
        for (size_t i = 0; i < text.size(); ++i) {
            switch (text[i]) {
                case '0': word.set(i, Ternion::Zero); break;
                case '1': word.set(i, Ternion::One); break;
                case '*': word.set(i, Ternion::Star); break;
                default:
                    throw std::invalid_argument("TernaryWord::from_text: invalid character");
            }
        }
        return word;
    }

    /// Binary format: 8-byte little-endian width, then the care plane, then
    /// the value plane, each ceil(width/8) bytes, LSB-first within a byte.
    void write_binary(std::ostream& out) const {
        write_u64(out, width_);
        write_plane(out, care_);
        write_plane(out, value_);
    }

    static TernaryWord read_binary(std::istream& in) {
        uint64_t w = read_u64(in);
        TernaryWord word{size_t(w)};
        read_plane(in, word.care_, w);
        read_plane(in, word.value_, w);
        word.check_canonical();
        return word;
    }

    const std::vector<uint64_t>& care_plane() const { return care_; }
    const std::vector<uint64_t>& value_plane() const { return value_; }

    static size_t chunk_count(size_t width) { return (width + 63) >> 6; }

  private:
    void check_pos(size_t i) const {
        if (i >= width_) throw std::out_of_range("TernaryWord: position out of range");
    }

    void check_canonical() const {
        // Padding beyond width and values under Star must be zero.
        for (size_t w = 0; w < care_.size(); ++w) {
            uint64_t live = ~uint64_t(0);
            if (w == care_.size() - 1 && (width_ & 63))
                live = (uint64_t(1) << (width_ & 63)) - 1;
            if ((care_[w] & ~live) || (value_[w] & ~live))
                throw std::runtime_error("TernaryWord: non-zero padding bits");
            if (value_[w] & ~care_[w])
                throw std::runtime_error("TernaryWord: value bit set under Star");
        }
    }

    static void write_u64(std::ostream& out, uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
        out.write(reinterpret_cast<const char*>(b), 8);
    }

    static uint64_t read_u64(std::istream& in) {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        if (!in) throw std::runtime_error("TernaryWord: truncated stream");
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
        return v;
    }

    void write_plane(std::ostream& out, const std::vector<uint64_t>& plane) const {
        size_t nbytes = (width_ + 7) / 8;
        std::vector<unsigned char> buf(nbytes);
        for (size_t i = 0; i < nbytes; ++i)
            buf[i] = (unsigned char)(plane[i >> 3] >> (8 * (i & 7)));
        out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(nbytes));
    }

    static void read_plane(std::istream& in, std::vector<uint64_t>& plane, uint64_t width) {
        size_t nbytes = (size_t(width) + 7) / 8;
        std::vector<unsigned char> buf(nbytes);
        in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(nbytes));
        if (!in) throw std::runtime_error("TernaryWord: truncated stream");
        for (size_t i = 0; i < nbytes; ++i)
            plane[i >> 3] |= uint64_t(buf[i]) << (8 * (i & 7));
    }

    size_t width_ = 0;
    std::vector<uint64_t> care_;
    std::vector<uint64_t> value_;
};

/// Ternary match between a query word and an entry word.
inline bool word_match(const TernaryWord& query, const TernaryWord& entry) {
    return query.matches(entry);
}

} // namespace tlsh
