#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hash.hpp"
#include "parallel.hpp"
#include "plan.hpp"
#include "points.hpp"
#include "rng.hpp"
#include "tcam.hpp"
#include "ternary.hpp"

namespace tlsh {

inline Plan plan_from_json(const nlohmann::json& j) {
    Plan p;
    p.n = j.at("n").get<std::size_t>();
    p.c = j.at("c").get<double>();
    p.eps = j.at("eps").get<double>();
    p.mode = bound_mode_from_name(j.at("mode").get<std::string>());
    p.delta = j.at("delta").get<double>();
    p.k = j.at("k").get<double>();
    p.w = j.at("w").get<std::size_t>();
    p.repeats = j.at("repeats").get<std::size_t>();
    p.feasible = j.at("feasible").get<bool>();
    return p;
}

/// Number of always-cared ternions needed to tag each of `repeats` banks
/// with a distinct binary version prefix.
inline std::size_t version_prefix_width(std::size_t repeats) {
    return repeats <= 1 ? 0 : std::bit_width(repeats - 1);
}

/// One-table index answering the (r, c r)-decision problem: query() returns
/// a point within c*scale of q whenever some point lies within scale of q
/// (with the plan's error probability), and never returns a point farther
/// than c*scale, because every candidate is verified against the stored
/// coordinates before it is reported.
///
/// The table holds plan.repeats signature banks back to back: bank r covers
/// addresses [r n, (r+1) n) and every word in it starts with r written in
/// always-cared ternions, so a bank-r query can only match bank-r entries.
/// Distances in the plan are normalized to r = 1; `scale` is the real query
/// radius, folded into the hash by widening delta to plan.delta * scale.
class NNIndex {
  public:
    NNIndex(const PointSet& points, const Plan& plan, double scale, std::uint64_t seed,
            unsigned threads = 0)
        : NNIndex(points, plan, scale, seed, HardwareProfile{}, threads) {}

    NNIndex(const PointSet& points, const Plan& plan, double scale, std::uint64_t seed,
            const HardwareProfile& profile, unsigned threads = 0)
        : points_(points), plan_(plan), scale_(scale), seed_(seed),
          prefix_(version_prefix_width(plan.repeats)),
          table_(prefix_ + plan.w, profile) {
        if (!(scale > 0.0)) throw std::invalid_argument("NNIndex: scale must be positive");
        if (points.empty()) throw std::invalid_argument("NNIndex: empty point set");
        make_schemes();
        const std::size_t n = points_.size();
        for (std::size_t r = 0; r < plan_.repeats; ++r) {
            std::vector<TernaryWord> words(n, TernaryWord(table_.width()));
            parallel_for(0, n, threads, [&](std::size_t i) {
                words[i] = entry_word(r, points_[i]);
            });
            for (std::size_t i = 0; i < n; ++i) table_.program(words[i], i);
        }
        table_.freeze();
    }

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return points_.dim(); }
    double scale() const { return scale_; }
    std::uint64_t seed() const { return seed_; }
    const Plan& plan() const { return plan_; }
    std::size_t prefix_width() const { return prefix_; }
    const TcamTable& table() const { return table_; }
    const PointSet& points() const { return points_; }

    struct Result {
        std::uint64_t id = 0;
        double distance = 0.0;
    };

    /// Search bank by bank; report the first candidate whose verified
    /// distance is within c*scale, or nothing if no bank produces one.
    std::optional<Result> query(const double* q) const {
        const std::size_t n = points_.size();
        for (std::size_t r = 0; r < plan_.repeats; ++r) {
            TernaryWord probe = entry_word(r, q);
            for (const TcamMatch& m : table_.lookup_all(probe, r * n, (r + 1) * n)) {
                double d = euclidean(points_[m.payload], q, points_.dim());
                if (d <= plan_.c * scale_) return Result{m.payload, d};
            }
        }
        return std::nullopt;
    }

    std::optional<Result> query(const std::vector<double>& q) const {
        if (q.size() != points_.dim()) throw std::invalid_argument("NNIndex: dimension mismatch");
        return query(q.data());
    }

    /// Unverified candidate ids from one bank, in address order.
    std::vector<std::uint64_t> candidates(const double* q, std::size_t bank) const {
        if (bank >= plan_.repeats) throw std::out_of_range("NNIndex: bank out of range");
        const std::size_t n = points_.size();
        std::vector<std::uint64_t> ids;
        for (const TcamMatch& m : table_.lookup_all(entry_word(bank, q), bank * n, (bank + 1) * n))
            ids.push_back(m.payload);
        return ids;
    }

    /// Container layout: magic, u64 header length, JSON header, TCAM dump,
    /// point set. The header carries everything needed to rebuild the
    /// schemes, so load() never rehashes.
    void save(std::ostream& out) const {
        out.write(kMagic, 8);
        nlohmann::json header = {{"format", 1},
                                 {"scale", scale_},
                                 {"seed", seed_},
                                 {"dim", points_.dim()},
                                 {"plan", to_json(plan_)}};
        std::string bytes = header.dump();
        write_u64(out, bytes.size());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        table_.dump(out);
        points_.write_binary(out);
    }

    static NNIndex load(std::istream& in) {
        char magic[8];
        in.read(magic, 8);
        if (in.gcount() != 8 || std::string(magic, 8) != kMagic)
            throw std::runtime_error("NNIndex: bad magic");
        std::uint64_t len = read_u64(in);
        std::string bytes(static_cast<std::size_t>(len), '\0');
        in.read(bytes.data(), static_cast<std::streamsize>(len));
        if (in.gcount() != static_cast<std::streamsize>(len))
            throw std::runtime_error("NNIndex: truncated header");
        nlohmann::json header = nlohmann::json::parse(bytes);
        if (header.at("format").get<int>() != 1)
            throw std::runtime_error("NNIndex: unsupported container format");
        NNIndex idx(TcamTable::load(in));
        idx.scale_ = header.at("scale").get<double>();
        idx.seed_ = header.at("seed").get<std::uint64_t>();
        idx.plan_ = plan_from_json(header.at("plan"));
        idx.prefix_ = version_prefix_width(idx.plan_.repeats);
        idx.points_ = PointSet::read_binary(in);
        if (header.at("dim").get<std::size_t>() != idx.points_.dim())
            throw std::runtime_error("NNIndex: header dim differs from stored points");
        if (idx.table_.width() != idx.prefix_ + idx.plan_.w)
            throw std::runtime_error("NNIndex: table width differs from plan");
        if (idx.table_.size() != idx.plan_.repeats * idx.points_.size())
            throw std::runtime_error("NNIndex: table size differs from plan");
        idx.make_schemes();
        return idx;
    }

  private:
    explicit NNIndex(TcamTable&& table) : table_(std::move(table)) {}

    void make_schemes() {
        schemes_.clear();
        schemes_.reserve(plan_.repeats);
        for (std::size_t r = 0; r < plan_.repeats; ++r)
            schemes_.emplace_back(points_.dim(), plan_.w, plan_.delta * scale_,
                                  derive_seed(seed_, r));
    }

    /// Version prefix for bank r, then the bank-r signature of x.
    TernaryWord entry_word(std::size_t r, const double* x) const {
        TernaryWord word(prefix_ + plan_.w);
        for (std::size_t p = 0; p < prefix_; ++p)
            word.set(p, (r >> p) & 1 ? Ternion::One : Ternion::Zero);
        const SignatureScheme& scheme = schemes_[r];
        for (std::size_t i = 0; i < plan_.w; ++i)
            word.set(prefix_ + i, scheme.function(i).label(x));
        return word;
    }

    static constexpr const char kMagic[9] = "TLSHNNI1";

    static void write_u64(std::ostream& out, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    static std::uint64_t read_u64(std::istream& in) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            int byte = in.get();
            if (byte == std::istream::traits_type::eof())
                throw std::runtime_error("NNIndex: truncated stream");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(byte)) << (8 * i);
        }
        return v;
    }

    PointSet points_;
    Plan plan_;
    double scale_ = 1.0;
    std::uint64_t seed_ = 0;
    std::size_t prefix_ = 0;
    std::vector<SignatureScheme> schemes_;
    TcamTable table_;
};

} // namespace tlsh
