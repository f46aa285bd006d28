#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hash.hpp"
#include "index.hpp"
#include "parallel.hpp"
#include "plan.hpp"
#include "points.hpp"
#include "prob.hpp"
#include "rng.hpp"
#include "tcam.hpp"
#include "ternary.hpp"

namespace tlsh {

/// How a ladder answers c-approximate nearest neighbor search: a geometric
/// sequence of decision levels covering radii [r0, rmax]. Level i tests the
/// radius l_i = r0 * c^{(i-1)/2} with gap sqrt(c); the first level that
/// verifies a candidate within l_i * sqrt(c) wins, which bounds the reported
/// distance by c times the true nearest neighbor distance whenever that
/// distance lies in [r0, rmax].
struct LadderConfig {
    double c = 2.0;     // overall approximation factor, > 1
    double r0 = 1.0;    // smallest radius covered
    double rmax = 1.0;  // largest radius covered
    double eps = 0.1;   // overall failure budget, split evenly across levels
    std::size_t width = 0; // 0: plan the width from the closed-form bounds;
                           // otherwise use exactly this many ternions per level
    BoundMode mode = BoundMode::Tight;
};

/// Given a fixed signature width and a per-level miss budget, the smallest
/// delta whose exact per-ternion mismatch keeps the whole-word miss
/// probability within budget: solve mismatch_prob(1, delta) =
/// 1 - (1 - eps_level)^(1/w). mismatch_prob falls monotonically in delta,
/// so bisection applies.
inline double delta_for_width(std::size_t w, double eps_level) {
    if (w == 0) throw std::invalid_argument("delta_for_width: w must be positive");
    if (!(eps_level > 0.0 && eps_level < 1.0))
        throw std::invalid_argument("delta_for_width: eps_level must lie in (0,1)");
    double target = -std::expm1(std::log1p(-eps_level) / double(w));
    double lo = 1e-6, hi = 60.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (mismatch_prob(1.0, mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Number of sqrt(c)-spaced levels needed to cover [r0, rmax].
inline std::size_t ladder_level_count(double c, double r0, double rmax) {
    if (!(c > 1.0)) throw std::invalid_argument("ladder_level_count: c must exceed 1");
    if (!(r0 > 0.0) || rmax < r0)
        throw std::invalid_argument("ladder_level_count: need 0 < r0 <= rmax");
    double m = std::ceil(2.0 * std::log(rmax / r0) / std::log(c));
    return m < 1.0 ? 1 : static_cast<std::size_t>(m);
}

/// Ladder of decision levels in one TCAM table. Level i (1-based) owns the
/// address block [(i-1) n, i n) and starts every word with the level index
/// in always-cared ternions. All levels share one (delta, w) pair; they
/// differ only in the radius folded into the hash cell width, so level i
/// hashes with cell width delta * l_i under its own derived seed.
class LadderIndex {
  public:
    LadderIndex(const PointSet& points, const LadderConfig& config, std::uint64_t seed,
                unsigned threads = 0)
        : points_(points), config_(config), seed_(seed) {
        if (points.empty()) throw std::invalid_argument("LadderIndex: empty point set");
        m_ = ladder_level_count(config.c, config.r0, config.rmax);
        double eps_level = config.eps / double(m_);
        if (config.width == 0) {
            Plan level = plan_single_lookup(points.size(), std::sqrt(config.c), eps_level,
                                            config.mode);
            delta_ = level.delta;
            w_ = level.w;
        } else {
            w_ = config.width;
            delta_ = delta_for_width(w_, eps_level);
        }
        prefix_ = version_prefix_width(m_);
        build(threads);
    }

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return points_.dim(); }
    std::size_t levels() const { return m_; }
    double delta() const { return delta_; }
    std::size_t width() const { return w_; }
    std::uint64_t seed() const { return seed_; }
    const LadderConfig& config() const { return config_; }
    const TcamTable& table() const { return *table_; }
    const PointSet& points() const { return points_; }

    /// Radius tested by level i (1-based).
    double level_scale(std::size_t i) const {
        return config_.r0 * std::pow(config_.c, (double(i) - 1.0) / 2.0);
    }

    struct Result {
        std::uint64_t id = 0;
        double distance = 0.0;
        std::size_t level = 0; // 1-based level that produced the hit
    };

    /// Scan levels from the smallest radius up; within a level, report the
    /// first candidate verified within l_i * sqrt(c).
    std::optional<Result> query(const double* q) const {
        const std::size_t n = points_.size();
        for (std::size_t i = 1; i <= m_; ++i) {
            double accept = level_scale(i) * std::sqrt(config_.c);
            TernaryWord probe = level_word(i, q);
            for (const TcamMatch& m : table_->lookup_all(probe, (i - 1) * n, i * n)) {
                double d = euclidean(points_[m.payload], q, points_.dim());
                if (d <= accept) return Result{m.payload, d, i};
            }
        }
        return std::nullopt;
    }

    std::optional<Result> query(const std::vector<double>& q) const {
        if (q.size() != points_.dim())
            throw std::invalid_argument("LadderIndex: dimension mismatch");
        return query(q.data());
    }

    void save(std::ostream& out) const {
        out.write(kMagic, 8);
        nlohmann::json header = {{"format", 1},
                                 {"c", config_.c},
                                 {"r0", config_.r0},
                                 {"rmax", config_.rmax},
                                 {"eps", config_.eps},
                                 {"width", config_.width},
                                 {"mode", bound_mode_name(config_.mode)},
                                 {"seed", seed_},
                                 {"dim", points_.dim()},
                                 {"levels", m_},
                                 {"delta", delta_},
                                 {"w", w_}};
        std::string bytes = header.dump();
        write_u64(out, bytes.size());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        table_->dump(out);
        points_.write_binary(out);
    }

    static LadderIndex load(std::istream& in) {
        char magic[8];
        in.read(magic, 8);
        if (in.gcount() != 8 || std::string(magic, 8) != kMagic)
            throw std::runtime_error("LadderIndex: bad magic");
        std::uint64_t len = read_u64(in);
        std::string bytes(static_cast<std::size_t>(len), '\0');
        in.read(bytes.data(), static_cast<std::streamsize>(len));
        if (in.gcount() != static_cast<std::streamsize>(len))
            throw std::runtime_error("LadderIndex: truncated header");
        nlohmann::json header = nlohmann::json::parse(bytes);
        if (header.at("format").get<int>() != 1)
            throw std::runtime_error("LadderIndex: unsupported container format");
        LadderIndex idx;
        idx.config_.c = header.at("c").get<double>();
        idx.config_.r0 = header.at("r0").get<double>();
        idx.config_.rmax = header.at("rmax").get<double>();
        idx.config_.eps = header.at("eps").get<double>();
        idx.config_.width = header.at("width").get<std::size_t>();
        idx.config_.mode = bound_mode_from_name(header.at("mode").get<std::string>());
        idx.seed_ = header.at("seed").get<std::uint64_t>();
        idx.m_ = header.at("levels").get<std::size_t>();
        idx.delta_ = header.at("delta").get<double>();
        idx.w_ = header.at("w").get<std::size_t>();
        idx.prefix_ = version_prefix_width(idx.m_);
        idx.table_.emplace(TcamTable::load(in));
        idx.points_ = PointSet::read_binary(in);
        if (header.at("dim").get<std::size_t>() != idx.points_.dim())
            throw std::runtime_error("LadderIndex: header dim differs from stored points");
        if (idx.table_->width() != idx.prefix_ + idx.w_)
            throw std::runtime_error("LadderIndex: table width differs from header");
        if (idx.table_->size() != idx.m_ * idx.points_.size())
            throw std::runtime_error("LadderIndex: table size differs from header");
        idx.make_schemes();
        return idx;
    }

  private:
    LadderIndex() = default;

    void make_schemes() {
        schemes_.clear();
        schemes_.reserve(m_);
        for (std::size_t i = 1; i <= m_; ++i)
            schemes_.emplace_back(points_.dim(), w_, delta_ * level_scale(i),
                                  derive_seed(seed_, i - 1));
    }

    void build(unsigned threads) {
        make_schemes();
        table_.emplace(prefix_ + w_);
        const std::size_t n = points_.size();
        for (std::size_t i = 1; i <= m_; ++i) {
            std::vector<TernaryWord> words(n, TernaryWord(table_->width()));
            parallel_for(0, n, threads, [&](std::size_t j) {
                words[j] = level_word(i, points_[j]);
            });
            for (std::size_t j = 0; j < n; ++j) table_->program(words[j], j);
        }
        table_->freeze();
    }

    /// Level prefix (the 0-based level index in binary), then the level's
    /// signature of x.
    TernaryWord level_word(std::size_t i, const double* x) const {
        TernaryWord word(prefix_ + w_);
        std::size_t tag = i - 1;
        for (std::size_t p = 0; p < prefix_; ++p)
            word.set(p, (tag >> p) & 1 ? Ternion::One : Ternion::Zero);
        const SignatureScheme& scheme = schemes_[i - 1];
        for (std::size_t j = 0; j < w_; ++j)
            word.set(prefix_ + j, scheme.function(j).label(x));
        return word;
    }

    static constexpr const char kMagic[9] = "TLSHLAD1";

    static void write_u64(std::ostream& out, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    static std::uint64_t read_u64(std::istream& in) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            int byte = in.get();
            if (byte == std::istream::traits_type::eof())
                throw std::runtime_error("LadderIndex: truncated stream");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(byte)) << (8 * i);
        }
        return v;
    }

    PointSet points_;
    LadderConfig config_;
    std::uint64_t seed_ = 0;
    std::size_t m_ = 0;
    double delta_ = 0.0;
    std::size_t w_ = 0;
    std::size_t prefix_ = 0;
    std::vector<SignatureScheme> schemes_;
    std::optional<TcamTable> table_;
};

} // namespace tlsh
