#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "points.hpp"
#include "rng.hpp"

namespace tlsh {

/// Side length convention for the synthetic cube: points are uniform in
/// [-2/sqrt(d), +2/sqrt(d)]^d, so the cube's diameter stays 4 regardless of
/// dimension and radii near 1 are meaningful at every d.
inline double cube_half_extent(std::size_t d) { return 2.0 / std::sqrt(double(d)); }

/// n points uniform in [lo, hi]^d, drawn row by row from one generator
/// seeded with `seed` (coordinate order is the byte-for-byte contract).
inline PointSet gen_uniform_box(std::size_t n, std::size_t d, double lo, double hi,
                                std::uint64_t seed) {
    if (d == 0) throw std::invalid_argument("gen_uniform_box: d must be positive");
    if (!(hi > lo)) throw std::invalid_argument("gen_uniform_box: need lo < hi");
    PointSet ps(n, d);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) ps[i][j] = rng.uniform(lo, hi);
    return ps;
}

/// n points uniform in the standard cube for dimension d.
inline PointSet gen_random_cube(std::size_t n, std::size_t d, std::uint64_t seed) {
    double h = cube_half_extent(d);
    return gen_uniform_box(n, d, -h, h, seed);
}

/// Write a uniformly random direction times `radius`, centered at `center`,
/// into out[0..d). Consumes exactly d normal draws.
inline void sphere_point(Rng& rng, const double* center, double radius, std::size_t d,
                         double* out) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        out[j] = rng.normal();
        norm2 += out[j] * out[j];
    }
    double inv = radius / std::sqrt(norm2);
    for (std::size_t j = 0; j < d; ++j) out[j] = center[j] + out[j] * inv;
}

/// Queries against a cube dataset: the first half sit exactly at distance l
/// from a random data point (so each has a planted neighbor), the second
/// half are uniform cube points. Query q draws from derive_seed(seed, q):
/// planted queries consume one index draw then d normals, uniform queries
/// consume d uniform draws.
inline PointSet gen_queries(const PointSet& data, std::size_t count, double l,
                            std::uint64_t seed) {
    if (data.empty()) throw std::invalid_argument("gen_queries: empty data set");
    if (!(l > 0.0)) throw std::invalid_argument("gen_queries: l must be positive");
    const std::size_t d = data.dim();
    const double h = cube_half_extent(d);
    PointSet qs(count, d);
    std::size_t planted = (count + 1) / 2;
    for (std::size_t q = 0; q < count; ++q) {
        Rng rng(derive_seed(seed, q));
        if (q < planted) {
            std::size_t anchor = static_cast<std::size_t>(rng.below(data.size()));
            sphere_point(rng, data[anchor], l, d, qs[q]);
        } else {
            for (std::size_t j = 0; j < d; ++j) qs[q][j] = rng.uniform(-h, h);
        }
    }
    return qs;
}

/// A two-shell benchmark with exact distances: every query gets its own
/// fresh point cloud, half on the sphere of radius l around the query and
/// half on the sphere of radius c*l. Clouds are regenerated on demand from
/// derived seeds, so nothing needs to be stored.
struct ThresholdConfig {
    std::size_t n = 0;       // points per query cloud (half near, half far)
    std::size_t d = 0;
    double l = 1.0;          // near-shell radius
    double c = 2.0;          // far shell sits at c*l
    std::size_t queries = 0;
    std::uint64_t seed = 0;
};

namespace detail {
// Tag offset separating per-query streams from other users of the same seed.
inline constexpr std::uint64_t kThresholdQueryTag = 1ull << 32;
} // namespace detail

/// The query point of cloud q: uniform in the standard cube.
inline std::vector<double> threshold_query(const ThresholdConfig& cfg, std::size_t q) {
    Rng rng(derive_seed(cfg.seed, detail::kThresholdQueryTag + q));
    const double h = cube_half_extent(cfg.d);
    std::vector<double> out(cfg.d);
    for (std::size_t j = 0; j < cfg.d; ++j) out[j] = rng.uniform(-h, h);
    return out;
}

/// Stream cloud q in generation order: first the floor(n/2) near points at
/// radius l, then the remaining far points at radius c*l. fn receives each
/// point and whether it is near. The stream continues the generator that
/// produced the query point, so regeneration is exact.
template <typename F>
void for_each_threshold_point(const ThresholdConfig& cfg, std::size_t q, F&& fn) {
    Rng rng(derive_seed(cfg.seed, detail::kThresholdQueryTag + q));
    const double h = cube_half_extent(cfg.d);
    std::vector<double> center(cfg.d), point(cfg.d);
    for (std::size_t j = 0; j < cfg.d; ++j) center[j] = rng.uniform(-h, h);
    std::size_t near = cfg.n / 2;
    for (std::size_t i = 0; i < cfg.n; ++i) {
        double radius = i < near ? cfg.l : cfg.c * cfg.l;
        sphere_point(rng, center.data(), radius, cfg.d, point.data());
        fn(point.data(), i < near);
    }
}

/// Materialize cloud q as a point set (near points first).
inline PointSet threshold_cloud(const ThresholdConfig& cfg, std::size_t q) {
    PointSet ps(cfg.n, cfg.d);
    std::size_t i = 0;
    for_each_threshold_point(cfg, q, [&](const double* p, bool) {
        for (std::size_t j = 0; j < cfg.d; ++j) ps[i][j] = p[j];
        ++i;
    });
    return ps;
}

/// Weighted token features, one "token:weight" pair per line; a bare token
/// line means weight 1.
using FeatureVec = std::vector<std::pair<std::string, double>>;

inline FeatureVec read_features(std::istream& in) {
    FeatureVec features;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto colon = line.rfind(':');
        if (colon == std::string::npos) {
            features.emplace_back(line, 1.0);
        } else {
            features.emplace_back(line.substr(0, colon), std::stod(line.substr(colon + 1)));
        }
    }
    return features;
}

namespace detail {
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}
} // namespace detail

/// Sign-based embedding of a weighted feature set onto the scaled hypercube
/// {-scale/sqrt(bits), +scale/sqrt(bits)}^bits: coordinate j takes the sign
/// of the weight sum of the tokens, each token contributing +-1 per
/// coordinate from its hashed bit stream. Every embedding has norm `scale`,
/// and flipping k coordinates moves a point by exactly 2*scale*sqrt(k/bits),
/// which makes distances controllable for benchmarks.
inline std::vector<double> simhash_embed(const FeatureVec& features, std::size_t bits,
                                         double scale) {
    if (bits == 0) throw std::invalid_argument("simhash_embed: bits must be positive");
    if (!(scale > 0.0)) throw std::invalid_argument("simhash_embed: scale must be positive");
    std::vector<double> acc(bits, 0.0);
    for (const auto& [token, weight] : features) {
        std::uint64_t base = detail::fnv1a(token);
        for (std::size_t j = 0; j < bits; ++j) {
            bool bit = derive_seed(base, j) & 1;
            acc[j] += bit ? weight : -weight;
        }
    }
    double unit = scale / std::sqrt(double(bits));
    for (double& v : acc) v = v >= 0.0 ? unit : -unit;
    return acc;
}

/// Negate k distinct random coordinates; on a simhash embedding this moves
/// the point by exactly 2*scale*sqrt(k/bits).
inline std::vector<double> flip_coords(const std::vector<double>& x, std::size_t k, Rng& rng) {
    if (k > x.size()) throw std::invalid_argument("flip_coords: k exceeds dimension");
    std::vector<double> out = x;
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t pick = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[pick]);
        out[idx[i]] = -out[idx[i]];
    }
    return out;
}

} // namespace tlsh
