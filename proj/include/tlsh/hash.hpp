#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "rng.hpp"
#include "ternary.hpp"

namespace tlsh {

/// One random ternary hash g_{a,b}: project onto a, shift by b, cut the line
/// into cells of width delta, and label the cell index j mod 4 as
/// Zero (j=0), One (j=2) or Star (j=1,3). Adjacent cells always share a
/// matching label, which is what makes near points collide.
struct TernaryHashFunction {
    std::vector<double> a; // i.i.d. standard normal directions
    double b = 0.0;        // offset, uniform in [0, 2*delta)
    double delta = 1.0;    // cell width

    Ternion label(const double* x) const {
        double dot = b;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * x[i];
        double cell = std::floor(dot / delta);
        auto j = static_cast<std::int64_t>(cell);
        switch (((j % 4) + 4) % 4) {
            case 0: return Ternion::Zero;
            case 2: return Ternion::One;
            default: return Ternion::Star;
        }
    }

    Ternion label(const std::vector<double>& x) const {
        if (x.size() != a.size())
            throw std::invalid_argument("TernaryHashFunction: dimension mismatch");
        return label(x.data());
    }
};

/// A reproducible bank of w ternary hash functions over R^d. Function i is
/// regenerated from derive_seed(seed, i), drawing its d normal directions
/// first and the offset last; the offset is a unit uniform scaled by
/// 2*delta, so two schemes that differ only in delta share their random
/// directions (common random numbers across a delta sweep).
class SignatureScheme {
  public:
    SignatureScheme(std::size_t d, std::size_t w, double delta, std::uint64_t seed)
        : d_(d), w_(w), delta_(delta), seed_(seed) {
        if (d == 0) throw std::invalid_argument("SignatureScheme: d must be positive");
        if (w == 0) throw std::invalid_argument("SignatureScheme: w must be positive");
        if (!(delta > 0.0)) throw std::invalid_argument("SignatureScheme: delta must be positive");
        funcs_.resize(w);
        for (std::size_t i = 0; i < w; ++i) {
            Rng rng(derive_seed(seed, i));
            auto& f = funcs_[i];
            f.delta = delta;
            f.a.resize(d);
            for (std::size_t j = 0; j < d; ++j) f.a[j] = rng.normal();
            f.b = rng.uniform01() * 2.0 * delta;
        }
    }

    std::size_t dim() const { return d_; }
    std::size_t width() const { return w_; }
    double delta() const { return delta_; }
    std::uint64_t seed() const { return seed_; }
    const TernaryHashFunction& function(std::size_t i) const { return funcs_.at(i); }

    /// Ternary signature of a point: one ternion per hash function.
    TernaryWord signature(const double* x) const {
        TernaryWord word(w_);
        for (std::size_t i = 0; i < w_; ++i) word.set(i, funcs_[i].label(x));
        return word;
    }

    TernaryWord signature(const std::vector<double>& x) const {
        if (x.size() != d_)
            throw std::invalid_argument("SignatureScheme: dimension mismatch");
        return signature(x.data());
    }

    nlohmann::json to_json() const {
        return {{"d", d_}, {"w", w_}, {"delta", delta_}, {"seed", seed_}};
    }

    static SignatureScheme from_json(const nlohmann::json& j) {
        return SignatureScheme(j.at("d").get<std::size_t>(), j.at("w").get<std::size_t>(),
                               j.at("delta").get<double>(), j.at("seed").get<std::uint64_t>());
    }

  private:
    std::size_t d_;
    std::size_t w_;
    double delta_;
    std::uint64_t seed_;
    std::vector<TernaryHashFunction> funcs_;
};

} // namespace tlsh
