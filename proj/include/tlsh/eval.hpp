#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "datagen.hpp"
#include "hash.hpp"
#include "parallel.hpp"
#include "points.hpp"
#include "prob.hpp"
#include "rng.hpp"
#include "tcam.hpp"
#include "ternary.hpp"

namespace tlsh {

/// Observed and model-predicted quality of one (delta, w) operating point.
/// Pairs are classified by true distance: relevant within l, far beyond c*l,
/// and a thin guard band around each boundary keeps floating-point ties out
/// of both classes. Points between the shells are ignored entirely.
/// fn_rate is query-level: among queries having at least one relevant point,
/// the fraction whose lookup matched none of them. fp_per_query counts far
/// matches per query. precision/recall/f1 are pair-level micro-averages.
struct MetricsRow {
    std::size_t w = 0;
    double delta = 0.0;
    std::size_t queries = 0;
    double fn_rate = 0.0;
    double fp_per_query = 0.0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 0.0;
    double mean_relevant = 0.0;
    double mean_far = 0.0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    double model_fn_rate = 0.0;
    double model_fp_per_query = 0.0;
    double model_precision = 1.0;
    double model_recall = 1.0;
};

/// Analytic prediction for an operating point from the exact per-ternion
/// collision probabilities: a relevant pair (distance <= l, modeled at
/// exactly l) survives all w ternions with p_near = Psi(1)^w in l-normalized
/// units, a far pair with p_far = Psi(c)^w. With n1 relevant and n2 far
/// points per query:
///   fn_rate ~ (1 - p_near)^n1, fp_per_query ~ n2 p_far,
///   recall ~ p_near, precision ~ n1 p_near / (n1 p_near + n2 p_far).
/// Far points are modeled at exactly c*l, their closest admissible distance,
/// so the false-positive prediction is sharp on shell benchmarks and an
/// overestimate when the far mass sits farther out (as in a uniform cube).
struct ModelPrediction {
    double p_near = 0.0;
    double p_far = 0.0;
    double fn_rate = 0.0;
    double fp_per_query = 0.0;
    double precision = 1.0;
    double recall = 0.0;
};

inline ModelPrediction model_predict(double delta, std::size_t w, double c, double n1,
                                     double n2) {
    ModelPrediction m;
    m.p_near = std::pow(collision_prob(1.0, delta), double(w));
    m.p_far = std::pow(collision_prob(c, delta), double(w));
    m.fn_rate = n1 > 0.0 ? std::pow(1.0 - m.p_near, n1) : 0.0;
    m.fp_per_query = n2 * m.p_far;
    m.recall = m.p_near;
    double etp = n1 * m.p_near;
    double efp = m.fp_per_query;
    m.precision = etp + efp > 0.0 ? etp / (etp + efp) : 1.0;
    return m;
}

namespace detail {

inline constexpr double kBandGuard = 1e-9;

inline std::size_t sorted_overlap(const std::vector<std::uint64_t>& a,
                                  const std::vector<std::uint64_t>& b) {
    std::size_t count = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else ++count, ++i, ++j;
    }
    return count;
}

inline void finish_row(MetricsRow& row, double c) {
    double p = row.tp + row.fp > 0 ? double(row.tp) / double(row.tp + row.fp) : 1.0;
    double r = row.tp + row.fn > 0 ? double(row.tp) / double(row.tp + row.fn) : 1.0;
    row.precision = p;
    row.recall = r;
    row.f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    ModelPrediction m = model_predict(row.delta, row.w, c, row.mean_relevant, row.mean_far);
    row.model_fn_rate = m.fn_rate;
    row.model_fp_per_query = m.fp_per_query;
    row.model_precision = m.precision;
    row.model_recall = m.recall;
}

} // namespace detail

/// Ground truth for one dataset/query-set pair, computed once and reused
/// across every (delta, w) evaluated against it. Per query it stores the
/// relevant ids (distance <= l) and the ids excluded from the far class
/// (distance < c*l, i.e. relevant plus the in-between band); everything
/// else is far, so the far class never needs materializing.
class EvalContext {
  public:
    EvalContext(const PointSet& points, const PointSet& queries, double l, double c,
                unsigned threads = 0)
        : points_(points), queries_(queries), l_(l), c_(c) {
        if (points.dim() != queries.dim())
            throw std::invalid_argument("EvalContext: dimension mismatch");
        if (!(l > 0.0) || !(c > 1.0))
            throw std::invalid_argument("EvalContext: need l > 0 and c > 1");
        const std::size_t nq = queries.size();
        relevant_.resize(nq);
        excluded_.resize(nq);
        parallel_for(0, nq, threads, [&](std::size_t q) {
            double near_cut = l * (1.0 + detail::kBandGuard);
            double far_cut = c * l * (1.0 - detail::kBandGuard);
            for (std::size_t i = 0; i < points.size(); ++i) {
                double d = euclidean(points[i], queries[q], points.dim());
                if (d < far_cut) {
                    excluded_[q].push_back(i);
                    if (d <= near_cut) relevant_[q].push_back(i);
                }
            }
        });
        // mean_relevant conditions on queries that have any relevant point,
        // matching the denominator of fn_rate (uniform queries with nothing
        // nearby would otherwise drag the model's miss exponent toward 0).
        double rel = 0.0, excl = 0.0;
        std::size_t with_relevant = 0;
        for (std::size_t q = 0; q < nq; ++q) {
            if (!relevant_[q].empty()) {
                rel += double(relevant_[q].size());
                ++with_relevant;
            }
            excl += double(excluded_[q].size());
        }
        mean_relevant_ = with_relevant ? rel / double(with_relevant) : 0.0;
        mean_far_ = nq ? double(points.size()) - excl / double(nq) : 0.0;
    }

    const PointSet& points() const { return points_; }
    const PointSet& queries() const { return queries_; }
    double l() const { return l_; }
    double c() const { return c_; }
    double mean_relevant() const { return mean_relevant_; }
    double mean_far() const { return mean_far_; }
    const std::vector<std::uint64_t>& relevant(std::size_t q) const { return relevant_.at(q); }

    /// Evaluate one operating point: hash everything with cell width
    /// delta * l (delta is expressed in units of the query radius), collect
    /// raw ternary matches per query, and score them against ground truth.
    /// The scheme seed is fixed, so sweeping delta reuses the same random
    /// directions (common random numbers).
    MetricsRow evaluate(double delta, std::size_t w, std::uint64_t seed,
                        unsigned threads = 0) const {
        SignatureScheme scheme(points_.dim(), w, delta * l_, seed);
        const std::size_t n = points_.size();
        const std::size_t nq = queries_.size();

        std::vector<TernaryWord> sigs(n, TernaryWord(w));
        parallel_for(0, n, threads, [&](std::size_t i) {
            sigs[i] = scheme.signature(points_[i]);
        });
        TcamTable table(w);
        for (std::size_t i = 0; i < n; ++i) table.program(sigs[i], i);
        table.freeze();

        std::vector<std::uint64_t> tp_q(nq), fp_q(nq);
        std::vector<std::uint8_t> miss_q(nq, 0);
        parallel_for(0, nq, threads, [&](std::size_t q) {
            TernaryWord probe = scheme.signature(queries_[q]);
            std::vector<std::uint64_t> matched;
            for (const TcamMatch& m : table.lookup_all(probe)) matched.push_back(m.payload);
            std::size_t tp = detail::sorted_overlap(matched, relevant_[q]);
            std::size_t excl = detail::sorted_overlap(matched, excluded_[q]);
            tp_q[q] = tp;
            fp_q[q] = matched.size() - excl;
            miss_q[q] = !relevant_[q].empty() && tp == 0;
        });

        MetricsRow row;
        row.w = w;
        row.delta = delta;
        row.queries = nq;
        row.mean_relevant = mean_relevant_;
        row.mean_far = mean_far_;
        std::uint64_t misses = 0, with_relevant = 0, rel_total = 0;
        for (std::size_t q = 0; q < nq; ++q) {
            row.tp += tp_q[q];
            row.fp += fp_q[q];
            rel_total += relevant_[q].size();
            if (!relevant_[q].empty()) {
                ++with_relevant;
                misses += miss_q[q];
            }
        }
        row.fn = rel_total - row.tp;
        row.fn_rate = with_relevant ? double(misses) / double(with_relevant) : 0.0;
        row.fp_per_query = nq ? double(row.fp) / double(nq) : 0.0;
        detail::finish_row(row, c_);
        return row;
    }

  private:
    const PointSet& points_;
    const PointSet& queries_;
    double l_;
    double c_;
    double mean_relevant_ = 0.0;
    double mean_far_ = 0.0;
    std::vector<std::vector<std::uint64_t>> relevant_;
    std::vector<std::vector<std::uint64_t>> excluded_;
};

/// Evaluate one operating point against the two-shell benchmark without
/// materializing anything: each query's cloud streams past its signature,
/// and a point counts as matched when every ternion agrees. Distances are
/// exact by construction (n/2 points at l, the rest at c*l), which makes
/// this the sharpest test of the analytic model.
inline MetricsRow evaluate_threshold(const ThresholdConfig& cfg, double delta, std::size_t w,
                                     unsigned threads = 0) {
    if (cfg.n == 0 || cfg.d == 0 || cfg.queries == 0)
        throw std::invalid_argument("evaluate_threshold: empty configuration");
    SignatureScheme scheme(cfg.d, w, delta * cfg.l, cfg.seed);
    const std::size_t near_n = cfg.n / 2;
    const std::size_t far_n = cfg.n - near_n;

    std::vector<std::uint64_t> tp_q(cfg.queries), fp_q(cfg.queries);
    parallel_for(0, cfg.queries, threads, [&](std::size_t q) {
        std::vector<double> center = threshold_query(cfg, q);
        TernaryWord probe = scheme.signature(center);
        std::vector<Ternion> probe_labels(w);
        for (std::size_t i = 0; i < w; ++i) probe_labels[i] = probe.get(i);
        std::uint64_t tp = 0, fp = 0;
        for_each_threshold_point(cfg, q, [&](const double* p, bool near) {
            bool match = true;
            for (std::size_t i = 0; i < w; ++i) {
                if (!ternion_match(probe_labels[i], scheme.function(i).label(p))) {
                    match = false;
                    break;
                }
            }
            if (match) (near ? tp : fp) += 1;
        });
        tp_q[q] = tp;
        fp_q[q] = fp;
    });

    MetricsRow row;
    row.w = w;
    row.delta = delta;
    row.queries = cfg.queries;
    row.mean_relevant = double(near_n);
    row.mean_far = double(far_n);
    std::uint64_t misses = 0;
    for (std::size_t q = 0; q < cfg.queries; ++q) {
        row.tp += tp_q[q];
        row.fp += fp_q[q];
        if (tp_q[q] == 0) ++misses;
    }
    row.fn = std::uint64_t(near_n) * cfg.queries - row.tp;
    row.fn_rate = double(misses) / double(cfg.queries);
    row.fp_per_query = double(row.fp) / double(cfg.queries);
    detail::finish_row(row, cfg.c);
    return row;
}

/// Evaluate a grid of operating points (every width crossed with every
/// delta), rows ordered width-major.
inline std::vector<MetricsRow> sweep_delta(const EvalContext& ctx,
                                           const std::vector<std::size_t>& widths,
                                           const std::vector<double>& deltas,
                                           std::uint64_t seed, unsigned threads = 0) {
    std::vector<MetricsRow> rows;
    rows.reserve(widths.size() * deltas.size());
    for (std::size_t w : widths)
        for (double delta : deltas) rows.push_back(ctx.evaluate(delta, w, seed, threads));
    return rows;
}

/// What find_delta_opt optimizes over delta at fixed width.
enum class DeltaObjective {
    MinFpGivenFn, // smallest false-positive load subject to fn_rate <= budget
    MaxF1,        // best pair-level F score
};

struct DeltaOptResult {
    MetricsRow row;
    bool satisfied = false; // MinFpGivenFn: whether any delta met the budget
};

/// Tune delta at fixed width against a ground-truth context.
///
/// Growing delta widens the hash cells, so misses (fn) fall and false
/// positives rise monotonically apart from sampling noise. MinFpGivenFn
/// therefore wants the smallest compliant delta: scan the grid upward until
/// compliance, then bisect the bracketing interval. MaxF1 evaluates the
/// whole grid and refines around the best point by golden-section search.
/// Every evaluation shares one scheme seed, so the search surface is
/// deterministic.
inline DeltaOptResult find_delta_opt(const EvalContext& ctx, std::size_t w,
                                     std::uint64_t seed, DeltaObjective objective,
                                     double fn_budget, const std::vector<double>& grid,
                                     unsigned threads = 0) {
    if (grid.size() < 2) throw std::invalid_argument("find_delta_opt: grid too small");
    DeltaOptResult result;

    if (objective == DeltaObjective::MinFpGivenFn) {
        double lo = grid.front();
        bool found = false;
        for (double delta : grid) {
            MetricsRow row = ctx.evaluate(delta, w, seed, threads);
            if (row.fn_rate <= fn_budget) {
                result.row = row;
                found = true;
                break;
            }
            lo = delta;
        }
        if (!found) {
            result.row = ctx.evaluate(grid.back(), w, seed, threads);
            return result;
        }
        result.satisfied = true;
        double hi = result.row.delta;
        for (int i = 0; i < 8 && hi - lo > 1e-3; ++i) {
            double mid = 0.5 * (lo + hi);
            MetricsRow row = ctx.evaluate(mid, w, seed, threads);
            if (row.fn_rate <= fn_budget) {
                hi = mid;
                result.row = row;
            } else {
                lo = mid;
            }
        }
        return result;
    }

    std::size_t best = 0;
    std::vector<MetricsRow> rows;
    for (double delta : grid) rows.push_back(ctx.evaluate(delta, w, seed, threads));
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].f1 > rows[best].f1) best = i;
    result.row = rows[best];
    result.satisfied = true;

    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    constexpr double kInvPhi = 0.6180339887498949;
    double a = hi - kInvPhi * (hi - lo), b = lo + kInvPhi * (hi - lo);
    MetricsRow ra = ctx.evaluate(a, w, seed, threads);
    MetricsRow rb = ctx.evaluate(b, w, seed, threads);
    for (int i = 0; i < 10; ++i) {
        if (ra.f1 > result.row.f1) result.row = ra;
        if (rb.f1 > result.row.f1) result.row = rb;
        if (ra.f1 >= rb.f1) {
            hi = b;
            b = a;
            rb = ra;
            a = hi - kInvPhi * (hi - lo);
            ra = ctx.evaluate(a, w, seed, threads);
        } else {
            lo = a;
            a = b;
            ra = rb;
            b = lo + kInvPhi * (hi - lo);
            rb = ctx.evaluate(b, w, seed, threads);
        }
    }
    if (ra.f1 > result.row.f1) result.row = ra;
    if (rb.f1 > result.row.f1) result.row = rb;
    return result;
}

/// Default delta grid for tuning and sweeps, in units of the query radius.
inline std::vector<double> default_delta_grid() {
    std::vector<double> grid;
    for (double d = 1.75; d <= 5.01; d += 0.25) grid.push_back(d);
    return grid;
}

/// Default width grid for sweeps.
inline std::vector<std::size_t> default_width_grid() {
    return {32, 64, 96, 128, 144, 160, 192, 224, 256, 288, 320};
}

inline nlohmann::json to_json(const MetricsRow& r) {
    return {{"w", r.w},
            {"delta", r.delta},
            {"queries", r.queries},
            {"fn_rate", r.fn_rate},
            {"fp_per_query", r.fp_per_query},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"mean_relevant", r.mean_relevant},
            {"mean_far", r.mean_far},
            {"tp", r.tp},
            {"fp", r.fp},
            {"fn", r.fn},
            {"model_fn_rate", r.model_fn_rate},
            {"model_fp_per_query", r.model_fp_per_query},
            {"model_precision", r.model_precision},
            {"model_recall", r.model_recall}};
}

inline void write_metrics_csv_header(std::ostream& out) {
    out << "w,delta,queries,fn_rate,fp_per_query,precision,recall,f1,mean_relevant,"
           "mean_far,tp,fp,fn,model_fn_rate,model_fp_per_query,model_precision,"
           "model_recall\n";
}

inline void write_metrics_csv_row(std::ostream& out, const MetricsRow& r) {
    out.precision(12);
    out << r.w << ',' << r.delta << ',' << r.queries << ',' << r.fn_rate << ','
        << r.fp_per_query << ',' << r.precision << ',' << r.recall << ',' << r.f1 << ','
        << r.mean_relevant << ',' << r.mean_far << ',' << r.tp << ',' << r.fp << ',' << r.fn
        << ',' << r.model_fn_rate << ',' << r.model_fp_per_query << ',' << r.model_precision
        << ',' << r.model_recall << '\n';
}

} // namespace tlsh
