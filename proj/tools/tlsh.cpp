// Command-line front end: planning, data generation, index build/query,
// parameter sweeps, the analytic model, tuning, and micro-benchmarks.
// Data goes to stdout or --out; diagnostics go to stderr.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <tlsh/tlsh.hpp>

namespace {

using nlohmann::json;

tlsh::PointSet read_points(const std::string& path, const std::string& format) {
    if (path == "-") {
        return format == "csv" ? tlsh::PointSet::read_csv(std::cin)
                               : tlsh::PointSet::read_binary(std::cin);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return format == "csv" ? tlsh::PointSet::read_csv(in) : tlsh::PointSet::read_binary(in);
}

void write_points(const tlsh::PointSet& ps, const std::string& path,
                  const std::string& format) {
    auto emit = [&](std::ostream& out) {
        format == "csv" ? ps.write_csv(out) : ps.write_binary(out);
    };
    if (path == "-") {
        emit(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    emit(out);
}

std::vector<double> parse_point(const std::string& csv) {
    std::vector<double> p;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) p.push_back(std::stod(cell));
    return p;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path);
    return file;
}

struct Common {
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

void add_common(CLI::App* sub, Common& common) {
    sub->add_option("--seed", common.seed, "Master random seed")->envname("TLSH_SEED");
    sub->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
}

json model_json(double delta, std::size_t w, double c, const tlsh::ModelPrediction& m) {
    return {{"delta", delta},
            {"w", w},
            {"c", c},
            {"p_near", m.p_near},
            {"p_far", m.p_far},
            {"fn_rate", m.fn_rate},
            {"fp_per_query", m.fp_per_query},
            {"precision", m.precision},
            {"recall", m.recall}};
}

int run(int argc, char** argv) {
    CLI::App app{"Ternary locality sensitive hashing over a simulated ternary CAM"};
    app.require_subcommand(1);
    Common common;

    // plan ------------------------------------------------------------
    auto* plan_cmd = app.add_subcommand("plan", "Pick (delta, w) for a target instance");
    std::size_t plan_n = 0;
    double plan_c = 2.0, plan_eps = 0.1, plan_k = 0.0;
    std::string plan_mode = "single", plan_bounds = "tight";
    plan_cmd->add_option("--n", plan_n, "Number of data points")->required();
    plan_cmd->add_option("--c", plan_c, "Approximation factor (> 1)");
    plan_cmd->add_option("--eps", plan_eps, "Failure probability budget");
    plan_cmd->add_option("--mode", plan_mode, "single, multi, or logw")
        ->check(CLI::IsMember({"single", "multi", "logw"}));
    plan_cmd->add_option("--bounds", plan_bounds, "simple or tight closed-form bounds")
        ->check(CLI::IsMember({"simple", "tight"}));
    plan_cmd->add_option("--k", plan_k, "Per-distance budget (logw mode)");

    // gen -------------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("gen", "Generate synthetic points and queries");
    add_common(gen_cmd, common);
    std::string gen_kind = "cube", gen_out = "-", gen_format = "bin";
    std::string gen_data, gen_features = "-", gen_what = "cloud";
    std::size_t gen_n = 1000, gen_d = 16, gen_count = 100, gen_bits = 64, gen_flips = 0;
    std::size_t gen_cloud = 0;
    double gen_l = 0.5, gen_c = 2.0, gen_scale = 1.0;
    gen_cmd->add_option("--kind", gen_kind, "cube, queries, threshold, or simhash")
        ->check(CLI::IsMember({"cube", "queries", "threshold", "simhash"}));
    gen_cmd->add_option("--out", gen_out, "Output path (- for stdout)");
    gen_cmd->add_option("--format", gen_format, "bin or csv")
        ->check(CLI::IsMember({"bin", "csv"}));
    gen_cmd->add_option("--n", gen_n, "Points to generate (cube, threshold)");
    gen_cmd->add_option("--d", gen_d, "Dimension (cube, threshold)");
    gen_cmd->add_option("--data", gen_data, "Data points file (queries)");
    gen_cmd->add_option("--count", gen_count, "Number of queries (queries)");
    gen_cmd->add_option("--l", gen_l, "Planted radius (queries) / near radius (threshold)");
    gen_cmd->add_option("--c", gen_c, "Far-shell factor (threshold)");
    gen_cmd->add_option("--cloud", gen_cloud, "Cloud index (threshold)");
    gen_cmd->add_option("--what", gen_what, "cloud or query (threshold)")
        ->check(CLI::IsMember({"cloud", "query"}));
    gen_cmd->add_option("--features", gen_features, "token:weight file, - for stdin (simhash)");
    gen_cmd->add_option("--bits", gen_bits, "Embedding dimension (simhash)");
    gen_cmd->add_option("--scale", gen_scale, "Embedding norm (simhash)");
    gen_cmd->add_option("--flips", gen_flips, "Coordinates to negate (simhash)");

    // build -----------------------------------------------------------
    auto* build_cmd = app.add_subcommand("build", "Build an index container");
    add_common(build_cmd, common);
    std::string build_data, build_out, build_format = "bin", build_kind = "nn";
    std::string build_mode = "single", build_bounds = "tight";
    double build_c = 2.0, build_eps = 0.1, build_scale = 1.0, build_delta = 0.0;
    double build_r0 = 1.0, build_rmax = 1.0;
    std::size_t build_w = 0, build_repeats = 1, build_width = 0;
    std::size_t build_max_entries = 0, build_max_width = 0;
    build_cmd->add_option("--data", build_data, "Point set to index")->required();
    build_cmd->add_option("--format", build_format, "Point file format")
        ->check(CLI::IsMember({"bin", "csv"}));
    build_cmd->add_option("--out", build_out, "Container output path")->required();
    build_cmd->add_option("--kind", build_kind, "nn or ladder")
        ->check(CLI::IsMember({"nn", "ladder"}));
    build_cmd->add_option("--c", build_c, "Approximation factor");
    build_cmd->add_option("--eps", build_eps, "Failure probability budget");
    build_cmd->add_option("--scale", build_scale, "Query radius r (nn)");
    build_cmd->add_option("--mode", build_mode, "single or multi lookup plan (nn)")
        ->check(CLI::IsMember({"single", "multi"}));
    build_cmd->add_option("--bounds", build_bounds, "simple or tight")
        ->check(CLI::IsMember({"simple", "tight"}));
    build_cmd->add_option("--w", build_w, "Explicit width (skips the planner)");
    build_cmd->add_option("--delta", build_delta, "Explicit delta (with --w)");
    build_cmd->add_option("--repeats", build_repeats, "Explicit bank count (with --w)");
    build_cmd->add_option("--r0", build_r0, "Smallest radius (ladder)");
    build_cmd->add_option("--rmax", build_rmax, "Largest radius (ladder)");
    build_cmd->add_option("--width", build_width, "Fixed per-level width (ladder)");
    build_cmd->add_option("--max-entries", build_max_entries, "Hardware entry limit (nn)");
    build_cmd->add_option("--max-width", build_max_width, "Hardware width limit (nn)");

    // query -----------------------------------------------------------
    auto* query_cmd = app.add_subcommand("query", "Query an index container");
    add_common(query_cmd, common);
    std::string query_index, query_points, query_point, query_format = "bin";
    bool query_stats = false;
    query_cmd->add_option("--index", query_index, "Container path")->required();
    query_cmd->add_option("--queries", query_points, "Query point file");
    query_cmd->add_option("--point", query_point, "Single query as comma-separated values");
    query_cmd->add_option("--format", query_format, "Query file format")
        ->check(CLI::IsMember({"bin", "csv"}));
    query_cmd->add_flag("--stats", query_stats, "Print table counters to stderr");

    // sweep -----------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a (width, delta) grid");
    add_common(sweep_cmd, common);
    std::string sweep_data, sweep_queries, sweep_out = "-", sweep_format = "bin";
    double sweep_l = 0.5, sweep_c = 2.0;
    std::vector<std::size_t> sweep_widths = tlsh::default_width_grid();
    std::vector<double> sweep_deltas = tlsh::default_delta_grid();
    bool sweep_threshold = false;
    std::size_t sweep_n = 10000, sweep_d = 16, sweep_count = 100;
    sweep_cmd->add_option("--data", sweep_data, "Point set");
    sweep_cmd->add_option("--queries", sweep_queries, "Query set");
    sweep_cmd->add_option("--format", sweep_format, "Point file format")
        ->check(CLI::IsMember({"bin", "csv"}));
    sweep_cmd->add_option("--l", sweep_l, "Relevant radius");
    sweep_cmd->add_option("--c", sweep_c, "Far-shell factor");
    sweep_cmd->add_option("--widths", sweep_widths, "Widths to sweep")->delimiter(',');
    sweep_cmd->add_option("--deltas", sweep_deltas, "Deltas to sweep")->delimiter(',');
    sweep_cmd->add_flag("--threshold", sweep_threshold,
                        "Use the streamed two-shell benchmark instead of files");
    sweep_cmd->add_option("--n", sweep_n, "Points per cloud (threshold)");
    sweep_cmd->add_option("--d", sweep_d, "Dimension (threshold)");
    sweep_cmd->add_option("--count", sweep_count, "Queries (threshold)");
    sweep_cmd->add_option("--out", sweep_out, "CSV output path");

    // model -----------------------------------------------------------
    auto* model_cmd = app.add_subcommand("model", "Analytic accuracy prediction");
    std::vector<double> model_deltas;
    std::size_t model_w = 128;
    double model_c = 2.0, model_n1 = 1.0, model_n2 = 1000.0;
    model_cmd->add_option("--deltas", model_deltas, "Deltas to predict at")
        ->delimiter(',')
        ->required();
    model_cmd->add_option("--w", model_w, "Signature width");
    model_cmd->add_option("--c", model_c, "Far-shell factor");
    model_cmd->add_option("--n1", model_n1, "Relevant points per query");
    model_cmd->add_option("--n2", model_n2, "Far points per query");

    // eval ------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "Tune delta against ground truth");
    add_common(eval_cmd, common);
    std::string eval_data, eval_queries, eval_format = "bin", eval_objective = "minfp";
    double eval_l = 0.5, eval_c = 2.0, eval_budget = 0.05;
    std::size_t eval_w = 128;
    std::vector<double> eval_grid = tlsh::default_delta_grid();
    eval_cmd->add_option("--data", eval_data, "Point set")->required();
    eval_cmd->add_option("--queries", eval_queries, "Query set")->required();
    eval_cmd->add_option("--format", eval_format, "Point file format")
        ->check(CLI::IsMember({"bin", "csv"}));
    eval_cmd->add_option("--l", eval_l, "Relevant radius");
    eval_cmd->add_option("--c", eval_c, "Far-shell factor");
    eval_cmd->add_option("--w", eval_w, "Signature width");
    eval_cmd->add_option("--objective", eval_objective, "minfp or maxf1")
        ->check(CLI::IsMember({"minfp", "maxf1"}));
    eval_cmd->add_option("--fn-budget", eval_budget, "fn_rate budget (minfp)");
    eval_cmd->add_option("--deltas", eval_grid, "Search grid")->delimiter(',');

    // bench -----------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "Time index build and queries");
    add_common(bench_cmd, common);
    std::string bench_data, bench_queries, bench_format = "bin", bench_mode = "single";
    double bench_c = 2.0, bench_eps = 0.1, bench_scale = 1.0;
    bench_cmd->add_option("--data", bench_data, "Point set")->required();
    bench_cmd->add_option("--queries", bench_queries, "Query set")->required();
    bench_cmd->add_option("--format", bench_format, "Point file format")
        ->check(CLI::IsMember({"bin", "csv"}));
    bench_cmd->add_option("--c", bench_c, "Approximation factor");
    bench_cmd->add_option("--eps", bench_eps, "Failure budget");
    bench_cmd->add_option("--scale", bench_scale, "Query radius");
    bench_cmd->add_option("--mode", bench_mode, "single or multi")
        ->check(CLI::IsMember({"single", "multi"}));

    CLI11_PARSE(app, argc, argv);

    if (plan_cmd->parsed()) {
        json out;
        if (plan_mode == "logw") {
            out = tlsh::to_json(tlsh::plan_log_width(plan_n, plan_c, plan_eps, plan_k));
        } else {
            tlsh::BoundMode bounds = tlsh::bound_mode_from_name(plan_bounds);
            tlsh::Plan p = plan_mode == "multi"
                               ? tlsh::plan_multi_lookup(plan_n, plan_c, plan_eps, bounds)
                               : tlsh::plan_single_lookup(plan_n, plan_c, plan_eps, bounds);
            out = tlsh::to_json(p);
        }
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    if (gen_cmd->parsed()) {
        tlsh::PointSet out;
        if (gen_kind == "cube") {
            out = tlsh::gen_random_cube(gen_n, gen_d, common.seed);
        } else if (gen_kind == "queries") {
            tlsh::PointSet data = read_points(gen_data, gen_format);
            out = tlsh::gen_queries(data, gen_count, gen_l, common.seed);
        } else if (gen_kind == "threshold") {
            tlsh::ThresholdConfig cfg{gen_n, gen_d, gen_l, gen_c, gen_count, common.seed};
            if (gen_what == "query") {
                out = tlsh::PointSet(1, gen_d);
                auto q = tlsh::threshold_query(cfg, gen_cloud);
                for (std::size_t j = 0; j < gen_d; ++j) out[0][j] = q[j];
            } else {
                out = tlsh::threshold_cloud(cfg, gen_cloud);
            }
        } else {
            tlsh::FeatureVec features;
            if (gen_features == "-") {
                features = tlsh::read_features(std::cin);
            } else {
                std::ifstream in(gen_features);
                if (!in) throw std::runtime_error("cannot open " + gen_features);
                features = tlsh::read_features(in);
            }
            std::vector<double> x = tlsh::simhash_embed(features, gen_bits, gen_scale);
            if (gen_flips > 0) {
                tlsh::Rng rng(common.seed);
                x = tlsh::flip_coords(x, gen_flips, rng);
            }
            out = tlsh::PointSet(1, gen_bits);
            for (std::size_t j = 0; j < gen_bits; ++j) out[0][j] = x[j];
        }
        write_points(out, gen_out, gen_format);
        return 0;
    }

    if (build_cmd->parsed()) {
        tlsh::PointSet data = read_points(build_data, build_format);
        std::ofstream file(build_out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open " + build_out);
        json summary;
        if (build_kind == "ladder") {
            tlsh::LadderConfig cfg;
            cfg.c = build_c;
            cfg.eps = build_eps;
            cfg.r0 = build_r0;
            cfg.rmax = build_rmax;
            cfg.width = build_width;
            cfg.mode = tlsh::bound_mode_from_name(build_bounds);
            tlsh::LadderIndex idx(data, cfg, common.seed, common.threads);
            idx.save(file);
            summary = {{"kind", "ladder"}, {"levels", idx.levels()},  {"delta", idx.delta()},
                       {"w", idx.width()}, {"entries", idx.table().size()}};
        } else {
            tlsh::Plan plan;
            if (build_w > 0) {
                if (!(build_delta > 0.0))
                    throw std::runtime_error("--w needs --delta as well");
                plan.n = data.size();
                plan.c = build_c;
                plan.eps = build_eps;
                plan.mode = tlsh::bound_mode_from_name(build_bounds);
                plan.delta = build_delta;
                plan.w = build_w;
                plan.repeats = build_repeats;
                plan.feasible = true;
            } else {
                tlsh::BoundMode bounds = tlsh::bound_mode_from_name(build_bounds);
                plan = build_mode == "multi"
                           ? tlsh::plan_multi_lookup(data.size(), build_c, build_eps, bounds)
                           : tlsh::plan_single_lookup(data.size(), build_c, build_eps, bounds);
            }
            tlsh::HardwareProfile profile{build_max_entries, build_max_width};
            tlsh::NNIndex idx(data, plan, build_scale, common.seed, profile, common.threads);
            idx.save(file);
            summary = {{"kind", "nn"},
                       {"plan", tlsh::to_json(plan)},
                       {"entries", idx.table().size()},
                       {"width", idx.table().width()}};
        }
        std::cerr << summary.dump(2) << '\n';
        return 0;
    }

    if (query_cmd->parsed()) {
        std::ifstream in(query_index, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + query_index);
        char magic[8];
        in.read(magic, 8);
        in.seekg(0);
        std::string kind(magic, 8);

        tlsh::PointSet queries;
        if (!query_point.empty()) {
            std::vector<double> p = parse_point(query_point);
            queries = tlsh::PointSet(1, p.size());
            for (std::size_t j = 0; j < p.size(); ++j) queries[0][j] = p[j];
        } else if (!query_points.empty()) {
            queries = read_points(query_points, query_format);
        } else {
            throw std::runtime_error("need --point or --queries");
        }

        auto emit = [&](const json& j) { std::cout << j.dump() << '\n'; };
        if (kind == "TLSHLAD1") {
            tlsh::LadderIndex idx = tlsh::LadderIndex::load(in);
            for (std::size_t q = 0; q < queries.size(); ++q) {
                auto r = idx.query(queries[q]);
                emit(r ? json{{"found", true}, {"id", r->id}, {"distance", r->distance},
                            {"level", r->level}}
                       : json{{"found", false}});
            }
            if (query_stats) {
                auto s = idx.table().stats();
                std::cerr << json{{"lookups", s.lookups}, {"hits", s.hits},
                                  {"misses", s.misses}}
                                 .dump()
                          << '\n';
            }
        } else {
            tlsh::NNIndex idx = tlsh::NNIndex::load(in);
            for (std::size_t q = 0; q < queries.size(); ++q) {
                auto r = idx.query(queries[q]);
                emit(r ? json{{"found", true}, {"id", r->id}, {"distance", r->distance}}
                       : json{{"found", false}});
            }
            if (query_stats) {
                auto s = idx.table().stats();
                std::cerr << json{{"lookups", s.lookups}, {"hits", s.hits},
                                  {"misses", s.misses}}
                                 .dump()
                          << '\n';
            }
        }
        return 0;
    }

    if (sweep_cmd->parsed()) {
        std::ofstream file;
        std::ostream& out = open_out(file, sweep_out);
        tlsh::write_metrics_csv_header(out);
        if (sweep_threshold) {
            tlsh::ThresholdConfig cfg{sweep_n, sweep_d, sweep_l, sweep_c, sweep_count,
                                      common.seed};
            for (std::size_t w : sweep_widths)
                for (double delta : sweep_deltas)
                    tlsh::write_metrics_csv_row(
                        out, tlsh::evaluate_threshold(cfg, delta, w, common.threads));
        } else {
            if (sweep_data.empty() || sweep_queries.empty())
                throw std::runtime_error("need --data and --queries (or --threshold)");
            tlsh::PointSet data = read_points(sweep_data, sweep_format);
            tlsh::PointSet queries = read_points(sweep_queries, sweep_format);
            tlsh::EvalContext ctx(data, queries, sweep_l, sweep_c, common.threads);
            for (const tlsh::MetricsRow& row :
                 tlsh::sweep_delta(ctx, sweep_widths, sweep_deltas, common.seed,
                                   common.threads))
                tlsh::write_metrics_csv_row(out, row);
        }
        return 0;
    }

    if (model_cmd->parsed()) {
        json rows = json::array();
        for (double delta : model_deltas)
            rows.push_back(model_json(
                delta, model_w, model_c,
                tlsh::model_predict(delta, model_w, model_c, model_n1, model_n2)));
        std::cout << rows.dump(2) << '\n';
        return 0;
    }

    if (eval_cmd->parsed()) {
        tlsh::PointSet data = read_points(eval_data, eval_format);
        tlsh::PointSet queries = read_points(eval_queries, eval_format);
        tlsh::EvalContext ctx(data, queries, eval_l, eval_c, common.threads);
        tlsh::DeltaObjective objective = eval_objective == "maxf1"
                                             ? tlsh::DeltaObjective::MaxF1
                                             : tlsh::DeltaObjective::MinFpGivenFn;
        tlsh::DeltaOptResult r = tlsh::find_delta_opt(ctx, eval_w, common.seed, objective,
                                                      eval_budget, eval_grid, common.threads);
        json out = {{"satisfied", r.satisfied}, {"row", tlsh::to_json(r.row)}};
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    if (bench_cmd->parsed()) {
        tlsh::PointSet data = read_points(bench_data, bench_format);
        tlsh::PointSet queries = read_points(bench_queries, bench_format);
        tlsh::BoundMode bounds = tlsh::BoundMode::Tight;
        tlsh::Plan plan = bench_mode == "multi"
                              ? tlsh::plan_multi_lookup(data.size(), bench_c, bench_eps, bounds)
                              : tlsh::plan_single_lookup(data.size(), bench_c, bench_eps, bounds);
        auto t0 = std::chrono::steady_clock::now();
        tlsh::NNIndex idx(data, plan, bench_scale, common.seed, common.threads);
        auto t1 = std::chrono::steady_clock::now();
        std::size_t found = 0;
        for (std::size_t q = 0; q < queries.size(); ++q) found += idx.query(queries[q]).has_value();
        auto t2 = std::chrono::steady_clock::now();
        double build_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        double query_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
        json out = {{"plan", tlsh::to_json(plan)},
                    {"build_ms", build_ms},
                    {"query_ms_total", query_ms},
                    {"queries", queries.size()},
                    {"found", found},
                    {"qps", queries.size() ? 1000.0 * double(queries.size()) / query_ms : 0.0}};
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
