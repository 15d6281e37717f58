// Command-line front end: ground-truth, estimate, evaluate.

#include "safeset/driver.hpp"
#include "safeset/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace safeset;
using io::json;

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
        return 2;
    case ErrorKind::Io:
        return 3;
    case ErrorKind::Simulator:
        return 4;
    case ErrorKind::Numerical:
        break;
    }
    return 1;
}

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

io::RunConfig load(const CommonFlags& f) {
    if (f.config.empty()) throw Error(ErrorKind::Config, "--config is required");
    io::RunConfig c = io::load_config(f.config);
    io::apply_environment(c);
    if (f.threads) {
        require(*f.threads >= 1, "--threads must be at least 1", ErrorKind::Config);
        c.threads = *f.threads;
    }
    return c;
}

int cmd_ground_truth(const CommonFlags& f, std::optional<std::int64_t> n) {
    io::RunConfig c = load(f);
    if (f.seed) c.truth.seed = *f.seed;
    if (n) {
        require(*n >= 1, "--n-per-point must be at least 1", ErrorKind::Config);
        c.truth.n_per_point = *n;
    }
    const std::string out = f.out.empty() ? c.outputs.ground_truth : f.out;
    if (out.empty()) throw Error(ErrorKind::Config, "no output path: pass --out or set outputs.ground_truth");
    const ParamGrid grid = c.build_grid();
    const auto sim = io::make_configured_simulator(c);
    const GroundTruth truth = mc_ground_truth(sim, grid, c.truth.n_per_point, c.safety, c.truth.seed, c.threads);
    io::write_file(out, io::ground_truth_csv(grid, truth));
    std::size_t safe = 0;
    for (bool b : truth.safe_mask) safe += b ? 1 : 0;
    std::cout << "wrote " << out << ": " << grid.size() << " points, " << safe << " safe at gamma "
              << io::format_double(c.safety.gamma) << "\n";
    return 0;
}

int cmd_estimate(const CommonFlags& f, std::optional<std::int64_t> budget, std::optional<int> checkpoint_every) {
    io::RunConfig c = load(f);
    if (f.seed) c.seed = *f.seed;
    if (budget) {
        require(*budget >= 1, "--budget must be at least 1", ErrorKind::Config);
        c.budget = *budget;
    }
    if (checkpoint_every) {
        require(*checkpoint_every >= 1, "--checkpoint-every must be at least 1", ErrorKind::Config);
        c.checkpoint_every = *checkpoint_every;
    }
    if (!f.out.empty()) c.outputs.prefix = f.out;
    if (c.outputs.prefix.empty()) throw Error(ErrorKind::Config, "no output prefix: pass --out or set outputs.prefix");
    io::validate_config(c);

    const ParamGrid grid = c.build_grid();
    const auto sim = io::make_configured_simulator(c);
    RunOptions opts;
    opts.checkpoint_every = c.checkpoint_every;
    try {
        const RunResult r = run_estimation(sim, grid, c.method, c.safety, c.budget, c.seed, nullptr, opts);
        io::write_estimate(c, grid, r);
        std::cout << method_name(c.method.kind) << ": " << r.trace.used() << " episodes, " << r.estimate.count()
                  << " points in the safe set" << (r.trace.saturated ? " (saturated)" : "") << "\n"
                  << "wrote " << c.outputs.prefix << ".{trace,mask,checkpoints}.csv and .manifest.json\n";
    } catch (const RunAborted& e) {
        const auto paths = io::artifact_paths(c.outputs.prefix);
        io::write_file(paths.trace, io::trace_csv(grid, e.partial()));
        std::cerr << "run aborted after " << e.partial().used() << " episodes; partial trace in " << paths.trace
                  << "\n";
        throw;
    }
    return 0;
}

struct Evaluation {
    std::string prefix;
    Metrics metrics;
    std::int64_t episodes_used = 0;
    std::optional<std::int64_t> episodes_to_recall;
    std::vector<Checkpoint> curve;
};

Evaluation evaluate_prefix(const std::string& prefix, const io::TruthFile& truth, double target_recall) {
    const auto paths = io::artifact_paths(prefix);
    const json manifest = io::parse_json_text(io::read_file(paths.manifest), paths.manifest);
    const io::RunConfig cfg = io::parse_config(manifest.at("config"));
    const io::MaskFile mask = io::parse_mask(io::read_file(paths.mask), paths.mask);
    if (!io::same_points(mask.points, truth.points))
        throw Error(ErrorKind::Config, "estimate '" + prefix + "' and ground truth cover different grids");
    if (!io::same_points(io::grid_points(cfg.build_grid()), truth.points))
        throw Error(ErrorKind::Config, "manifest grid of '" + prefix + "' does not match the ground truth");

    Evaluation ev;
    ev.prefix = prefix;
    ev.metrics = evaluate(mask.mask, truth.truth.safe_mask);
    ev.episodes_used = static_cast<std::int64_t>(io::parse_trace(io::read_file(paths.trace)).size());
    RunTrace trace;
    trace.checkpoints = io::parse_checkpoints(io::read_file(paths.checkpoints), truth.truth.size());
    for (auto& cp : trace.checkpoints) {
        const Metrics m = evaluate(cp.mask, truth.truth.safe_mask);
        cp.precision = m.precision;
        cp.recall = m.recall;
    }
    ev.episodes_to_recall = episodes_to_recall(trace, target_recall, default_precision_floor(cfg.safety.delta));
    ev.curve = std::move(trace.checkpoints);
    return ev;
}

json evaluation_json(const Evaluation& ev) {
    json j = {{"prefix", ev.prefix},
              {"precision", ev.metrics.precision},
              {"recall", ev.metrics.recall},
              {"tp", ev.metrics.tp},
              {"fp", ev.metrics.fp},
              {"fn", ev.metrics.fn},
              {"tn", ev.metrics.tn},
              {"episodes_used", ev.episodes_used}};
    j["episodes_to_recall"] = ev.episodes_to_recall ? json(*ev.episodes_to_recall) : json(nullptr);
    return j;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json summary_stat(const std::vector<double>& v) {
    if (v.empty()) return {{"median", nullptr}, {"min", nullptr}, {"max", nullptr}, {"count", 0}};
    return {{"median", median(v)},
            {"min", *std::min_element(v.begin(), v.end())},
            {"max", *std::max_element(v.begin(), v.end())},
            {"count", v.size()}};
}

int cmd_evaluate(const CommonFlags& f, std::vector<std::string> prefixes, std::string truth_path,
                 std::string curve_path, double target_recall) {
    if (!f.config.empty()) {
        const io::RunConfig c = load(f);
        if (prefixes.empty() && !c.outputs.prefix.empty()) prefixes.push_back(c.outputs.prefix);
        if (truth_path.empty()) truth_path = c.outputs.ground_truth;
    }
    if (prefixes.empty()) throw Error(ErrorKind::Config, "no estimate: pass --estimate or a config with outputs.prefix");
    if (truth_path.empty()) throw Error(ErrorKind::Config, "no ground truth: pass --truth or set outputs.ground_truth");
    require(target_recall > 0.0 && target_recall <= 1.0, "--target-recall must lie in (0, 1]", ErrorKind::Config);

    const io::TruthFile truth = io::read_ground_truth(truth_path);
    std::vector<Evaluation> evals;
    for (const auto& p : prefixes) evals.push_back(evaluate_prefix(p, truth, target_recall));

    json out;
    if (evals.size() == 1) {
        out = evaluation_json(evals.front());
    } else {
        out["runs"] = json::array();
        for (const auto& ev : evals) out["runs"].push_back(evaluation_json(ev));
        std::vector<double> prec, rec, tp, fp, fn, tn, used, reach;
        for (const auto& ev : evals) {
            prec.push_back(ev.metrics.precision);
            rec.push_back(ev.metrics.recall);
            tp.push_back(static_cast<double>(ev.metrics.tp));
            fp.push_back(static_cast<double>(ev.metrics.fp));
            fn.push_back(static_cast<double>(ev.metrics.fn));
            tn.push_back(static_cast<double>(ev.metrics.tn));
            used.push_back(static_cast<double>(ev.episodes_used));
            if (ev.episodes_to_recall) reach.push_back(static_cast<double>(*ev.episodes_to_recall));
        }
        out["summary"] = {{"precision", summary_stat(prec)}, {"recall", summary_stat(rec)},
                          {"tp", summary_stat(tp)},          {"fp", summary_stat(fp)},
                          {"fn", summary_stat(fn)},          {"tn", summary_stat(tn)},
                          {"episodes_used", summary_stat(used)}, {"episodes_to_recall", summary_stat(reach)}};
    }
    out["target_recall"] = target_recall;
    const std::string text = io::dump_json(out);
    std::cout << text;
    if (!f.out.empty()) {
        io::write_file(f.out, text);
        if (curve_path.empty()) {
            std::string stem = f.out;
            if (stem.size() > 5 && stem.ends_with(".json")) stem.resize(stem.size() - 5);
            curve_path = stem + ".curve.csv";
        }
    }
    if (!curve_path.empty()) {
        std::string csv = io::csv_row({"prefix", "episode", "precision", "recall"});
        for (const auto& ev : evals)
            for (const auto& cp : ev.curve)
                csv += io::csv_row({ev.prefix, std::to_string(cp.episode), io::format_double(*cp.precision),
                                    io::format_double(*cp.recall)});
        io::write_file(curve_path, csv);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Black-box safe-set estimation with smoothing bandits"};
    app.require_subcommand(1);

    CommonFlags gt_flags, est_flags, ev_flags;
    std::optional<std::int64_t> n_per_point, budget;
    std::optional<int> checkpoint_every;
    std::vector<std::string> prefixes;
    std::string truth_path, curve_path;
    double target_recall = 0.8;

    auto add_common = [](CLI::App* sub, CommonFlags& f, bool seed) {
        sub->add_option("--config", f.config, "JSON run configuration (or a run manifest)");
        sub->add_option("--out", f.out, "output path or prefix");
        if (seed) sub->add_option("--seed", f.seed, "random seed");
        sub->add_option("--threads", f.threads, "simulator worker threads");
    };

    auto* gt = app.add_subcommand("ground-truth", "Monte Carlo failure probability at every grid point");
    add_common(gt, gt_flags, true);
    gt->add_option("--n-per-point", n_per_point, "episodes per grid point");

    auto* est = app.add_subcommand("estimate", "run safe-set estimation");
    add_common(est, est_flags, true);
    est->add_option("--budget", budget, "episode budget");
    est->add_option("--checkpoint-every", checkpoint_every, "episodes between checkpoints");

    auto* ev = app.add_subcommand("evaluate", "precision and recall against ground truth");
    add_common(ev, ev_flags, false);
    ev->add_option("--estimate", prefixes, "estimate prefix; repeat for batch summaries");
    ev->add_option("--truth", truth_path, "ground-truth CSV");
    ev->add_option("--curve", curve_path, "per-checkpoint precision/recall CSV");
    ev->add_option("--target-recall", target_recall, "recall target for episodes_to_recall");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gt) return cmd_ground_truth(gt_flags, n_per_point);
        if (*est) return cmd_estimate(est_flags, budget, checkpoint_every);
        if (*ev) return cmd_evaluate(ev_flags, prefixes, truth_path, curve_path, target_recall);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
