// Acceptance checks. Prints one PASS/FAIL line per criterion; exits non-zero
// if any selected criterion fails. `--criterion N` runs a single one.

#include "oracles.hpp"
#include "safeset/driver.hpp"
#include "safeset/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <sys/wait.h>
#include <sstream>
#include <string>
#include <vector>

using namespace safeset;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double c1_rel_tol = 1e-6;
constexpr int c1_instances = 1000;
constexpr double c1_max_counts = 50;
constexpr double c1_seconds = 10;
constexpr double c2_tol = 1e-8;
constexpr double c2_var_tol = 1e-7;
constexpr int c2_instances = 100;
constexpr double c3_roundtrip_tol = 1e-8;
constexpr double c3_closed_form_tol = 1e-9;
constexpr double c4_tol = 1e-9;
constexpr double c4_length = 1e-5;
constexpr double c5_fp_fraction = 0.08;
constexpr std::int64_t c5_budget = 5000;
constexpr double c5_seconds = 300;
constexpr double target_recall = 0.8;
constexpr std::int64_t c6_gp_budget = 5000;
constexpr double c6_seconds = 1200;
constexpr std::int64_t c7_budget = 2000;
constexpr double c7_recall = 0.8;
constexpr std::int64_t c8_budget = 50000;
constexpr double c8_alpha = 0.05;
constexpr double c9_precision = 0.9;
constexpr std::int64_t c9_budget = 50000;
constexpr double c9_seconds = 1800;
constexpr double c9_hfov = 60.0;
constexpr int seeds = 5;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

io::RunConfig shipped(const std::string& name) {
    return io::load_config((fs::path(SAFESET_CONFIG_DIR) / name).string());
}

struct Problem {
    io::RunConfig cfg;
    ParamGrid grid;
    sim::Simulator sim;
    GroundTruth truth;
};

Problem load_problem(const std::string& config) {
    auto cfg = shipped(config);
    auto grid = cfg.build_grid();
    auto sim = io::make_configured_simulator(cfg);
    auto truth = mc_ground_truth(sim, grid, cfg.truth.n_per_point, cfg.safety, cfg.truth.seed, cfg.threads);
    return {std::move(cfg), std::move(grid), std::move(sim), std::move(truth)};
}

// Pendulum ground truth shared by every pendulum criterion within one process.
const Problem& pendulum() {
    static const Problem p = load_problem("pendulum.json");
    return p;
}

RunOptions stop_at_target(int every, double precision_floor) {
    return RunOptions{every, [precision_floor](const Checkpoint& cp) {
                          return cp.recall && cp.precision && *cp.recall >= target_recall &&
                                 *cp.precision >= precision_floor;
                      }};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

Outcome c1() {
    const auto t0 = Clock::now();
    RngStream r(1001, 0);
    double worst = 0.0;
    for (int t = 0; t < c1_instances; ++t) {
        const double p = static_cast<double>(r.below(51)), q = static_cast<double>(r.below(51));
        const double ph = r.uniform(0, c1_max_counts), qh = r.uniform(0, c1_max_counts);
        const double closed = length_likelihood(p, q, ph, qh);
        const double quad = oracle::likelihood_quadrature(p, q, ph, qh);
        worst = std::max(worst, std::abs(closed - quad) / quad);
    }
    const double secs = seconds_since(t0);
    return {worst <= c1_rel_tol && secs < c1_seconds,
            "max rel err " + fmt(worst, 3) + " over " + std::to_string(c1_instances) + " instances in " + fmt(secs, 3) +
                " s"};
}

Outcome c2() {
    RngStream r(1002, 0);
    double worst_mean = 0.0, worst_var = 0.0, worst_increase = 0.0;
    for (int t = 0; t < c2_instances; ++t) {
        const auto grid = t % 2 ? build_grid({{"a", 0, 2, 9}, {"b", -1, 1, 7}}) : build_grid({{"a", 0, 1, 15}});
        const std::size_t n = 1 + r.below(20);
        const double l = r.uniform(0.1, 0.6);
        GpDataset d;
        auto prev = gp_condition(d, grid, {l, {}});
        for (std::size_t k = 0; k < n; ++k) {
            ParamVector p;
            for (const auto& dim : grid.dims()) p.push_back(r.uniform(dim.lo, dim.hi));
            d.add(p, r.uniform(), r.uniform(1e-4, 1e-2));
            const auto post = gp_condition(d, grid, {l, {}});
            for (std::size_t i = 0; i < grid.size(); ++i)
                worst_increase = std::max(worst_increase, post.std[i] * post.std[i] - prev.std[i] * prev.std[i]);
            prev = post;
        }
        const auto o = oracle::dense_gp(d, grid, l);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            worst_mean = std::max(worst_mean, std::abs(prev.mean[i] - o.mean[i]));
            worst_var = std::max(worst_var, std::abs(prev.std[i] * prev.std[i] - std::max(0.0, o.var[i])));
        }
    }
    return {worst_mean <= c2_tol && worst_var <= c2_tol && worst_increase <= c2_var_tol,
            "max |mean err| " + fmt(worst_mean, 3) + ", max |var err| " + fmt(worst_var, 3) +
                ", max variance increase " + fmt(worst_increase, 3)};
}

Outcome c3() {
    double worst = 0.0;
    for (const BetaDist d : {BetaDist(1, 1), BetaDist(1, 101), BetaDist(2.5, 4.5), BetaDist(30, 2), BetaDist(0.7, 0.9),
                             BetaDist(101, 1), BetaDist(500, 20)})
        for (int k = 1; k <= 99; ++k) {
            const double u = k / 100.0;
            worst = std::max(worst, std::abs(d.cdf(beta_quantile(d, u)) - u));
        }
    const double q = beta_quantile(BetaDist(1, 101), 0.95);
    const double exact = 1.0 - std::pow(0.05, 1.0 / 101.0);
    const double err = std::abs(q - exact);
    return {worst <= c3_roundtrip_tol && err <= c3_closed_form_tol,
            "max round-trip err " + fmt(worst, 3) + ", Beta(1,101) q95 " + fmt(q, 10) + " err " + fmt(err, 3)};
}

Outcome c4() {
    RngStream r(1004, 0);
    const SafetyConfig cfg{0.1, 0.95};
    double worst_stat = 0.0, worst_count = 0.0;
    std::size_t mask_mismatch = 0;
    for (const auto& dims : std::vector<std::vector<GridDim>>{{{"a", 0, 0.2, 21}, {"b", 0, 0.2, 21}},
                                                              {{"x0", 1000, 3000, 6}, {"y0", 0.8, 1.2, 5}, {"h", 30, 100, 4}}}) {
        const auto grid = build_grid(dims);
        for (int t = 0; t < 20; ++t) {
            CountTable c(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                c.p[i] = static_cast<double>(r.below(150));
                c.q[i] = static_cast<double>(r.below(t % 2 ? 3 : 30));
            }
            const KernelSpec spec{c4_length, {}};
            const auto smooth = smoothing_bandit_safe_set(c, grid, spec, cfg);
            const auto raw = bandit_safe_set(c, cfg);
            const auto s = GridKernel(grid, spec).smooth(c);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                mask_mismatch += smooth.mask[i] != raw.mask[i];
                worst_stat = std::max(worst_stat, std::abs(smooth.statistic[i] - raw.statistic[i]));
                worst_count = std::max({worst_count, std::abs(s.p[i] - c.p[i]), std::abs(s.q[i] - c.q[i])});
            }
        }
    }
    return {mask_mismatch == 0 && worst_stat <= c4_tol && worst_count <= c4_tol,
            std::to_string(mask_mismatch) + " mask mismatches, max statistic diff " + fmt(worst_stat, 3) +
                ", max smoothed-count diff " + fmt(worst_count, 3)};
}

Outcome c5() {
    const auto t0 = Clock::now();
    const auto& pb = pendulum();
    std::size_t fp = 0, claimed = 0;
    std::string per;
    for (const char* config : {"pendulum_smoothing.json", "pendulum_bandit.json"}) {
        const auto cfg = shipped(config);
        for (int s = 1; s <= seeds; ++s) {
            const auto r = run_estimation(pb.sim, pb.grid, cfg.method, cfg.safety, c5_budget, static_cast<std::uint64_t>(s));
            const auto m = evaluate(r.estimate, pb.truth);
            fp += m.fp;
            claimed += m.tp + m.fp;
            per += " " + std::to_string(m.fp) + "/" + std::to_string(m.tp + m.fp);
        }
    }
    const double frac = claimed ? static_cast<double>(fp) / static_cast<double>(claimed) : 0.0;
    const double secs = seconds_since(t0);
    return {frac <= c5_fp_fraction && secs < c5_seconds,
            "pooled FP fraction " + fmt(frac) + " (" + std::to_string(fp) + "/" + std::to_string(claimed) +
                "; per run fp/|I|:" + per + ") in " + fmt(secs, 3) + " s"};
}

Outcome c6() {
    const auto t0 = Clock::now();
    const auto& pb = pendulum();
    const double floor = default_precision_floor(pb.cfg.safety.delta);
    std::map<std::string, double> med;
    std::string detail;
    for (const auto& [label, config] : std::vector<std::pair<std::string, std::string>>{
             {"smoothing-learned", "pendulum.json"},
             {"smoothing-dkwucb", "pendulum_smoothing.json"},
             {"bandit-dkwucb", "pendulum_bandit.json"},
             {"bandit-random", "pendulum_random.json"}}) {
        const auto cfg = shipped(config);
        std::vector<double> reach;
        for (int s = 1; s <= seeds; ++s) {
            const auto r = run_estimation(pb.sim, pb.grid, cfg.method, cfg.safety, cfg.budget,
                                          static_cast<std::uint64_t>(s), &pb.truth,
                                          stop_at_target(cfg.checkpoint_every, floor));
            const auto e = episodes_to_recall(r.trace, target_recall, floor);
            reach.push_back(e ? static_cast<double>(*e) : std::numeric_limits<double>::infinity());
        }
        med[label] = median(reach);
        detail += label + "=" + fmt(med[label], 6) + " ";
    }
    const bool ordered = med["smoothing-learned"] <= med["smoothing-dkwucb"] &&
                         med["smoothing-dkwucb"] < med["bandit-dkwucb"] && med["bandit-dkwucb"] < med["bandit-random"] &&
                         std::isfinite(med["bandit-random"]);

    const auto gp_cfg = shipped("pendulum_gp.json");
    const auto bandit_cfg = shipped("pendulum_bandit.json");
    std::vector<double> gp_recall, bandit_recall;
    for (int s = 1; s <= seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        gp_recall.push_back(
            evaluate(run_estimation(pb.sim, pb.grid, gp_cfg.method, gp_cfg.safety, c6_gp_budget, seed).estimate, pb.truth)
                .recall);
        bandit_recall.push_back(
            evaluate(run_estimation(pb.sim, pb.grid, bandit_cfg.method, bandit_cfg.safety, c6_gp_budget, seed).estimate,
                     pb.truth)
                .recall);
    }
    const double gp_med = median(gp_recall), bandit_med = median(bandit_recall);
    const double secs = seconds_since(t0);
    return {ordered && gp_med <= bandit_med && secs < c6_seconds,
            "median episodes to recall " + fmt(target_recall) + ": " + detail + "| recall at " +
                std::to_string(c6_gp_budget) + ": gp-mile " + fmt(gp_med) + " vs bandit-dkwucb " + fmt(bandit_med) +
                " | " + fmt(secs, 3) + " s"};
}

bool connected(const ParamGrid& grid, const std::vector<bool>& mask) {
    const auto start = std::find(mask.begin(), mask.end(), true);
    if (start == mask.end()) return false;
    std::vector<bool> seen(mask.size(), false);
    std::queue<std::size_t> todo;
    todo.push(static_cast<std::size_t>(start - mask.begin()));
    seen[todo.front()] = true;
    std::size_t reached = 0;
    while (!todo.empty()) {
        const auto i = todo.front();
        todo.pop();
        ++reached;
        const auto idx = grid.multi_index(i);
        for (std::size_t k = 0; k < grid.dim(); ++k)
            for (int step : {-1, 1}) {
                auto nb = idx;
                if (step < 0 && nb[k] == 0) continue;
                if (step > 0 && nb[k] + 1 >= grid.dims()[k].count) continue;
                nb[k] = step < 0 ? nb[k] - 1 : nb[k] + 1;
                const auto j = grid.flat_index(nb);
                if (mask[j] && !seen[j]) {
                    seen[j] = true;
                    todo.push(j);
                }
            }
    }
    return reached == static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

bool interior(const ParamGrid& grid, std::size_t i) {
    const auto idx = grid.multi_index(i);
    for (std::size_t k = 0; k < grid.dim(); ++k)
        if (idx[k] == 0 || idx[k] + 1 == grid.dims()[k].count) return false;
    return true;
}

// Some safe/unsafe neighbour pair with both points off the grid edge.
bool boundary_in_interior(const ParamGrid& grid, const std::vector<bool>& mask) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!interior(grid, i)) continue;
        const auto idx = grid.multi_index(i);
        for (std::size_t k = 0; k < grid.dim(); ++k) {
            auto nb = idx;
            ++nb[k];
            const auto j = grid.flat_index(nb);
            if (interior(grid, j) && mask[i] != mask[j]) return true;
        }
    }
    return false;
}

Outcome c7() {
    const auto& pb = pendulum();
    const bool conn = connected(pb.grid, pb.truth.safe_mask);
    const bool crosses = boundary_in_interior(pb.grid, pb.truth.safe_mask);
    const auto cfg = shipped("pendulum_smoothing.json");
    const auto r = run_estimation(pb.sim, pb.grid, cfg.method, cfg.safety, c7_budget, cfg.seed);
    const auto m = evaluate(r.estimate, pb.truth);
    const double fp_limit = std::max(2.0, 0.05 * static_cast<double>(m.tp + m.fp));
    return {conn && crosses && m.recall >= c7_recall && static_cast<double>(m.fp) <= fp_limit,
            "truth |I|=" + std::to_string(std::count(pb.truth.safe_mask.begin(), pb.truth.safe_mask.end(), true)) +
                (conn ? " connected" : " disconnected") + (crosses ? ", interior boundary" : ", no interior boundary") +
                "; smoothing-dkwucb at " + std::to_string(c7_budget) + ": recall " + fmt(m.recall) + ", fp " +
                std::to_string(m.fp) + " (limit " + fmt(fp_limit, 3) + ")"};
}

Outcome c8() {
    const auto& pb = pendulum();
    const auto& grid = pb.grid;
    const auto& p = pb.truth.p_fail_hat;
    // gradient magnitude of the ground truth surface, central differences in grid units
    std::vector<double> g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < grid.dim(); ++k) {
            auto lo = grid.multi_index(i), hi = lo;
            if (lo[k] > 0) --lo[k];
            if (hi[k] + 1 < grid.dims()[k].count) ++hi[k];
            const double d = (p[grid.flat_index(hi)] - p[grid.flat_index(lo)]) / static_cast<double>(hi[k] - lo[k]);
            s += d * d;
        }
        g[i] = std::sqrt(s);
    }
    auto sorted = g;
    std::sort(sorted.begin(), sorted.end());
    const double q10 = sorted[grid.size() / 10], q90 = sorted[grid.size() * 9 / 10];

    const auto learned_cfg = shipped("pendulum.json");
    const KernelSpec base{1.0, learned_cfg.method.weights};
    const LengthLearner learner(grid, base, learned_cfg.method.lgrid.value_or(LengthGridSpec::for_grid(grid, base)), {},
                                learned_cfg.method.leave_one_out);
    const auto bandit_cfg = shipped("pendulum_bandit.json");
    int wins = 0;
    std::string per;
    for (int s = 1; s <= seeds; ++s) {
        const auto r =
            run_estimation(pb.sim, grid, bandit_cfg.method, bandit_cfg.safety, c8_budget, static_cast<std::uint64_t>(s));
        CountTable counts(grid.size());
        for (const auto& e : r.trace.episodes) counts.record(e.index, e.safe);
        const auto post = learner.posterior(counts);
        double top = 0.0, bottom = 0.0;
        int nt = 0, nb = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double ml = learner.mean_length(post.probs[i]);
            if (g[i] >= q90) {
                top += ml;
                ++nt;
            }
            if (g[i] <= q10) {
                bottom += ml;
                ++nb;
            }
        }
        top /= nt;
        bottom /= nb;
        wins += top < bottom;
        per += " " + fmt(top, 3) + "/" + fmt(bottom, 3);
    }
    // one-sided sign test: P(at least `wins` of 5 under a fair coin)
    double pval = 0.0;
    for (int k = wins; k <= seeds; ++k) pval += std::tgamma(seeds + 1) / (std::tgamma(k + 1) * std::tgamma(seeds - k + 1));
    pval /= std::pow(2.0, seeds);
    return {pval < c8_alpha, "top-decile < bottom-decile mean length on " + std::to_string(wins) + "/" +
                                 std::to_string(seeds) + " seeds (sign test p=" + fmt(pval, 3) +
                                 "); per seed top/bottom:" + per};
}

Outcome c9() {
    const auto t0 = Clock::now();
    const auto daa = load_problem("daa.json");
    const auto& grid = daa.grid;
    const auto& dims = grid.dims();
    std::size_t h = 0;
    while (h < dims[2].count && std::abs(grid.point(grid.flat_index({0, 0, h}))[2] - c9_hfov) > 1e-9) ++h;
    if (h == dims[2].count) return {false, "the DAA grid has no h_fov = 60 slice"};

    const auto n = static_cast<double>(daa.truth.n_per_point);
    auto at = [&](std::size_t x, std::size_t y) { return daa.truth.p_fail_hat[grid.flat_index({x, y, h})]; };
    auto se = [&](double p) { return std::sqrt(std::max(p * (1 - p), 1.0 / n) / n); };
    // A line passes when some non-increasing sequence lies within 2 SE of every
    // estimate on it. Smaller x0 means a steeper detection dropoff, so failures
    // must not grow with x0; they must not grow with y0 either.
    auto band_monotone = [&](const std::vector<double>& v) {
        double level = std::numeric_limits<double>::infinity();
        for (double p : v) {
            level = std::min(level, p + 2 * se(p));
            if (level < p - 2 * se(p)) return false;
        }
        return true;
    };
    int y_viol = 0, x_viol = 0, pair_viol = 0;
    for (std::size_t x = 0; x < dims[0].count; ++x) {
        std::vector<double> line;
        for (std::size_t y = 0; y < dims[1].count; ++y) line.push_back(at(x, y));
        y_viol += !band_monotone(line);
        for (std::size_t y = 0; y + 1 < line.size(); ++y)
            pair_viol += line[y + 1] > line[y] + 2 * std::hypot(se(line[y]), se(line[y + 1]));
    }
    for (std::size_t y = 0; y < dims[1].count; ++y) {
        std::vector<double> line;
        for (std::size_t x = 0; x < dims[0].count; ++x) line.push_back(at(x, y));
        x_viol += !band_monotone(line);
        for (std::size_t x = 0; x + 1 < line.size(); ++x)
            pair_viol += line[x + 1] > line[x] + 2 * std::hypot(se(line[x]), se(line[x + 1]));
    }
    const double spread = at(0, 0) - at(dims[0].count - 1, dims[1].count - 1);

    const auto& cfg = daa.cfg;
    const auto r = run_estimation(daa.sim, grid, cfg.method, cfg.safety, c9_budget, cfg.seed, &daa.truth,
                                  stop_at_target(cfg.checkpoint_every, c9_precision));
    const auto reached = episodes_to_recall(r.trace, target_recall, c9_precision);
    const auto& last = r.trace.checkpoints.back();
    const double secs = seconds_since(t0);
    return {y_viol == 0 && x_viol == 0 && spread > 0.0 && reached.has_value() && secs < c9_seconds,
            "h_fov=60 slice: " + std::to_string(y_viol) + " y0 lines and " + std::to_string(x_viol) +
                " x0 lines not monotone within 2 SE (adjacent pairs beyond 2 SE: " + std::to_string(pair_viol) +
                "), P_fail corner spread " + fmt(spread, 3) +
                "; smoothing-learned " +
                (reached ? "reached recall " + fmt(*last.recall, 3) + " precision " + fmt(*last.precision, 3) +
                               " at episode " + std::to_string(*reached)
                         : "did not reach the target within " + std::to_string(c9_budget)) +
                " | " + fmt(secs, 3) + " s"};
}

struct CommandResult {
    int status = -1;
    std::string output;
};

CommandResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SAFESET_CLI) + " " + args + " 2>&1";
    CommandResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

Outcome c10() {
    std::vector<std::string> problems;
    // library: identical traces, estimates and ground truth across repeats and thread counts
    const auto& pb = pendulum();
    for (const char* config : {"pendulum.json", "pendulum_smoothing.json", "pendulum_gp.json", "pendulum_random.json"}) {
        const auto cfg = shipped(config);
        const auto a = run_estimation(pb.sim, pb.grid, cfg.method, cfg.safety, 1000, cfg.seed);
        const auto b = run_estimation(pb.sim, pb.grid, cfg.method, cfg.safety, 1000, cfg.seed);
        bool same = a.trace.used() == b.trace.used() && a.estimate.mask == b.estimate.mask &&
                    a.estimate.statistic == b.estimate.statistic && a.mean_length == b.mean_length;
        for (std::size_t e = 0; same && e < a.trace.episodes.size(); ++e)
            same = a.trace.episodes[e].index == b.trace.episodes[e].index &&
                   a.trace.episodes[e].safe == b.trace.episodes[e].safe;
        if (!same) problems.push_back(std::string("library rerun differs for ") + config);
    }
    const auto t1 = mc_ground_truth(pb.sim, pb.grid, 50, pb.cfg.safety, 3, 1);
    const auto t4 = mc_ground_truth(pb.sim, pb.grid, 50, pb.cfg.safety, 3, 4);
    if (t1.p_fail_hat != t4.p_fail_hat) problems.push_back("ground truth depends on thread count");

    // CLI: every command twice into the same paths, byte-compared
    const auto dir = fs::temp_directory_path() / "safeset_acceptance_c10";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto j = io::parse_json_text(io::read_file((fs::path(SAFESET_CONFIG_DIR) / "pendulum.json").string()), "cfg");
    j["outputs"]["ground_truth"] = (dir / "truth.csv").string();
    j["outputs"]["prefix"] = (dir / "run").string();
    j["budget"] = 1500;
    io::write_file((dir / "cfg.json").string(), io::dump_json(j));
    const std::string cfg = (dir / "cfg.json").string();
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"ground-truth --config " + cfg + " --n-per-point 100", {"truth.csv"}},
        {"estimate --config " + cfg, {"run.trace.csv", "run.mask.csv", "run.checkpoints.csv", "run.manifest.json"}},
        {"evaluate --config " + cfg + " --out " + (dir / "eval.json").string(), {"eval.json", "eval.curve.csv"}}};
    for (const auto& [args, files] : commands) {
        std::vector<std::string> first;
        for (int rep = 0; rep < 2; ++rep) {
            const auto r = run_cli(args);
            if (r.status != 0) {
                problems.push_back("command failed: " + args + ": " + r.output);
                break;
            }
            for (std::size_t f = 0; f < files.size(); ++f) {
                const auto bytes = io::read_file((dir / files[f]).string());
                if (rep == 0)
                    first.push_back(bytes);
                else if (bytes != first[f])
                    problems.push_back(files[f] + " differs between runs");
            }
        }
    }
    std::string detail = problems.empty() ? "library reruns, thread counts and 3 CLI commands byte-identical" : "";
    for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
    return {problems.empty(), detail};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "criterion number (1-10); repeatable, default all")
        ->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);
    if (selected.empty())
        for (int k = 1; k <= 10; ++k) selected.push_back(k);

    const std::array<std::function<Outcome()>, 10> checks{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};
    bool all = true;
    for (int k : selected) {
        Outcome o;
        try {
            o = checks[static_cast<std::size_t>(k - 1)]();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
