// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance [--criterion N] [--seed S]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <intrinsic/intrinsic.hpp>

#include "oracles.hpp"

using namespace intrinsic;

namespace {

std::uint64_t g_seed = 1;

struct Verdict
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        pass = pass && ok;
        detail << (ok ? "" : "[x] ") << what << "; ";
    }
};

class Stopwatch
{
public:
    [[nodiscard]] double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x)
{
    return csv::format(x);
}

SimConfig unit_price_walk(double sigma, double delta, double resolution)
{
    SimConfig config;
    config.sigma = sigma;
    config.dt = std::pow(delta / resolution / sigma, 2);
    config.steps = static_cast<std::size_t>(std::pow(0.05 * resolution / delta, 2));
    config.seed = g_seed;
    return config;
}

// Overshoot mean
void criterion_1(Verdict& v)
{
    Stopwatch clock;
    const double delta = 0.005;
    double lo = INFINITY;
    double hi = -INFINITY;
    std::uint64_t offset = 0;
    for (double sigma : {0.005, 0.01, 0.03})
    {
        auto config = unit_price_walk(sigma, delta, 100.0);
        config.seed += 1000 * offset++;
        check_resolution(config, delta);
        const auto report = verify_fit(config, delta, 100'000);
        lo = std::min(lo, report.mean_ratio);
        hi = std::max(hi, report.mean_ratio);
        v.require(report.mean_ratio >= 0.98 && report.mean_ratio <= 1.02,
                  "sigma " + fmt(sigma) + ": mean/delta " + fmt(report.mean_ratio) + " over " +
                      std::to_string(report.overshoots));
    }
    v.require(hi - lo <= 0.04, "spread across sigma " + fmt(hi - lo));
    v.require(clock.seconds() < 120.0, "runtime " + fmt(std::round(clock.seconds())) + " s");
}

// Overshoot law
void criterion_2(Verdict& v)
{
    const double delta = 0.005;
    const auto config = unit_price_walk(0.01, delta, 200.0);
    const auto sample = collect_overshoots(config, delta, 100'000);
    const double d = stats::ks_statistic(sample, [&](double x) { return stats::exponential_cdf(x, delta); });
    const double p = stats::ks_pvalue(d, sample.size());
    // independent check on the second moment: E[w^2] = 2 delta^2
    double m2 = 0.0;
    for (double x : sample)
    {
        m2 += x * x;
    }
    m2 /= static_cast<double>(sample.size()) * delta * delta;
    v.require(p >= 0.01, "KS D " + fmt(d) + " p " + fmt(p) + " n " + std::to_string(sample.size()));
    v.detail << "E[w^2]/delta^2 " << fmt(m2) << " (exponential 2); ";
}

// Two thresholds
void criterion_3(Verdict& v)
{
    const double delta1 = 0.005;
    for (double ratio : {1.5, 2.0, 3.0})
    {
        const ThresholdLadder ladder({delta1, delta1 * ratio});
        const auto counts = empirical_matrix(unit_price_walk(0.01, delta1, 20.0), ladder, 1'000'000);
        const double expected = std::exp(-(ratio - 1.0));
        const double observed = counts.probability(1, 3);
        const double se = counts.standard_error(1, 3);
        const auto fresh = counts.conditional(2, 1, 3);
        v.require(std::abs(observed - expected) <= 3.0 * se,
                  "ratio " + fmt(ratio) + ": P(1->3) " + fmt(observed) + " vs " + fmt(expected) +
                      " (" + fmt((observed - expected) / se) + " se; after 2->0->1: " +
                      fmt(fresh.probability) + ")");
    }
}

// Drifted first passage
void criterion_4(Verdict& v)
{
    struct Point
    {
        double mu, delta, Delta;
    };
    for (const auto& p : {Point{0.5, 1.0, 1.0}, Point{-0.5, 1.0, 1.0}, Point{1.0, 0.5, 1.5},
                          Point{-0.25, 1.5, 0.5}})
    {
        const double closed = drifted_escape_probability(p.Delta, p.delta, p.mu, 1.0);
        const double reference = oracle::escape_by_scale_function(p.Delta, p.delta, p.mu, 1.0);
        const auto mc = first_passage_probability(p.Delta, p.delta, p.mu, 1.0, 1'000'000, g_seed);
        const std::string where = "(mu " + fmt(p.mu) + ", delta " + fmt(p.delta) + ", Delta " + fmt(p.Delta) + ")";
        v.require(std::abs(closed - reference) <= 1e-12, where + " closed form vs scale function");
        v.require(std::abs(mc.probability - closed) <= 3.0 * mc.standard_error,
                  where + " MC " + fmt(mc.probability) + " vs " + fmt(closed) + " (" +
                      fmt((mc.probability - closed) / mc.standard_error) + " se)");
    }
}

// Contraction
void criterion_5(Verdict& v)
{
    Stopwatch clock;
    auto engine = make_engine(g_seed, 101);
    UniformDistribution uniform;
    double worst = 0.0;
    for (std::size_t n = 2; n <= 8; ++n)
    {
        for (int trial = 0; trial < 100; ++trial)
        {
            const auto ladder =
                ThresholdLadder::geometric(1e-4 + 0.01 * uniform(engine), 1.01 + 3.0 * uniform(engine), n);
            const auto reduced = contract(analytic_matrix(ladder));
            const auto direct = analytic_matrix(ladder.without_smallest());
            worst = std::max(worst, verify::max_difference(reduced, direct));
        }
    }
    v.require(worst <= 1e-12, "max entry difference " + fmt(worst) + " over 700 ladders");
    v.require(clock.seconds() < 10.0, "runtime " + fmt(clock.seconds()) + " s");
}

// Informativeness constants of the doubling 12-ladder
void criterion_6(Verdict& v)
{
    const auto w = analytic_matrix(ThresholdLadder::geometric(0.00025, 2.0, 12));
    const auto mu = stationary_distribution(w);
    const double first = h1(w, mu);
    const auto second = h2_estimate(w, mu, {10'000'000, 64, g_seed});
    const double exact = oracle::exact_surprise_variance(w, mu);
    v.require(std::abs(first - 0.4604) <= 0.01, "H1 " + fmt(first) + " vs 0.4604");
    v.require(std::abs(second.h2 - 0.70818) <= 0.05, "H2 " + fmt(second.h2) + " vs 0.70818");
    v.detail << "exact long-run variance " << fmt(exact) << ", one-step variance " << fmt(second.r0)
             << ", H2/one-step " << fmt(second.h2 / second.r0) << "; ";
}

// Entropy bound
void criterion_7(Verdict& v)
{
    auto engine = make_engine(g_seed, 102);
    UniformDistribution uniform;
    double largest = 0.0;
    double worst_gap = 0.0;
    for (int trial = 0; trial < 1000; ++trial)
    {
        const auto n = 1 + static_cast<std::size_t>(uniform(engine) * 8.0);
        std::vector<double> deltas{1e-4 + 0.01 * uniform(engine)};
        for (std::size_t i = 1; i < n; ++i)
        {
            deltas.push_back(deltas.back() * (1.0 + 1e-3 + 4.0 * uniform(engine)));
        }
        const auto w = analytic_matrix(ThresholdLadder(deltas));
        const auto mu = stationary_distribution(w);
        const double h = h1(w, mu);
        // same rate from binary entropies of the branch probabilities
        double check = 0.0;
        for (StateCode s = 0; s < w.states(); ++s)
        {
            const auto row = w.row(s);
            if (row.count == 2)
            {
                check += mu[s] * oracle::binary_entropy(row.entries[0].prob);
            }
        }
        worst_gap = std::max(worst_gap, std::abs(check - h));
        largest = std::max(largest, h);
    }
    v.require(largest <= std::numbers::ln2, "largest H1 " + fmt(largest) + " vs ln 2");
    v.require(worst_gap <= 1e-12, "binary-entropy cross-check " + fmt(worst_gap));
}

// Preferred scales
void criterion_8(Verdict& v)
{
    double worst = 0.0;
    for (std::size_t n = 2; n <= 16; ++n)
    {
        const auto p = branch_probabilities(equal_probability_ladder(0.00025, n));
        for (std::size_t i = 1; i < n; ++i)
        {
            worst = std::max(worst, std::abs(p[i] - 0.5));
        }
    }
    v.require(worst <= 1e-9, "equal-probability branch deviation " + fmt(worst));

    LadderSearchConfig config;
    config.n = 2;
    config.objective = Objective::max_h1;
    config.tolerance = 1e-8;
    const auto best = optimize_ladder(config);
    v.require(std::abs(best.ratio - (1.0 + std::numbers::ln2)) <= 1e-3,
              "n=2 optimum ratio " + fmt(best.ratio) + " vs 1+ln 2");

    const std::size_t k = 1'000'000;
    const auto ladder = equal_probability_ladder(1.0, k);
    const double constant = ladder[k - 1] / static_cast<double>(k);
    const double reference = oracle::equal_probability_constant(k);
    v.require(std::abs(constant - 0.8625576) <= 1e-4,
              "delta_k/(delta_1 k) at k=1e6 " + fmt(constant) + " vs 0.8625576");
    v.detail << "long-double recurrence " << fmt(reference) << "; ";
}

/// Streams a Brownian path with drift mu(t) through the ladder and returns
/// the network transitions. Time unit is one second.
std::vector<TransitionRecord> simulate_transitions(const ThresholdLadder& ladder, double sigma,
                                                   std::size_t steps,
                                                   const std::function<double(std::size_t)>& drift)
{
    SimConfig config;
    config.sigma = sigma;
    config.dt = 1.0;
    config.steps = steps;
    config.seed = g_seed;
    check_resolution(config, ladder[0]);
    auto engine = make_engine(config.seed, 0);
    NormalDistribution normal;
    Dissector dissector(ladder);
    NetworkTracker tracker(ladder.size());
    std::vector<TransitionRecord> records;
    TransitionRecord record;
    double x = config.x0;
    dissector.push(x, 0, [](const IntrinsicEvent&) {});
    for (std::size_t k = 1; k <= steps; ++k)
    {
        x += drift(k) + sigma * normal(engine);
        if (!(x > 0.0))
        {
            throw data_error("simulated price left the positive domain");
        }
        dissector.push(x, step_time(config, k), [&](const IntrinsicEvent& e) {
            if (tracker.push(e, record))
            {
                records.push_back(record);
            }
        });
    }
    return records;
}

constexpr std::int64_t day_ms = 86'400'000;
constexpr double day_s = 86'400.0;
const double walk_sigma = 1.25e-5;

// Liquidity under the null
void criterion_9(Verdict& v)
{
    Stopwatch clock;
    const auto ladder = ThresholdLadder::geometric(0.00025, 2.0, 12);
    const auto w = analytic_matrix(ladder);
    const auto info = summarize(w, {10'000'000, 64, g_seed});
    const std::size_t days = 200;
    const auto records = simulate_transitions(ladder, walk_sigma, days * static_cast<std::size_t>(day_s),
                                              [](std::size_t) { return 0.0; });
    const auto samples = liquidity_stream(records, w, info, {day_ms, day_ms, 30});
    std::vector<double> z;
    std::vector<double> liquidity;
    double k_sum = 0.0;
    for (const auto& s : samples)
    {
        if (s.time <= day_ms * static_cast<std::int64_t>(days))
        {
            z.push_back(s.z);
            liquidity.push_back(s.liquidity);
            k_sum += static_cast<double>(s.K);
        }
    }
    const double mean = stats::mean(z);
    const double var = stats::variance(z);
    const double d = stats::ks_statistic(liquidity, [](double x) { return std::clamp(x, 0.0, 1.0); });
    const double p = stats::ks_pvalue(d, liquidity.size());
    v.require(mean >= -0.05 && mean <= 0.05, "z mean " + fmt(mean));
    v.require(var >= 0.9 && var <= 1.1, "z variance " + fmt(var));
    v.require(p >= 0.01, "liquidity KS vs uniform D " + fmt(d) + " p " + fmt(p));
    v.require(clock.seconds() < 300.0, "runtime " + fmt(std::round(clock.seconds())) + " s");
    v.detail << z.size() << " daily windows, mean K " << fmt(k_sum / static_cast<double>(z.size()))
             << ", H1 " << fmt(info.h1) << ", H2 " << fmt(info.h2) << "; ";
}

// Regime sensitivity
void criterion_10(Verdict& v)
{
    const auto ladder = ThresholdLadder::geometric(0.00025, 2.0, 12);
    const auto w = analytic_matrix(ladder);
    const auto info = summarize(w, {10'000'000, 64, g_seed});
    const std::size_t days = 60;
    const auto third = days / 3 * static_cast<std::size_t>(day_s);
    // 2 mu delta_1 / sigma^2 = 1 inside the regime
    const double drift = walk_sigma * walk_sigma / (2.0 * 0.00025);
    const auto records = simulate_transitions(
        ladder, walk_sigma, days * static_cast<std::size_t>(day_s),
        [&](std::size_t k) { return k > third && k <= 2 * third ? drift : 0.0; });
    const auto samples = liquidity_stream(records, w, info, {day_ms, 60'000, 30});
    const auto regime_start = static_cast<std::int64_t>(third) * 1000;
    const auto regime_end = 2 * regime_start;
    std::vector<double> inside;
    std::vector<double> outside;
    for (const auto& s : samples)
    {
        // windows fully inside or fully outside the regime
        if (s.time - day_ms >= regime_start && s.time <= regime_end)
        {
            inside.push_back(s.liquidity);
        }
        else if ((s.time <= regime_start || s.time - day_ms >= regime_end) && s.time >= day_ms)
        {
            outside.push_back(s.liquidity);
        }
    }
    const double in = stats::median(inside);
    const double out = stats::median(outside);
    v.require(in < 0.05, "median liquidity in regime " + fmt(in) + " (" + std::to_string(inside.size()) + " points)");
    v.require(out >= 0.3 && out <= 0.7,
              "median liquidity outside " + fmt(out) + " (" + std::to_string(outside.size()) + " points)");
}

std::string slurp(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Determinism of the command-line pipelines
void criterion_11(Verdict& v)
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "intrinsic_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto run = [&](const std::string& args) {
        const std::string command = std::string(INTRINSIC_CLI) + " " + args + " 2>>" + (dir / "stderr.txt").string();
        const int status = std::system(command.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    auto file = [&](const std::string& name) { return (dir / name).string(); };
    const std::string fast = " --h2-chain 1000000";
    const std::vector<std::pair<std::string, std::string>> pipelines{
        {"ticks", "simulate --sigma 1.25e-5 --steps 400000 --seed 9 -o "},
        {"events", "dissect --defaults -i " + file("ticks.0") + " -o "},
        {"transitions", "transitions --defaults --events " + file("events.0") + " -o "},
        {"staged", "liquidity --defaults" + fast + " --transitions " + file("transitions.0") + " -o "},
        {"oneshot", "liquidity --defaults" + fast + " -i " + file("ticks.0") + " -o "},
        {"matrix", "matrix --n 10 --delta1 0.0005 --ratio 1.9 -o "},
        {"contract", "contract --matrix " + file("matrix.0") + " -o "},
        {"calibrate", "calibrate --objective max-h2 --n 3 --h2-chain 200000 --seed 5 -o "},
    };
    for (const auto& [name, command] : pipelines)
    {
        for (int rep = 0; rep < 2; ++rep)
        {
            const auto target = file(name + "." + std::to_string(rep));
            if (run(command + target) != 0)
            {
                v.require(false, name + " exited with an error");
            }
        }
        const auto first = slurp(file(name + ".0"));
        v.require(!first.empty() && first == slurp(file(name + ".1")), name + " identical on rerun");
    }
    v.require(slurp(file("staged.0")) == slurp(file("oneshot.0")), "staged pipeline equals one-shot liquidity");
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::function<void(Verdict&)>> criteria{
        criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5, criterion_6,
        criterion_7, criterion_8, criterion_9, criterion_10, criterion_11};
    int only = 0;
    for (int i = 1; i < argc; ++i)
    {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc)
        {
            only = std::atoi(argv[++i]);
        }
        else if (arg == "--seed" && i + 1 < argc)
        {
            g_seed = std::strtoull(argv[++i], nullptr, 10);
        }
        else
        {
            std::cerr << "usage: acceptance [--criterion 1..11] [--seed S]\n";
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(criteria.size()))
    {
        std::cerr << "criterion must be 1.." << criteria.size() << '\n';
        return 2;
    }
    bool all_pass = true;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        if (only != 0 && static_cast<std::size_t>(only) != i + 1)
        {
            continue;
        }
        Verdict verdict;
        Stopwatch clock;
        try
        {
            criteria[i](verdict);
        }
        catch (const std::exception& e)
        {
            verdict.require(false, std::string("error: ") + e.what());
        }
        std::cout << "AC" << i + 1 << ' ' << (verdict.pass ? "PASS" : "FAIL") << "  " << verdict.detail.str()
                  << "(" << fmt(std::round(clock.seconds() * 10.0) / 10.0) << " s)" << std::endl;
        all_pass = all_pass && verdict.pass;
    }
    return all_pass ? 0 : 1;
}
