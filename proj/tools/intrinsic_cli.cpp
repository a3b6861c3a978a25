#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <intrinsic/intrinsic.hpp>

namespace {

using namespace intrinsic;

constexpr int exit_data = 1;
constexpr int exit_usage = 2;
constexpr int exit_verification = 3;

class usage_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Writes through a temporary file in the target directory, then renames.
void write_output(const std::string& path, const std::string& content)
{
    if (path.empty() || path == "-")
    {
        std::cout << content << std::flush;
        return;
    }
    const std::filesystem::path target(path);
    auto temp = target;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw data_error("cannot write '" + temp.string() + "'");
        }
        out << content;
        out.flush();
        if (!out)
        {
            throw data_error("write to '" + temp.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(temp, target, ec);
    if (ec)
    {
        std::filesystem::remove(temp, ec);
        throw data_error("cannot rename output into '" + path + "'");
    }
}

std::string read_input(const std::string& path)
{
    if (path == "-")
    {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    return read_file(path);
}

/// Flags shared by the subcommands that need a ladder or run settings.
struct Settings
{
    std::string config_file;
    std::string write_config_file;
    bool defaults = false;
    std::optional<std::size_t> n;
    std::optional<double> delta1;
    std::optional<double> ratio;
    std::string deltas;
    std::string ladder_file;
    std::string window;
    std::string cadence;
    std::optional<std::size_t> k_min;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> h2_chain;
    std::optional<std::size_t> h2_lag;
    std::string warmup;
    std::string initial_mode;
    bool verbose = false;

    void add_ladder(CLI::App* app)
    {
        app->add_option("--config", config_file, "Key-value run configuration to start from")
            ->check(CLI::ExistingFile);
        app->add_option("--write-config", write_config_file,
                        "Write the effective configuration to this file");
        app->add_flag("--defaults", defaults,
                      "Standard settings: 12 doubling thresholds from 0.025%, 1d window, 1m cadence");
        app->add_option("--n", n, "Number of thresholds of a geometric ladder");
        app->add_option("--delta1", delta1, "Smallest threshold (relative move, 0.00025 = 0.025%)");
        app->add_option("--ratio", ratio, "Ratio between consecutive thresholds");
        app->add_option("--deltas", deltas, "Explicit comma-separated thresholds");
        app->add_option("--ladder", ladder_file, "Ladder file with a 'deltas=' line")
            ->check(CLI::ExistingFile);
        app->add_option("--initial-mode", initial_mode, "Initial runner mode")
            ->check(CLI::IsMember({"up", "down"}));
        app->add_flag("-v,--verbose", verbose, "Report summary statistics on stderr");
    }

    void add_network(CLI::App* app)
    {
        app->add_option("--warmup", warmup,
                        "State before a threshold's first confirmation: seeded from the initial "
                        "mode, or transitions discarded until every threshold has confirmed")
            ->check(CLI::IsMember({"seed", "discard"}));
    }

    void add_info(CLI::App* app)
    {
        app->add_option("--seed", seed, "Seed of the second-order informativeness estimator");
        app->add_option("--h2-chain", h2_chain, "Chain length of the estimator");
        app->add_option("--h2-lag", h2_lag, "Truncation lag of the estimator");
    }

    void add_liquidity(CLI::App* app)
    {
        app->add_option("--window", window, "Sliding window, e.g. 1d, 6h, 30m");
        app->add_option("--cadence", cadence, "Sampling cadence, e.g. 1m, 5s");
        app->add_option("--k-min", k_min, "Transitions below which a sample is low-confidence");
    }

    [[nodiscard]] RunConfig resolve() const
    {
        RunConfig config;
        if (!config_file.empty())
        {
            apply_config(read_file(config_file), config);
        }
        const bool geometric = n || delta1 || ratio;
        const int sources = (geometric ? 1 : 0) + (deltas.empty() ? 0 : 1) + (ladder_file.empty() ? 0 : 1);
        if (sources > 1)
        {
            throw usage_error("give exactly one ladder source: --n/--delta1/--ratio, --deltas or --ladder");
        }
        if (defaults && sources > 0)
        {
            throw usage_error("--defaults cannot be combined with a ladder source");
        }
        if (defaults)
        {
            const auto keep_seed = config.seed;
            config = RunConfig{};
            config.seed = keep_seed;
        }
        if (geometric)
        {
            config.deltas.reset();
            config.n = n.value_or(config.n);
            config.delta1 = delta1.value_or(config.delta1);
            config.ratio = ratio.value_or(config.ratio);
        }
        if (!deltas.empty())
        {
            config.deltas = parse_delta_list(deltas);
        }
        if (!ladder_file.empty())
        {
            RunConfig from_file;
            apply_config(read_file(ladder_file), from_file);
            if (!from_file.deltas)
            {
                throw usage_error("ladder file '" + ladder_file + "' has no 'deltas=' line");
            }
            config.deltas = from_file.deltas;
        }
        if (!window.empty())
        {
            config.window_ms = parse_duration(window);
        }
        if (!cadence.empty())
        {
            config.cadence_ms = parse_duration(cadence);
        }
        config.k_min = k_min.value_or(config.k_min);
        config.seed = seed.value_or(config.seed);
        config.h2_chain = h2_chain.value_or(config.h2_chain);
        config.h2_lag = h2_lag.value_or(config.h2_lag);
        if (!warmup.empty())
        {
            config.warmup = warmup == "seed" ? WarmupPolicy::seed_from_mode
                                             : WarmupPolicy::discard_until_confirmed;
        }
        if (!initial_mode.empty())
        {
            config.initial_mode = initial_mode == "up" ? Mode::expect_up : Mode::expect_down;
        }
        (void)config.ladder();
        if (!write_config_file.empty())
        {
            std::ostringstream out;
            write_config(out, config);
            write_output(write_config_file, out.str());
        }
        return config;
    }
};

EventStreams events_from_ticks(const std::string& path, const RunConfig& config)
{
    return dissect(parse_ticks(read_input(path), {}, path), config.ladder(), config.initial_mode);
}

std::vector<TransitionRecord> transitions_from(const std::string& ticks, const std::string& events,
                                               const RunConfig& config)
{
    const auto ladder = config.ladder();
    const auto streams = events.empty() ? events_from_ticks(ticks, config)
                                        : parse_events(read_input(events), ladder.size());
    return replay(streams, ladder.size(), config.warmup, config.initial_mode);
}

InfoSummary info_for(const TransitionMatrix& w, const RunConfig& config, bool verbose)
{
    auto info = summarize(w, {config.h2_chain, config.h2_lag, config.seed});
    if (verbose)
    {
        std::cerr << "H1 " << csv::format(info.h1) << " nats, H2 " << csv::format(info.h2)
                  << " nats^2\n";
    }
    return info;
}

int run(int argc, char** argv)
{
    CLI::App app{"Directional-change dissection, intrinsic networks and liquidity"};
    app.name("intrinsic");
    app.require_subcommand(1);
    app.allow_extras(false);

    std::string input;
    std::string output = "-";
    std::string events_file;
    std::string transitions_file;
    std::string matrix_file;

    Settings dissect_s;
    auto* dissect_cmd = app.add_subcommand("dissect", "Dissect ticks into directional-change events");
    dissect_cmd->add_option("-i,--input", input, "Tick CSV (timestamp_ms,bid,ask), optionally gzipped")
        ->required();
    dissect_cmd->add_option("-o,--output", output, "Events CSV, '-' for stdout");
    dissect_s.add_ladder(dissect_cmd);

    Settings transitions_s;
    auto* transitions_cmd =
        app.add_subcommand("transitions", "Map ticks or an events table to network transitions");
    auto* t_input = transitions_cmd->add_option("-i,--input", input, "Tick CSV");
    auto* t_events = transitions_cmd->add_option("--events", events_file, "Events CSV from 'dissect'");
    t_input->excludes(t_events);
    transitions_cmd->add_option("-o,--output", output, "Transitions CSV, '-' for stdout");
    transitions_s.add_ladder(transitions_cmd);
    transitions_s.add_network(transitions_cmd);

    Settings matrix_s;
    auto* matrix_cmd = app.add_subcommand("matrix", "Closed-form transition matrix of a ladder");
    matrix_cmd->add_option("-o,--output", output, "Matrix CSV (from,to,prob), '-' for stdout");
    matrix_s.add_ladder(matrix_cmd);

    Settings contract_s;
    auto* contract_cmd =
        app.add_subcommand("contract", "Remove the smallest threshold from a transition matrix");
    contract_cmd->add_option("--matrix", matrix_file, "Matrix CSV; the ladder's matrix when absent");
    contract_cmd->add_option("-o,--output", output, "Matrix CSV, '-' for stdout");
    contract_s.add_ladder(contract_cmd);

    Settings liquidity_s;
    auto* liquidity_cmd = app.add_subcommand("liquidity", "Rolling liquidity of a tick series");
    auto* l_input = liquidity_cmd->add_option("-i,--input", input, "Tick CSV");
    auto* l_events = liquidity_cmd->add_option("--events", events_file, "Events CSV from 'dissect'");
    auto* l_transitions =
        liquidity_cmd->add_option("--transitions", transitions_file, "Transitions CSV from 'transitions'");
    l_input->excludes(l_events)->excludes(l_transitions);
    l_events->excludes(l_transitions);
    liquidity_cmd->add_option("-o,--output", output, "Liquidity CSV, '-' for stdout");
    liquidity_s.add_ladder(liquidity_cmd);
    liquidity_s.add_network(liquidity_cmd);
    liquidity_s.add_info(liquidity_cmd);
    liquidity_s.add_liquidity(liquidity_cmd);

    SimConfig sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Emit a simulated Brownian tick series");
    simulate_cmd->add_option("--sigma", sim.sigma, "Volatility in price units per sqrt(time unit)")
        ->capture_default_str();
    simulate_cmd->add_option("--mu", sim.mu, "Drift in price units per time unit")->capture_default_str();
    simulate_cmd->add_option("--dt", sim.dt, "Step in time units")->capture_default_str();
    simulate_cmd->add_option("--steps", sim.steps, "Number of steps")->capture_default_str();
    simulate_cmd->add_option("--x0", sim.x0, "Initial price")->capture_default_str();
    simulate_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate_cmd->add_option("--time-unit-ms", sim.time_unit_ms, "Milliseconds per time unit")
        ->capture_default_str();
    simulate_cmd->add_option("--start-ms", sim.start_ms, "Timestamp of the first tick")
        ->capture_default_str();
    simulate_cmd->add_option("-o,--output", output, "Tick CSV, '-' for stdout");

    LadderSearchConfig search;
    std::string objective = "max-h1";
    std::uint64_t search_seed = 1;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Choose a ladder by an informativeness objective");
    calibrate_cmd->add_option("--objective", objective, "Objective")
        ->check(CLI::IsMember({"equal-prob", "max-h1", "max-h2"}))
        ->capture_default_str();
    calibrate_cmd->add_option("--n", search.n, "Number of thresholds")->capture_default_str();
    calibrate_cmd->add_option("--delta1", search.delta1, "Smallest threshold")->capture_default_str();
    calibrate_cmd->add_option("--ratio-low", search.ratio_low, "Lower bound of the ratio search")
        ->capture_default_str();
    calibrate_cmd->add_option("--ratio-high", search.ratio_high, "Upper bound of the ratio search")
        ->capture_default_str();
    calibrate_cmd->add_option("--tolerance", search.tolerance, "Tolerance on the ratio")
        ->capture_default_str();
    calibrate_cmd->add_option("--seed", search_seed, "Seed of the max-h2 estimator")->capture_default_str();
    calibrate_cmd->add_option("--h2-chain", search.h2.chain_length, "Chain length of the max-h2 estimator")
        ->capture_default_str();
    calibrate_cmd->add_option("-o,--output", output, "Ladder file (deltas=...), '-' for stdout");

    std::vector<std::string> suite_names;
    verify::Options verify_options;
    auto* verify_cmd = app.add_subcommand("verify", "Run named verification suites");
    std::vector<std::string> known{"all"};
    for (const auto& s : verify::suites())
    {
        known.emplace_back(s.name);
    }
    verify_cmd->add_option("suites", suite_names, "Suites to run")
        ->required()
        ->check(CLI::IsMember(known));
    verify_cmd->add_option("--seed", verify_options.seed, "Random seed")->capture_default_str();
    verify_cmd->add_option("--effort", verify_options.effort, "Multiplier on Monte Carlo sample sizes")
        ->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    if (dissect_cmd->parsed())
    {
        const auto config = dissect_s.resolve();
        std::ostringstream out;
        write_events(out, events_from_ticks(input, config));
        write_output(output, out.str());
    }
    else if (transitions_cmd->parsed())
    {
        if (input.empty() && events_file.empty())
        {
            throw usage_error("transitions needs --input or --events");
        }
        const auto config = transitions_s.resolve();
        std::ostringstream out;
        write_transitions(out, transitions_from(input, events_file, config));
        write_output(output, out.str());
    }
    else if (matrix_cmd->parsed())
    {
        const auto config = matrix_s.resolve();
        const auto w = analytic_matrix(config.ladder());
        std::ostringstream out;
        write_matrix(out, w);
        write_output(output, out.str());
        if (matrix_s.verbose)
        {
            std::cerr << "H1 " << csv::format(h1(w, stationary_distribution(w))) << " nats\n";
        }
    }
    else if (contract_cmd->parsed())
    {
        const auto config = contract_s.resolve();
        const auto w = matrix_file.empty() ? analytic_matrix(config.ladder())
                                           : parse_matrix(read_input(matrix_file));
        std::ostringstream out;
        write_matrix(out, contract(w));
        write_output(output, out.str());
    }
    else if (liquidity_cmd->parsed())
    {
        if (input.empty() && events_file.empty() && transitions_file.empty())
        {
            throw usage_error("liquidity needs --input, --events or --transitions");
        }
        const auto config = liquidity_s.resolve();
        const auto ladder = config.ladder();
        const auto records = transitions_file.empty()
                                 ? transitions_from(input, events_file, config)
                                 : parse_transitions(read_input(transitions_file), ladder.size());
        const auto w = analytic_matrix(ladder);
        const auto info = info_for(w, config, liquidity_s.verbose);
        const auto samples = liquidity_stream(records, w, info,
                                              {config.window_ms, config.cadence_ms, config.k_min});
        std::ostringstream out;
        write_liquidity(out, samples);
        write_output(output, out.str());
    }
    else if (simulate_cmd->parsed())
    {
        std::ostringstream out;
        write_ticks(out, simulate_path(sim));
        write_output(output, out.str());
    }
    else if (calibrate_cmd->parsed())
    {
        search.objective = parse_objective(objective);
        search.h2.seed = search_seed;
        const auto result = optimize_ladder(search);
        std::cerr << "objective " << objective << " = " << csv::format(result.objective);
        if (result.ratio > 0.0)
        {
            std::cerr << ", ratio " << csv::format(result.ratio);
        }
        std::cerr << '\n';
        RunConfig config;
        config.deltas = std::vector<double>(result.ladder.deltas().begin(), result.ladder.deltas().end());
        std::ostringstream out;
        out << "# " << objective << " " << csv::format(result.objective) << '\n';
        write_config(out, config);
        write_output(output, out.str());
    }
    else if (verify_cmd->parsed())
    {
        bool all_passed = true;
        const bool everything =
            std::find(suite_names.begin(), suite_names.end(), "all") != suite_names.end();
        for (const auto& suite : verify::suites())
        {
            if (!everything &&
                std::find(suite_names.begin(), suite_names.end(), suite.name) == suite_names.end())
            {
                continue;
            }
            const auto checks = suite.run(verify_options);
            verify::write_report(std::cout, suite.name, checks);
            for (const auto& c : checks)
            {
                all_passed = all_passed && c.passed;
            }
        }
        return all_passed ? 0 : exit_verification;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try
    {
        return run(argc, argv);
    }
    catch (const usage_error& e)
    {
        std::cerr << "intrinsic: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const invalid_input& e)
    {
        std::cerr << "intrinsic: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const std::exception& e)
    {
        std::cerr << "intrinsic: " << e.what() << '\n';
        return exit_data;
    }
}
