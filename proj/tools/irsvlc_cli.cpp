// Command-line harness: impulse responses, power and blockage sweeps, and a
// single-scenario solve.
//
//   irsvlc impulse        --scenario s.json --user 2.5,2.5,1 --out ir.csv
//   irsvlc sweep-power    --scenario s.json --trials 100 --out power.csv
//   irsvlc sweep-blockage --scenario s.json --trials 100 --out blockage.csv
//   irsvlc solve          --scenario s.json --rho 0.5 --seed 3 --out report.json
//   irsvlc default-scenario --out default_scenario.json
//
// Exit codes: 0 success, 2 invalid input, 1 anything else.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "irsvlc/experiment.hpp"
#include "irsvlc/scenario_io.hpp"

namespace {

using namespace irsvlc;

struct Options {
    std::string scenario_path;
    std::string out_path;
    std::uint64_t seed = 1;
    int trials = 100;
    std::string variants = "LoSOnly,LoSPlusDiffuse,IRS_1Array,IRS_2Arrays";
    std::string grid;
    std::string user = "2.5,2.5,1.0";
    double rho = 0.0;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ScenarioConfig load(const Options& o) {
    if (o.scenario_path.empty()) return default_scenario();
    std::ifstream in(o.scenario_path);
    if (!in) throw IoError("cannot open scenario file " + o.scenario_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ValidationError(field, "cannot parse number \"" + tok + "\"");
        }
    }
    return out;
}

// Builds the whole output in memory and writes it in one go so a failed run
// leaves no partial file.
void emit(const Options& o, const std::string& text) {
    if (o.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out) throw IoError("cannot open output file " + o.out_path);
    out << text;
    if (!out) throw IoError("failed writing " + o.out_path);
}

void cmd_impulse(const Options& o) {
    const auto pos = parse_list(o.user, "user");
    if (pos.size() != 3) throw ValidationError("user", "expected x,y,z");
    const auto sections = impulse_sections(load(o), {pos[0], pos[1], pos[2]}, o.threads);
    std::ostringstream os;
    write_impulse_csv(os, sections);
    emit(o, os.str());
}

void cmd_sweep(const Options& o, SweepVariable variable) {
    SweepSpec spec;
    spec.variable = variable;
    spec.grid = o.grid.empty() ? (variable == SweepVariable::PowerW ? default_power_grid() : default_blockage_grid())
                               : parse_list(o.grid, "grid");
    spec.trials = o.trials;
    spec.rng_seed_base = o.seed;
    const auto variants = parse_variants(o.variants);
    const auto rows = run_sweep(load(o), spec, variants, o.threads);
    std::ostringstream os;
    write_sweep_csv(os, variable, rows);
    emit(o, os.str());
}

void cmd_solve(const Options& o) {
    const auto run = run_solve(load(o), o.rho, o.seed, o.threads);
    emit(o, solve_report(run, o.rho, o.seed).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mirror-array IRS visible-light channel simulator and allocator"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario_path, "Scenario JSON file (default: built-in reference scenario)");
        sub->add_option("--out", o.out_path, "Output file (default: stdout)");
        sub->add_option("--threads", o.threads, "Worker threads; output does not depend on this")
            ->check(CLI::PositiveNumber);
    };

    auto* impulse = app.add_subcommand("impulse", "Per-AP impulse responses at one receiver position (CSV)");
    common(impulse);
    impulse->add_option("--user", o.user, "Receiver position x,y,z in meters");

    auto* power = app.add_subcommand("sweep-power", "Mean sum rate versus transmit power (CSV)");
    auto* blockage = app.add_subcommand("sweep-blockage", "Mean sum rate versus LoS blockage ratio (CSV)");
    for (auto* sub : {power, blockage}) {
        common(sub);
        sub->add_option("--seed", o.seed, "Base seed for per-trial user placement and blockage");
        sub->add_option("--trials", o.trials, "Trials per grid point");
        sub->add_option("--variants", o.variants, "Comma list of LoSOnly,LoSPlusDiffuse,IRS_1Array,IRS_2Arrays");
        sub->add_option("--grid", o.grid, "Comma list of grid values (ascending)");
    }

    auto* solve_cmd = app.add_subcommand("solve", "Allocate APs and mirrors for the scenario's users (JSON report)");
    common(solve_cmd);
    solve_cmd->add_option("--rho", o.rho, "LoS blockage ratio in [0,1]");
    solve_cmd->add_option("--seed", o.seed, "Blockage mask seed");

    auto* defaults = app.add_subcommand("default-scenario", "Write the reference scenario as JSON");
    defaults->add_option("--out", o.out_path, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*impulse) cmd_impulse(o);
        else if (*power) cmd_sweep(o, SweepVariable::PowerW);
        else if (*blockage) cmd_sweep(o, SweepVariable::BlockageRatio);
        else if (*solve_cmd) cmd_solve(o);
        else if (*defaults) emit(o, save_scenario(default_scenario()));
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SearchSpaceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
