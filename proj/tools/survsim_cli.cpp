// Command line front end. Talks to the simulator exclusively through the
// C interface in survsim/survsim.h.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <survsim/survsim.h>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

struct ScenarioDeleter {
    void operator()(survsim_scenario* p) const { survsim_scenario_free(p); }
};
struct ResultDeleter {
    void operator()(survsim_result* p) const { survsim_result_free(p); }
};
using ScenarioPtr = std::unique_ptr<survsim_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<survsim_result, ResultDeleter>;

int exit_code_for(survsim_status st) {
    switch (st) {
        case SURVSIM_OK:
            return kExitOk;
        case SURVSIM_ERR_CONFIG:
        case SURVSIM_ERR_ARG:
            return kExitConfigError;
        default:
            return kExitRunFailure;
    }
}

int report_error(survsim_status st) {
    std::cerr << "error: " << survsim_last_error() << "\n";
    return exit_code_for(st);
}

ScenarioPtr load_scenario(const std::string& path, survsim_status& st) {
    survsim_scenario* raw = nullptr;
    st = survsim_scenario_from_file(path.c_str(), &raw);
    return ScenarioPtr(raw);
}

bool write_file(const fs::path& path, const char* text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.flush();
    if (!out) {
        std::cerr << "error: cannot write " << path.string() << "\n";
        return false;
    }
    return true;
}

/// Runs one scenario and emits the requested formats either into `out_dir`
/// or to stdout when no directory is given.
int run_and_emit(const survsim_scenario* sc, bool check_invariants,
                 const std::vector<std::string>& formats,
                 const std::optional<fs::path>& out_dir) {
    survsim_result* raw = nullptr;
    const survsim_status st = survsim_run(sc, check_invariants ? 1 : 0, &raw);
    ResultPtr result(raw);
    if (st != SURVSIM_OK) return report_error(st);

    if (out_dir) {
        std::error_code ec;
        fs::create_directories(*out_dir, ec);
        if (ec) {
            std::cerr << "error: cannot create " << out_dir->string() << ": "
                      << ec.message() << "\n";
            return kExitRunFailure;
        }
    }
    for (const std::string& fmt : formats) {
        const char* text = nullptr;
        const char* filename = nullptr;
        if (fmt == "trace") {
            text = survsim_result_trace(result.get());
            filename = "trace.txt";
        } else if (fmt == "metrics-csv") {
            text = survsim_result_metrics_csv(result.get());
            filename = "metrics.csv";
        } else {
            text = survsim_result_metrics_json(result.get());
            filename = "metrics.json";
        }
        if (out_dir) {
            if (!write_file(*out_dir / filename, text)) return kExitRunFailure;
        } else {
            std::cout << text;
        }
    }
    return kExitOk;
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : csv) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"survivable grid-cluster network simulator"};
    app.set_version_flag("--version", std::string(survsim_version()));
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_dir;
    std::vector<std::string> formats;
    bool check_invariants = false;
    std::string sweep_param;
    std::string sweep_values;

    CLI::App* cmd_run = app.add_subcommand("run", "run one scenario");
    cmd_run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    cmd_run->add_option("--seed-override", seed_override, "replace the scenario seed");
    cmd_run->add_option("--out", out_dir, "output directory (default: stdout)");
    cmd_run
        ->add_option("--format", formats, "outputs to produce (default: metrics-json)")
        ->check(CLI::IsMember({"trace", "metrics-csv", "metrics-json"}));
    cmd_run->add_flag("--check-invariants", check_invariants,
                      "run consistency sweeps after every timestamp");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run one scenario per value");
    cmd_sweep->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    cmd_sweep->add_option("--param", sweep_param, "dotted key path, e.g. seed")
        ->required();
    cmd_sweep
        ->add_option("--values", sweep_values, "comma separated JSON values, e.g. 1,2,3")
        ->required();
    cmd_sweep->add_option("--out", out_dir, "output root directory")->required();
    cmd_sweep
        ->add_option("--format", formats, "outputs to produce (default: metrics-json)")
        ->check(CLI::IsMember({"trace", "metrics-csv", "metrics-json"}));
    cmd_sweep->add_flag("--check-invariants", check_invariants,
                        "run consistency sweeps after every timestamp");

    CLI::App* cmd_validate = app.add_subcommand("validate", "check a scenario file");
    cmd_validate->add_option("--scenario", scenario_path, "scenario JSON file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    if (formats.empty()) formats.push_back("metrics-json");

    survsim_status st = SURVSIM_OK;
    ScenarioPtr scenario = load_scenario(scenario_path, st);
    if (st != SURVSIM_OK) return report_error(st);

    if (cmd_validate->parsed()) return kExitOk;

    if (cmd_run->parsed()) {
        if (seed_override) {
            st = survsim_scenario_set(scenario.get(), "seed",
                                      std::to_string(*seed_override).c_str());
            if (st != SURVSIM_OK) return report_error(st);
        }
        std::optional<fs::path> dir;
        if (!out_dir.empty()) dir = fs::path(out_dir);
        return run_and_emit(scenario.get(), check_invariants, formats, dir);
    }

    // sweep: a fresh handle per value keeps runs independent.
    const std::vector<std::string> values = split_csv(sweep_values);
    for (const std::string& value : values) {
        if (value.empty()) {
            std::cerr << "error: empty value in --values\n";
            return kExitConfigError;
        }
    }
    // Validate every point before writing anything.
    std::vector<ScenarioPtr> points;
    for (const std::string& value : values) {
        ScenarioPtr point = load_scenario(scenario_path, st);
        if (st != SURVSIM_OK) return report_error(st);
        st = survsim_scenario_set(point.get(), sweep_param.c_str(), value.c_str());
        if (st != SURVSIM_OK) return report_error(st);
        points.push_back(std::move(point));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const fs::path dir = fs::path(out_dir) / (sweep_param + "=" + values[i]);
        const int code =
            run_and_emit(points[i].get(), check_invariants, formats, dir);
        if (code != kExitOk) return code;
    }
    return kExitOk;
}
