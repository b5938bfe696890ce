// End-to-end checks of the installed command line tool. Spawns the real
// binary; argv[1] is the tool path, argv[2] the shipped scenario directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

#define EXPECT(cond)                                                          \
    do {                                                                      \
        if (!(cond)) {                                                        \
            std::cerr << "FAIL " << __FILE__ << ":" << __LINE__ << ": "       \
                      << #cond << "\n";                                       \
            ++g_failures;                                                     \
        }                                                                     \
    } while (0)

struct CliOutput {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string shquote(const std::string& s) { return "'" + s + "'"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path g_work;
std::string g_cli;

CliOutput run_cli(const std::string& args) {
    const fs::path out = g_work / "stdout.txt";
    const fs::path err = g_work / "stderr.txt";
    const std::string cmd = shquote(g_cli) + " " + args + " > " +
                            shquote(out.string()) + " 2> " + shquote(err.string());
    const int raw = std::system(cmd.c_str());
    CliOutput r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: cli_integration <cli-binary> <scenario-dir>\n";
        return 1;
    }
    g_cli = argv[1];
    const fs::path scenarios = argv[2];
    g_work = fs::current_path() / "cli_test_work";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    const std::string minimal = (scenarios / "minimal.json").string();

    {
        CliOutput r = run_cli("--version");
        EXPECT(r.exit_code == 0);
        EXPECT(r.out.find("0.1.0") != std::string::npos);
    }
    {
        CliOutput r = run_cli("validate --scenario " + shquote(minimal));
        EXPECT(r.exit_code == 0);
    }
    {
        const fs::path bad = g_work / "bad.json";
        std::ofstream(bad) << "{\"grid\": {\"width\": -5}}";
        CliOutput r = run_cli("validate --scenario " + shquote(bad.string()));
        EXPECT(r.exit_code == 2);
        EXPECT(r.err.find("error:") != std::string::npos);
    }
    {
        CliOutput r = run_cli("run --scenario " + shquote(minimal));
        EXPECT(r.exit_code == 0);
        EXPECT(!r.out.empty());
        EXPECT(r.out.front() == '{');  // metrics-json is the default format
    }
    {
        // Two runs into separate directories produce identical artifacts.
        const fs::path d1 = g_work / "run1";
        const fs::path d2 = g_work / "run2";
        const std::string fmts =
            " --format trace --format metrics-csv --format metrics-json";
        EXPECT(run_cli("run --check-invariants --scenario " + shquote(minimal) +
                       " --out " + shquote(d1.string()) + fmts)
                   .exit_code == 0);
        EXPECT(run_cli("run --check-invariants --scenario " + shquote(minimal) +
                       " --out " + shquote(d2.string()) + fmts)
                   .exit_code == 0);
        const std::string trace = slurp(d1 / "trace.txt");
        EXPECT(!trace.empty());
        EXPECT(trace == slurp(d2 / "trace.txt"));
        EXPECT(slurp(d1 / "metrics.json") == slurp(d2 / "metrics.json"));
        EXPECT(slurp(d1 / "metrics.csv").rfind("# schema=survsim-metrics-1", 0) == 0);
    }
    {
        // Seed override shows up in the trace header.
        CliOutput r = run_cli("run --scenario " + shquote(minimal) +
                              " --seed-override 4242 --format trace");
        EXPECT(r.exit_code == 0);
        EXPECT(r.out.find("seed=4242") != std::string::npos);
    }
    {
        const fs::path sweep = g_work / "sweep";
        CliOutput r = run_cli("sweep --scenario " + shquote(minimal) +
                              " --param seed --values 1,2 --out " +
                              shquote(sweep.string()));
        EXPECT(r.exit_code == 0);
        EXPECT(fs::exists(sweep / "seed=1" / "metrics.json"));
        EXPECT(fs::exists(sweep / "seed=2" / "metrics.json"));
    }
    {
        // One bad point rejects the whole sweep before any output appears.
        const fs::path sweep = g_work / "sweep_bad";
        CliOutput r = run_cli("sweep --scenario " + shquote(minimal) +
                              " --param weights.a1 --values 0.5,7.0 --out " +
                              shquote(sweep.string()));
        EXPECT(r.exit_code == 2);
        EXPECT(!fs::exists(sweep));
    }
    {
        CliOutput r = run_cli("run --no-such-flag");
        EXPECT(r.exit_code == 2);
    }
    {
        CliOutput r = run_cli("run --scenario /nonexistent.json");
        EXPECT(r.exit_code == 2);
        EXPECT(r.err.find("error:") != std::string::npos);
    }

    if (g_failures == 0) {
        std::cout << "cli integration: all checks passed\n";
        return 0;
    }
    std::cerr << "cli integration: " << g_failures << " check(s) failed\n";
    return 1;
}
