// Scenario-driven command-line front end: loads scenario files, dispatches
// to the library checks, prints a human-readable summary and (optionally)
// writes the machine-readable JSON report.
//
// Exit codes: 0 all checks pass, 2 a hypothesis-violation verdict occurred,
// 1 errors / failed checks / bad input.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "ribet/checks.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Cli {
    std::string scenario;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    long spairs = 0;
    int degree_bound = 0;
    int precision = 0;
    std::string primes;
    std::string check;
    int jobs = 1;
    bool list_checks = false;
    bool quiet = false;
};

ribet::checks::RunOptions options_from(const Cli& cli) {
    ribet::checks::RunOptions opt;
    if (cli.seed_set) opt.seed = cli.seed;
    if (cli.spairs > 0) opt.spairs = cli.spairs;
    if (cli.degree_bound > 0) opt.degree_bound = cli.degree_bound;
    if (cli.precision > 0) opt.precision = cli.precision;
    if (!cli.primes.empty()) {
        std::vector<long> ps;
        std::string cur;
        for (char c : cli.primes + ",") {
            if (c == ',') {
                if (!cur.empty()) ps.push_back(std::stol(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        opt.primes = ps;
    }
    opt.only_check = cli.check;
    return opt;
}

void print_report(const ordered_json& report, bool quiet) {
    if (quiet) return;
    const auto& sc = report["scenario"];
    std::cout << "scenario " << sc["name"].get<std::string>() << " (" << sc["kind"].get<std::string>()
              << "), seed " << report["seed"].get<std::uint64_t>() << "\n";
    for (const auto& c : report["checks"]) {
        std::string v = c["verdict"].get<std::string>();
        std::cout << "  [" << v << "]" << std::string(v.size() < 9 ? 9 - v.size() : 0, ' ')
                  << c["id"].get<std::string>() << " - " << c["statement"].get<std::string>();
        std::cout.setf(std::ios::fixed);
        std::cout.precision(1);
        std::cout << " (" << c["ms"].get<double>() << " ms)\n";
        if (v != "pass") {
            for (auto it = c["details"].begin(); it != c["details"].end(); ++it)
                std::cout << "      " << it.key() << ": " << it.value().dump() << "\n";
        }
    }
    if (report.contains("pipeline_error"))
        std::cout << "  pipeline error: " << report["pipeline_error"].get<std::string>() << "\n";
    const auto& s = report["summary"];
    std::cout << "  summary: " << s["pass"] << " pass, " << s["fail"] << " fail, " << s["violation"]
              << " violation, " << s["error"] << " error\n";
}

int run_single(const std::string& path, const Cli& cli) {
    ordered_json report;
    try {
        auto sc = ribet::scenario::load_scenario(path);
        report = ribet::checks::run_scenario(sc, options_from(cli));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    print_report(report, cli.quiet);
    if (!cli.out.empty()) {
        std::ofstream out(cli.out);
        if (!out) {
            std::cerr << "error: cannot write " << cli.out << "\n";
            return 1;
        }
        out << report.dump(2) << "\n";
    }
    return ribet::checks::exit_code_for(report);
}

int run_directory(const std::string& dir, const Cli& cli) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "error: no scenario files in " << dir << "\n";
        return 1;
    }
    std::vector<ordered_json> reports(files.size());
    std::vector<int> codes(files.size(), 1);
    std::mutex mu;
    size_t next = 0;
    auto worker = [&]() {
        while (true) {
            size_t idx;
            {
                std::lock_guard<std::mutex> lk(mu);
                if (next >= files.size()) return;
                idx = next++;
            }
            try {
                auto sc = ribet::scenario::load_scenario(files[idx].string());
                reports[idx] = ribet::checks::run_scenario(sc, options_from(cli));
                codes[idx] = ribet::checks::exit_code_for(reports[idx]);
            } catch (const std::exception& e) {
                reports[idx] = ordered_json{{"error", e.what()}, {"file", files[idx].string()}};
                codes[idx] = 1;
            }
        }
    };
    int jobs = std::max(1, cli.jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int worst = 0;
    for (size_t i = 0; i < files.size(); ++i) {
        if (reports[i].contains("checks")) {
            print_report(reports[i], cli.quiet);
        } else {
            std::cerr << "error in " << files[i].string() << ": " << reports[i]["error"].get<std::string>() << "\n";
        }
        // exit-code severity: errors/failures dominate violations
        if (codes[i] == 1 || worst == 1) {
            worst = 1;
        } else {
            worst = std::max(worst, codes[i]);
        }
        if (!cli.out.empty() && reports[i].contains("checks")) {
            fs::create_directories(cli.out);
            std::ofstream out(fs::path(cli.out) / (files[i].stem().string() + ".report.json"));
            out << reports[i].dump(2) << "\n";
        }
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic verification of Ribet-style constructions over finite local rings"};
    Cli cli;
    auto* seed_opt = app.add_option("--seed", cli.seed, "override the scenario seed")->envname("RIBET_SEED");
    app.add_option("--scenario", cli.scenario, "scenario file (or directory of scenarios)")
        ->envname("RIBET_SCENARIO");
    app.add_option("--out", cli.out, "write the JSON report here (directory mode: one file per scenario)")
        ->envname("RIBET_OUT");
    app.add_option("--budget-spairs", cli.spairs, "Groebner S-pair budget override")->envname("RIBET_BUDGET_SPAIRS");
    app.add_option("--degree-bound", cli.degree_bound, "membership-certificate degree bound override")
        ->envname("RIBET_DEGREE_BOUND");
    app.add_option("--precision", cli.precision, "truncated-DVR precision override")->envname("RIBET_PRECISION");
    app.add_option("--primes", cli.primes, "comma-separated primes for graded exactness")->envname("RIBET_PRIMES");
    app.add_option("--check", cli.check, "run a single check id")->envname("RIBET_CHECK");
    app.add_option("--jobs", cli.jobs, "worker threads for directory batches")->envname("RIBET_JOBS");
    app.add_flag("--list-checks", cli.list_checks, "print the check catalog and exit");
    app.add_flag("--quiet", cli.quiet, "suppress the human-readable report");

    CLI11_PARSE(app, argc, argv);
    cli.seed_set = seed_opt->count() > 0;

    if (cli.list_checks) {
        for (const auto& [id, statement] : ribet::checks::catalog())
            std::cout << id << "  -  " << statement << "\n";
        return 0;
    }
    if (cli.scenario.empty()) {
        std::cerr << "error: --scenario is required (or --list-checks)\n";
        return 1;
    }
    if (fs::is_directory(cli.scenario)) return run_directory(cli.scenario, cli);
    return run_single(cli.scenario, cli);
}
