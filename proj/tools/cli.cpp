#include "cli.hpp"

#include "bridgewatch/comms.hpp"
#include "bridgewatch/error.hpp"
#include "bridgewatch/ingest.hpp"
#include "bridgewatch/report.hpp"
#include "bridgewatch/simulate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace bridgewatch {

namespace fs = std::filesystem;

namespace {

std::shared_ptr<spdlog::logger> make_logger() {
    auto logger = spdlog::get("bridgewatch");
    if (!logger) {
        logger = spdlog::stderr_logger_st("bridgewatch");
        logger->set_pattern("bridgewatch: [%l] %v");
    }
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("BRIDGEWATCH_LOG"); env != nullptr && *env != '\0') {
        level = spdlog::level::from_str(env);
    }
    logger->set_level(level);
    return logger;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

struct AnalyzeArgs {
    std::string session;
    std::string config;
    std::string out;
    std::string formats = "json,csv,svg";
    bool tolerant = false;
};

int run_analyze(const AnalyzeArgs& a, spdlog::logger& log) {
    const std::vector<std::string> formats = split_list(a.formats);
    for (const std::string& f : formats) {
        if (f != "json" && f != "csv" && f != "svg") {
            throw CLI::ValidationError("--format", "unknown format '" + f + "' (expected json, csv, svg)");
        }
    }
    LoadOptions opts;
    opts.mode = a.tolerant ? ParseMode::Tolerant : ParseMode::Strict;
    LoadedSession loaded = load_session(a.session, opts);
    if (loaded.skipped_lines > 0) {
        log.warn("skipped {} malformed line(s)", loaded.skipped_lines);
    }
    if (loaded.dropped_by_offsets > 0) {
        log.warn("clock offsets moved {} record(s) before t=0; dropped", loaded.dropped_by_offsets);
    }
    for (const Violation& v : loaded.validation.violations) {
        log.warn("{}[{}]: {}", v.stream, v.index, v.rule);
    }

    AnalysisConfig config = load_config(a.config);
    EntityLexicon lexicon;
    if (!config.entities_path.empty()) {
        lexicon = parse_lexicon_json(read_file(config.entities_path));
    }
    std::vector<ChecklistDefinition> checklists;
    for (const std::string& p : config.checklist_paths) {
        checklists.push_back(parse_checklist_json(read_file(p)));
    }

    SessionReport report = build_report(loaded.session, config, lexicon, checklists);
    for (const std::string& flag : report.meta.flags) {
        log.warn("{}", flag);
    }

    const fs::path out(a.out);
    fs::create_directories(out);
    for (const std::string& f : formats) {
        if (f == "json") {
            write_file(out / "report.json", render_json(report));
        } else if (f == "csv") {
            for (std::string_view section : kCsvSections) {
                write_file(out / (std::string(section) + ".csv"), render_csv(report, section));
            }
        } else {
            for (std::string_view chart : kCharts) {
                write_file(out / (std::string(chart) + ".svg"), render_svg(report, chart));
            }
        }
    }
    log.info("report for {} written to {}", report.meta.session_id, out.string());
    return 0;
}

SessionReport load_report(const std::string& where) {
    fs::path p(where);
    if (fs::is_directory(p)) {
        p /= "report.json";
    }
    return parse_report_json(read_file(p));
}

int run_compare(const std::string& a, const std::string& b, const std::string& out_dir) {
    ComparisonReport cmp = compare_reports(load_report(a), load_report(b));
    const fs::path out(out_dir);
    fs::create_directories(out);
    write_file(out / "comparison.json", render_comparison_json(cmp));
    write_file(out / "comparison.csv", render_comparison_csv(cmp));
    write_file(out / "comparison.svg", render_comparison_svg(cmp));
    return 0;
}

int run_simulate(const std::string& scenario_file, const std::string& out, std::optional<std::uint64_t> seed,
                 spdlog::logger& log) {
    Scenario s = scenario_file.empty() ? default_scenario() : parse_scenario_json(read_file(scenario_file));
    if (seed) {
        s.seed = *seed;
    }
    generate_session(s, out);
    log.info("scenario {} (seed {}) written to {}", s.name, s.seed, out);
    return 0;
}

int run_wer(const std::string& ref, const std::string& hyp) {
    WerResult r = word_error_rate(read_file(ref), read_file(hyp));
    std::cout << fmt::format("wer {:.6f}\n", r.wer);
    std::cout << fmt::format("substitutions {}\ndeletions {}\ninsertions {}\nreference_tokens {}\n", r.substitutions,
                             r.deletions, r.insertions, r.ref_token_count);
    return 0;
}

int run_validate(const std::string& dir, spdlog::logger& log) {
    LoadOptions opts;
    opts.mode = ParseMode::Tolerant;
    LoadedSession loaded = load_session(dir, opts);
    for (const Violation& v : loaded.validation.violations) {
        std::cout << fmt::format("{}[{}]: {}\n", v.stream, v.index, v.rule);
    }
    if (loaded.skipped_lines > 0) {
        std::cout << fmt::format("skipped_lines {}\n", loaded.skipped_lines);
    }
    if (!loaded.validation.ok() || loaded.skipped_lines > 0) {
        log.error("session {} is invalid: {} violation(s), {} malformed line(s)", loaded.session.id,
                  loaded.validation.violations.size(), loaded.skipped_lines);
        return 2;
    }
    std::cout << fmt::format("ok {} gaze {} panels {} utterances {} events\n", loaded.session.gaze.size(),
                             loaded.session.panels.size(), loaded.session.utterances.size(),
                             loaded.session.events.size());
    return 0;
}

int run_check(const std::string& report_path, const std::string& truth_path, spdlog::logger& log) {
    SessionReport report = load_report(report_path);
    GroundTruth truth = parse_ground_truth_json(read_file(truth_path));
    std::size_t failed = 0;
    for (const AssertionResult& r : check_against_ground_truth(report, truth)) {
        std::cout << fmt::format("{} {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
        failed += r.passed ? 0 : 1;
    }
    if (failed > 0) {
        log.error("{} ground-truth assertion(s) failed", failed);
        return 2;
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    auto log = make_logger();

    CLI::App app{"Maritime training session analytics"};
    app.name("bridgewatch");
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "Analyse a session directory and write report files");
    an->add_option("--session", analyze.session, "Session directory")->required();
    an->add_option("--config", analyze.config, "Analysis config JSON")->required();
    an->add_option("--out", analyze.out, "Output directory")->required();
    an->add_option("--format", analyze.formats, "Comma-separated subset of json,csv,svg");
    an->add_flag("--tolerant", analyze.tolerant, "Skip malformed lines instead of failing");

    std::string cmp_a;
    std::string cmp_b;
    std::string cmp_out;
    auto* cmp = app.add_subcommand("compare", "Compare two reports");
    cmp->add_option("--a", cmp_a, "Report directory or report.json")->required();
    cmp->add_option("--b", cmp_b, "Report directory or report.json")->required();
    cmp->add_option("--out", cmp_out, "Output directory")->required();

    std::string scenario;
    std::string sim_out;
    std::optional<std::uint64_t> seed;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic session with ground truth");
    sim->add_option("--scenario", scenario, "Scenario JSON (default: built-in engine failure)");
    sim->add_option("--out", sim_out, "Output session directory")->required();
    sim->add_option("--seed", seed, "Override the scenario seed");

    std::string ref;
    std::string hyp;
    auto* wer = app.add_subcommand("wer", "Word error rate between two text files");
    wer->add_option("--ref", ref, "Reference transcript")->required();
    wer->add_option("--hyp", hyp, "Hypothesis transcript")->required();

    std::string val_dir;
    auto* val = app.add_subcommand("validate", "Check a session directory against the input schema");
    val->add_option("--session", val_dir, "Session directory")->required();

    std::string report_path;
    std::string truth_path;
    auto* chk = app.add_subcommand("check", "Evaluate a report against a simulator ground truth");
    chk->add_option("--report", report_path, "Report directory or report.json")->required();
    chk->add_option("--truth", truth_path, "ground_truth.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "bridgewatch: " << e.what() << "\n";
        std::cerr << "run 'bridgewatch --help' for usage\n";
        return 1;
    }

    try {
        if (an->parsed()) {
            return run_analyze(analyze, *log);
        }
        if (cmp->parsed()) {
            return run_compare(cmp_a, cmp_b, cmp_out);
        }
        if (sim->parsed()) {
            return run_simulate(scenario, sim_out, seed, *log);
        }
        if (wer->parsed()) {
            return run_wer(ref, hyp);
        }
        if (val->parsed()) {
            return run_validate(val_dir, *log);
        }
        if (chk->parsed()) {
            return run_check(report_path, truth_path, *log);
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << "bridgewatch: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        log->error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        log->critical("internal error: {}", e.what());
        return 3;
    } catch (...) {
        log->critical("internal error");
        return 3;
    }
    return 1;
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("bridgewatch");
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace bridgewatch
