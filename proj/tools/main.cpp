// detmet: estimate malware-detection metrics from an unlabeled detector-label
// matrix, and validate the estimators on synthetic data with known truth.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "detmet/adjusted.hpp"
#include "detmet/config.hpp"
#include "detmet/csv_io.hpp"
#include "detmet/evaluation.hpp"
#include "detmet/naive.hpp"
#include "detmet/report_json.hpp"
#include "detmet/synthetic.hpp"
#include "detmet/voting.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Outputs created by the running command; removed again if it fails partway.
std::vector<fs::path> g_created;

void track(const fs::path& path) { g_created.push_back(path); }

void remove_partial_outputs() {
    for (const auto& path : g_created) {
        std::error_code ec;
        fs::remove(path, ec);
    }
}

void write_tracked(const std::string& path, const std::string& text) {
    track(path);
    detmet::write_text_file(path, text);
}

struct CommonFlags {
    std::string mode = "exact";
    std::int64_t mc_samples = 10'000;
    std::uint64_t seed = 1;
    int threads = 0;

    detmet::ProbEval prob_eval() const {
        detmet::ProbEval eval;
        if (mode == "exact") eval.mode = detmet::TailMode::Exact;
        else if (mode == "mc") eval.mode = detmet::TailMode::MonteCarlo;
        else throw detmet::ConfigError("--mode must be exact or mc");
        eval.mc.n_samples = mc_samples;
        eval.mc.seed = seed;
        return eval;
    }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--mode", flags.mode, "Tail evaluation: exact or mc")->default_str("exact");
    cmd->add_option("--mc-samples", flags.mc_samples, "Monte Carlo sample budget");
    cmd->add_option("--seed", flags.seed, "Master seed");
    cmd->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
}

json resolved_flags_json(const CommonFlags& flags) {
    // worker count stays out: it is an execution detail, never a numeric input
    json out;
    out["mode"] = flags.mode;
    out["mc_samples"] = flags.mc_samples;
    out["seed"] = flags.seed;
    return out;
}

detmet::SubsetPlanSpec parse_plan_file(const std::string& path, std::uint64_t default_seed) {
    std::istringstream in(detmet::read_file(path));
    detmet::SubsetPlanSpec spec;
    spec.seed = default_seed;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        // trim
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        line = line.substr(begin, end - begin + 1);

        detmet::SubsetPlanSpec::Step step;
        if (line.rfind("seed", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw detmet::ConfigError("plan line " + std::to_string(line_no) + ": expected seed = <n>");
            spec.seed = std::stoull(line.substr(eq + 1));
            continue;
        }
        if (line == "all") {
            step.all = true;
        } else if (line[0] == '+') {
            step.random_add = std::stoi(line.substr(1));
        } else {
            std::size_t start = 0;
            while (start <= line.size()) {
                const auto comma = line.find(',', start);
                const std::string token =
                    comma == std::string::npos ? line.substr(start) : line.substr(start, comma - start);
                const auto b = token.find_first_not_of(" \t");
                if (b != std::string::npos) {
                    const auto e = token.find_last_not_of(" \t");
                    step.named.push_back(token.substr(b, e - b + 1));
                }
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (step.named.empty())
                throw detmet::ConfigError("plan line " + std::to_string(line_no) + ": empty subset");
        }
        spec.steps.push_back(std::move(step));
    }
    if (spec.steps.empty()) throw detmet::ConfigError("subset plan has no steps");
    return spec;
}

void report_drops(const detmet::IngestStats& stats) {
    for (const auto& diag : stats.diagnostics) std::cerr << "dropped " << diag << '\n';
    if (stats.rows_dropped > 0)
        std::cerr << "dropped " << stats.rows_dropped << " of "
                  << stats.rows_dropped + stats.rows_accepted << " rows\n";
}

int cmd_vote(const std::string& input, bool lenient, const std::string& out_path) {
    detmet::IngestOptions options;
    options.lenient = lenient;
    const detmet::IngestResult in = detmet::ingest(input, {}, options);
    report_drops(in.stats);
    const detmet::VoteResult votes = detmet::majority_vote(in.matrix);
    std::ostringstream out;
    detmet::write_votes_csv(in.matrix, votes, out);
    if (out_path == "-") std::cout << out.str();
    else write_tracked(out_path, out.str());
    return 0;
}

int cmd_estimate(const std::string& input, const std::optional<std::string>& truth_path,
                 bool lenient, const CommonFlags& flags, const std::string& out_path,
                 const std::optional<std::string>& csv_path) {
    detmet::IngestOptions options;
    options.lenient = lenient;
    const detmet::IngestResult in = detmet::ingest(input, truth_path, options);
    report_drops(in.stats);
    const detmet::ProbEval eval = flags.prob_eval();
    const detmet::VoteResult votes = detmet::majority_vote(in.matrix);
    const detmet::MetricEstimates naive = detmet::naive_estimates(in.matrix, votes);
    detmet::MetricEstimates adjusted;
    if (in.matrix.detectors() >= 2) {
        adjusted = detmet::full_adjust_from_naive(naive, in.matrix.files(), eval);
    } else {
        adjusted.kind = detmet::EstimateKind::Adjusted;
        adjusted.fp.assign(1, detmet::Estimate::unavailable());
        adjusted.fn.assign(1, detmet::Estimate::unavailable());
        adjusted.ppv.assign(1, detmet::Estimate::unavailable());
        adjusted.npv.assign(1, detmet::Estimate::unavailable());
        std::cerr << "note: adjustment needs >= 2 detectors; reporting naive only\n";
    }
    json report = detmet::build_estimate_report(
        detmet::EstimateReportInputs{in.matrix, naive, adjusted, eval, in.truth});
    report["flags"] = resolved_flags_json(flags);
    report["input"] = input;
    const std::string text = report.dump(2) + "\n";
    if (out_path == "-") std::cout << text;
    else write_tracked(out_path, text);
    if (csv_path) {
        std::ostringstream csv;
        csv << "metric,detector,kind,value,available\n";
        const auto rows = [&](const detmet::MetricEstimates& est) {
            const auto row = [&](const char* metric, const std::string& det, const detmet::Estimate& e) {
                csv << metric << ',' << det << ',' << to_string(est.kind) << ',';
                if (e.available) {
                    csv.precision(17);
                    csv << e.value;
                }
                csv << ',' << (e.available ? 1 : 0) << '\n';
            };
            row("pi1", "-", est.pi1);
            for (int j = 0; j < est.detectors(); ++j) {
                const auto sj = static_cast<std::size_t>(j);
                const std::string& name = in.matrix.detector_names[sj];
                row("fp", name, est.fp[sj]);
                row("fn", name, est.fn[sj]);
                row("ppv", name, est.ppv[sj]);
                row("npv", name, est.npv[sj]);
            }
        };
        rows(naive);
        rows(adjusted);
        write_tracked(*csv_path, csv.str());
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::optional<std::string>& out_dir_flag,
                 int replicate) {
    const detmet::RunConfig run = detmet::parse_run_config(config_path);
    const std::string out_dir = out_dir_flag.value_or(run.out_dir.value_or("."));
    fs::create_directories(out_dir);
    const detmet::SimConfig cfg = run.sim_config();
    const auto profiles = detmet::draw_profiles(cfg);
    const detmet::SyntheticDataset ds =
        cfg.perturbation_delta > 0.0 ? detmet::generate_perturbed(cfg, profiles, replicate)
                                     : detmet::generate_replicate(cfg, profiles, replicate);
    const fs::path base(out_dir);
    track(base / "matrix.csv");
    detmet::write_matrix_csv(ds.matrix, (base / "matrix.csv").string());
    track(base / "truth.csv");
    detmet::write_truth_csv(ds.matrix.file_ids, ds.truth, (base / "truth.csv").string());
    {
        std::ostringstream out;
        detmet::write_profiles_csv(ds.matrix.detector_names, ds.profiles, out);
        write_tracked((base / "profiles.csv").string(), out.str());
    }
    json stamp;
    stamp["artifact"] = detmet::artifact_stamp();
    stamp["config"] = detmet::config_echo_json(run);
    stamp["replicate"] = replicate;
    write_tracked((base / "dataset.json").string(), stamp.dump(2) + "\n");
    std::cout << "wrote " << (base / "matrix.csv").string() << " (" << ds.matrix.files() << " x "
              << ds.matrix.detectors() << ")\n";
    return 0;
}

int cmd_sweep(const std::string& input, const std::string& plan_path, bool lenient,
              const CommonFlags& flags, const std::string& out_dir) {
    detmet::IngestOptions options;
    options.lenient = lenient;
    const detmet::IngestResult in = detmet::ingest(input, {}, options);
    report_drops(in.stats);
    const detmet::SubsetPlanSpec spec = parse_plan_file(plan_path, flags.seed);
    const detmet::SubsetPlan plan = spec.resolve(in.matrix);
    const auto reports = detmet::subset_sweep(in.matrix, plan, flags.prob_eval());
    fs::create_directories(out_dir);
    const fs::path base(out_dir);
    json out;
    out["artifact"] = detmet::artifact_stamp();
    out["flags"] = resolved_flags_json(flags);
    out["input"] = input;
    out["plan_seed"] = plan.seed;
    out["subsets"] = detmet::subset_reports_to_json(reports, in.matrix.detector_names);
    write_tracked((base / "sweep.json").string(), out.dump(2) + "\n");
    write_tracked((base / "sweep_series.csv").string(),
                  detmet::subset_reports_to_csv(reports, in.matrix.detector_names));
    std::cout << "wrote " << (base / "sweep.json").string() << " (" << reports.size()
              << " subsets)\n";
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::optional<std::string>& out_dir_flag,
                 const CLI::App* cmd, const CommonFlags& flags) {
    detmet::RunConfig run = detmet::parse_run_config(config_path);
    // flags that were actually passed override the config file
    if (cmd->count("--seed") > 0) run.seed = flags.seed;
    if (cmd->count("--threads") > 0) run.threads = flags.threads;
    if (cmd->count("--mode") > 0)
        run.mode = flags.mode == "mc" ? detmet::TailMode::MonteCarlo : detmet::TailMode::Exact;
    if (cmd->count("--mc-samples") > 0) run.mc_samples = flags.mc_samples;
    const std::string out_dir = out_dir_flag.value_or(run.out_dir.value_or("."));
    fs::create_directories(out_dir);

    detmet::ReplicatedRunRequest request;
    request.cfg = run.sim_config();
    request.run_naive = run.run_naive();
    request.run_adjusted = run.run_adjusted();
    request.keep_replicates = true;
    request.eval = run.prob_eval();
    request.threads = run.threads;
    const detmet::ExperimentReport report = detmet::run_replicated(request);

    json out = detmet::experiment_report_to_json(report);
    out["config_echo"] = detmet::config_echo_json(run);
    const fs::path base(out_dir);
    write_tracked((base / "report.json").string(), out.dump(2) + "\n");
    write_tracked((base / "report_summary.csv").string(), detmet::experiment_report_to_csv(report));
    write_tracked((base / "report_series.csv").string(), detmet::replicate_series_to_csv(report));
    std::cout << "wrote " << (base / "report.json").string() << " (" << report.replicates
              << " replicates)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detector metric estimation from unlabeled scan matrices"};
    app.require_subcommand(1);

    // vote
    auto* vote = app.add_subcommand("vote", "Majority-vote a label matrix");
    std::string vote_input, vote_out = "-";
    bool vote_lenient = false;
    vote->add_option("--input", vote_input, "Matrix CSV")->required();
    vote->add_option("--out", vote_out, "Output CSV path ('-' = stdout)");
    vote->add_flag("--lenient", vote_lenient, "Drop bad rows instead of aborting");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Naive + adjusted metric estimates");
    std::string est_input, est_out = "-";
    std::optional<std::string> est_truth, est_csv;
    bool est_lenient = false;
    CommonFlags est_flags;
    estimate->add_option("--input", est_input, "Matrix CSV")->required();
    estimate->add_option("--truth", est_truth, "Companion truth CSV");
    estimate->add_option("--out", est_out, "Report JSON path ('-' = stdout)");
    estimate->add_option("--csv", est_csv, "Optional flat CSV of the estimates");
    estimate->add_flag("--lenient", est_lenient, "Drop bad rows instead of aborting");
    add_common_flags(estimate, est_flags);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
    std::string sim_config;
    std::optional<std::string> sim_out_dir;
    int sim_replicate = 0;
    simulate->add_option("--config", sim_config, "Run configuration file")->required();
    simulate->add_option("--out-dir", sim_out_dir, "Output directory");
    simulate->add_option("--replicate", sim_replicate, "Replicate index to materialize");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Estimate over nested detector subsets");
    std::string sweep_input, sweep_plan, sweep_out_dir = ".";
    bool sweep_lenient = false;
    CommonFlags sweep_flags;
    sweep->add_option("--input", sweep_input, "Matrix CSV")->required();
    sweep->add_option("--subset-plan", sweep_plan, "Subset plan file")->required();
    sweep->add_option("--out-dir", sweep_out_dir, "Output directory");
    sweep->add_flag("--lenient", sweep_lenient, "Drop bad rows instead of aborting");
    add_common_flags(sweep, sweep_flags);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Replicated runs against known truth");
    std::string eval_config;
    std::optional<std::string> eval_out_dir;
    CommonFlags eval_flags;
    evaluate->add_option("--config", eval_config, "Run configuration file")->required();
    evaluate->add_option("--out-dir", eval_out_dir, "Output directory");
    add_common_flags(evaluate, eval_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (vote->parsed()) return cmd_vote(vote_input, vote_lenient, vote_out);
        if (estimate->parsed())
            return cmd_estimate(est_input, est_truth, est_lenient, est_flags, est_out, est_csv);
        if (simulate->parsed()) return cmd_simulate(sim_config, sim_out_dir, sim_replicate);
        if (sweep->parsed())
            return cmd_sweep(sweep_input, sweep_plan, sweep_lenient, sweep_flags, sweep_out_dir);
        if (evaluate->parsed()) return cmd_evaluate(eval_config, eval_out_dir, evaluate, eval_flags);
    } catch (const std::exception& err) {
        remove_partial_outputs();
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
