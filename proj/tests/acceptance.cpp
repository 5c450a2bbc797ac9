// Acceptance suite: one self-contained check per shipped claim, each printing
// a single PASS/FAIL line. Run all with no arguments or one with
// --criterion <k>.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "detmet/adjusted.hpp"
#include "detmet/asymptotics.hpp"
#include "detmet/csv_io.hpp"
#include "detmet/evaluation.hpp"
#include "detmet/naive.hpp"
#include "detmet/poisson_binomial.hpp"
#include "detmet/report_json.hpp"
#include "detmet/rng.hpp"
#include "detmet/synthetic.hpp"
#include "detmet/voting.hpp"

namespace fs = std::filesystem;
using namespace detmet;

namespace {

struct Check {
    std::ostringstream log;
    bool ok = true;

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            log << "    FAILED: " << what << '\n';
        }
    }

    void note(const std::string& what) { log << "    " << what << '\n'; }
};

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------------------
// 1. Closed-form trust identities at the benchmark anchors.
bool criterion_1(Check& check) {
    const double pi1 = 0.58579;
    const struct {
        double fp, fn, ppv, npv;
    } anchors[] = {
        {0.0952, 0.126, 0.92849, 0.83546},  {0.19, 0.044, 0.87678, 0.92866},
        {0.227, 0.0173, 0.8596, 0.96932},   {0.000617, 0.828, 0.99747, 0.46047},
        {0.00938, 0.339, 0.99007, 0.67387},
    };
    for (const auto& a : anchors) {
        const DetectorProfile p{a.fp, a.fn};
        check.expect(std::abs(p.ppv(pi1) - a.ppv) < 1e-4,
                     "ppv(" + format_double(a.fp) + ", " + format_double(a.fn) + ") = " +
                         format_double(p.ppv(pi1)) + ", expected " + format_double(a.ppv));
        check.expect(std::abs(p.npv(pi1) - a.npv) < 1e-4,
                     "npv(" + format_double(a.fp) + ", " + format_double(a.fn) + ") = " +
                         format_double(p.npv(pi1)) + ", expected " + format_double(a.npv));
    }
    return check.ok;
}

// ---------------------------------------------------------------------------
// 2. Homogeneous voting surface: good detectors make the vote near-perfect,
// poor ones keep it useless at any panel size.
bool criterion_2(Check& check) {
    check.expect(homogeneous_p11(20, 0.2) > 0.99, "n=20, miss 0.2 should exceed 0.99");
    check.expect(homogeneous_p11(50, 0.3) > 0.99, "n=50, miss 0.3 should exceed 0.99");
    // Poor regime, sampled above the 0.5 boundary (at exactly 0.5 the
    // tie-to-malicious rule pushes small even panels above 0.6).
    for (double miss : {0.51, 0.55, 0.6, 0.7, 0.85, 1.0}) {
        double prev_even = 1.1, prev_odd = 1.1;
        for (int n = 10; n <= 50; ++n) {
            const double p11 = homogeneous_p11(n, miss);
            check.expect(p11 <= 0.6,
                         "miss " + format_double(miss) + ", n=" + std::to_string(n) + ": p11 = " +
                             format_double(p11) + " exceeds 0.6");
            // ties make even and odd panels incomparable; monotone per parity
            double& prev = (n % 2 == 0) ? prev_even : prev_odd;
            check.expect(p11 <= prev + 1e-12,
                         "miss " + format_double(miss) + ", n=" + std::to_string(n) +
                             ": p11 increased along the parity ladder");
            prev = p11;
        }
    }
    return check.ok;
}

// ---------------------------------------------------------------------------
// 3. Monte Carlo tails agree with the exact oracle at the binomial rate.
bool criterion_3(Check& check) {
    Rng rng(20260808);
    const std::int64_t samples = 10'000;
    int within_band = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const int k = 1 + static_cast<int>(rng.next_below(30));
        Eigen::ArrayXd probs(k);
        for (int j = 0; j < k; ++j) probs[j] = rng.next_double();
        const auto threshold = static_cast<double>(rng.next_below(static_cast<std::uint64_t>(k) + 1));
        TailQuery query;
        switch (rng.next_below(3)) {
            case 0: query = TailQuery::at_most(threshold); break;
            case 1: query = TailQuery::less(threshold); break;
            default: query = TailQuery::at_least(threshold); break;
        }
        const double exact = exact_tail_probability(probs, query);
        McConfig cfg;
        cfg.n_samples = samples;
        cfg.seed = derive(9000, static_cast<std::uint64_t>(t));
        const double mc = mc_tail_probability(probs, query, cfg);
        const double band = 4.0 * std::sqrt(exact * (1.0 - exact) / static_cast<double>(samples));
        if (std::abs(mc - exact) <= band + 1e-12) ++within_band;
    }
    check.note("within-band trials: " + std::to_string(within_band) + "/100");
    check.expect(within_band >= 95, "fewer than 95 of 100 trials inside the 4-sigma band");
    return check.ok;
}

SimConfig slight_heterogeneity_config(int n, double epsilon, int replicates,
                                      std::uint64_t seed) {
    SimConfig cfg;
    cfg.m = 50'000;
    cfg.pi1 = 0.2;
    cfg.n = n;
    cfg.epsilon = epsilon;
    cfg.n_replicates = replicates;
    cfg.master_seed = seed;
    return cfg;
}

// ---------------------------------------------------------------------------
// 4. The voted-fraction estimator follows its stated asymptotic moments.
bool criterion_4(Check& check) {
    const SimConfig cfg = slight_heterogeneity_config(5, 0.1, 1'000, 101);
    ReplicatedRunRequest request;
    request.cfg = cfg;
    request.run_adjusted = false;
    const ExperimentReport report = run_replicated(request);

    const auto profiles = draw_profiles(cfg);
    const VoteProbs vote = vote_correct_probs(profiles);
    const VotedFractionMoments t1 = voted_fraction_moments(cfg.pi1, cfg.m, vote.p11, vote.p01);
    const QuantityReport* q = report.find("pi1", -1, EstimateKind::Naive);
    if (q == nullptr) {
        check.expect(false, "missing pi1 row");
        return false;
    }
    const double sigma = std::sqrt(t1.var);
    check.note("mean = " + format_double(t1.mean) + ", empirical mean = " +
               format_double(q->mean_estimate));
    check.note("sigma1^2 = " + format_double(t1.var) + ", empirical var = " +
               format_double(q->var_estimate));
    check.expect(std::abs(q->mean_estimate - t1.mean) <= 3.0 * sigma,
                 "empirical mean outside 3 sigma of mean");
    check.expect(std::abs(q->var_estimate - t1.var) <= 0.2 * t1.var,
                 "empirical variance off by more than 20%");
    return check.ok;
}

// ---------------------------------------------------------------------------
// 5. Per-detector plug-in estimators follow their stated asymptotic means.
bool criterion_5(Check& check) {
    const SimConfig cfg = slight_heterogeneity_config(5, 0.1, 1'000, 101);
    ReplicatedRunRequest request;
    request.cfg = cfg;
    request.run_adjusted = false;
    const ExperimentReport report = run_replicated(request);

    const auto profiles = draw_profiles(cfg);
    const std::int64_t m1 = cfg.malicious_count();
    const std::int64_t m0 = cfg.m - m1;
    for (int j = 0; j < cfg.n; ++j) {
        const AsymptoticMoments mom = detector_estimator_moments(profiles, j, m0, m1);
        const struct {
            const char* metric;
            MeanVar theory;
        } rows[] = {{"fp", mom.fp}, {"fn", mom.fn}, {"ppv", mom.ppv}, {"npv", mom.npv}};
        for (const auto& row : rows) {
            const QuantityReport* q = report.find(row.metric, j, EstimateKind::Naive);
            if (q == nullptr || !row.theory.available) {
                check.expect(false, std::string(row.metric) + " row missing");
                continue;
            }
            const double gap = std::abs(q->mean_estimate - row.theory.mean);
            check.expect(gap <= 3.0 * std::sqrt(row.theory.var),
                         std::string(row.metric) + " detector " + std::to_string(j + 1) +
                             ": |empirical mean - theory| = " + format_double(gap) +
                             " exceeds 3 sigma = " + format_double(3.0 * std::sqrt(row.theory.var)));
        }
    }
    return check.ok;
}

ExperimentReport fixture_run(int kappa, int replicates, std::uint64_t seed) {
    SimConfig cfg = fixture_prefix(truly_heterogeneous_fixture(), kappa);
    cfg.m = 20'000;
    cfg.n_replicates = replicates;
    cfg.master_seed = seed;
    ReplicatedRunRequest request;
    request.cfg = cfg;
    return run_replicated(request);
}

// ---------------------------------------------------------------------------
// 6. At kappa = 35 the corrected estimators beat the plug-in ones.
bool criterion_6(Check& check) {
    const ExperimentReport report = fixture_run(35, 100, 606);
    const QuantityReport* naive_pi = report.find("pi1", -1, EstimateKind::Naive);
    const QuantityReport* adj_pi = report.find("pi1", -1, EstimateKind::Adjusted);
    check.note("RAB(pi1): naive " + format_double(naive_pi->rab_percent) + "% vs adjusted " +
               format_double(adj_pi->rab_percent) + "%");
    check.expect(adj_pi->rab_percent < naive_pi->rab_percent,
                 "adjusted pi1 RAB should be below naive");
    for (int anchor : {3, 13, 23}) {
        const int j = anchor - 1;
        const QuantityReport* naive_fp = report.find("fp", j, EstimateKind::Naive);
        const QuantityReport* adj_fp = report.find("fp", j, EstimateKind::Adjusted);
        check.note("RAB(fp) detector " + std::to_string(anchor) + ": naive " +
                   format_double(naive_fp->rab_percent) + "% vs adjusted " +
                   format_double(adj_fp->rab_percent) + "%");
        check.expect(adj_fp->rab_percent < naive_fp->rab_percent,
                     "adjusted fp RAB should be below naive for detector " + std::to_string(anchor));
    }
    return check.ok;
}

// ---------------------------------------------------------------------------
// 7. At the full panel the two estimator sets coincide and hit the truth.
bool criterion_7(Check& check) {
    const ExperimentReport report = fixture_run(47, 100, 707);
    const QuantityReport* adj_pi = report.find("pi1", -1, EstimateKind::Adjusted);
    check.note("mean adjusted pi1 = " + format_double(adj_pi->mean_estimate));
    check.expect(std::abs(adj_pi->mean_estimate - 0.58579) < 0.01,
                 "mean adjusted pi1 should land within 0.01 of 0.58579");
    const QuantityReport* naive_pi = report.find("pi1", -1, EstimateKind::Naive);
    double max_gap = std::abs(adj_pi->mean_estimate - naive_pi->mean_estimate);
    check.expect(max_gap < 0.005, "pi1: adjusted and naive means differ by " + format_double(max_gap));
    for (const char* metric : {"fp", "fn", "ppv", "npv"}) {
        double gap_sum = 0.0;
        int count = 0;
        for (int j = 0; j < 47; ++j) {
            const QuantityReport* naive_q = report.find(metric, j, EstimateKind::Naive);
            const QuantityReport* adj_q = report.find(metric, j, EstimateKind::Adjusted);
            if (naive_q->n_used == 0 || adj_q->n_used == 0) continue;
            gap_sum += std::abs(naive_q->mean_estimate - adj_q->mean_estimate);
            ++count;
        }
        const double gap = gap_sum / count;
        check.note(std::string(metric) + ": mean |adjusted - naive| = " + format_double(gap));
        check.expect(gap < 0.005, std::string(metric) + " gap should be below 0.005");
    }
    return check.ok;
}

// ---------------------------------------------------------------------------
// 8. Slight-heterogeneity bias regimes.
bool criterion_8(Check& check) {
    {  // a few very good detectors
        ReplicatedRunRequest request;
        request.cfg = slight_heterogeneity_config(5, 0.0, 200, 801);
        const ExperimentReport report = run_replicated(request);
        const double dev = report.find("pi1", -1, EstimateKind::Adjusted)->mean_abs_dev;
        check.note("n=5, eps=0: mean |pi1 dev| = " + format_double(dev));
        check.expect(dev < 0.01, "n=5, eps=0 should keep adjusted pi1 |bias| under 0.01");
    }
    {  // more, merely good detectors
        ReplicatedRunRequest request;
        request.cfg = slight_heterogeneity_config(15, 0.1, 200, 802);
        const ExperimentReport report = run_replicated(request);
        const double dev = report.find("pi1", -1, EstimateKind::Adjusted)->mean_abs_dev;
        check.note("n=15, eps=0.1: mean |pi1 dev| = " + format_double(dev));
        check.expect(dev < 0.01, "n=15, eps=0.1 should keep adjusted pi1 |bias| under 0.01");
    }
    {  // many fair detectors: correction helps
        ReplicatedRunRequest request;
        request.cfg = slight_heterogeneity_config(35, 0.3, 200, 803);
        const ExperimentReport report = run_replicated(request);
        const double naive_pi = std::abs(report.find("pi1", -1, EstimateKind::Naive)->mean_bias);
        const double adj_pi = std::abs(report.find("pi1", -1, EstimateKind::Adjusted)->mean_bias);
        const double naive_fp = report.mean_abs_bias_over_detectors("fp", EstimateKind::Naive);
        const double adj_fp = report.mean_abs_bias_over_detectors("fp", EstimateKind::Adjusted);
        check.note("n=35, eps=0.3 pi1 |bias|: naive " + format_double(naive_pi) + ", adjusted " +
                   format_double(adj_pi));
        check.note("n=35, eps=0.3 avg fp |bias|: naive " + format_double(naive_fp) + ", adjusted " +
                   format_double(adj_fp));
        check.expect(adj_pi <= naive_pi, "adjusted pi1 |bias| should not exceed naive");
        check.expect(adj_fp <= naive_fp, "adjusted avg fp |bias| should not exceed naive");
    }
    {  // poor detectors break every estimator
        ReplicatedRunRequest request;
        request.cfg = slight_heterogeneity_config(35, 0.5, 200, 804);
        const ExperimentReport report = run_replicated(request);
        double worst = 0.0;
        for (const auto& q : report.quantities)
            if (q.truth_available && q.n_used > 0) worst = std::max(worst, std::abs(q.mean_bias));
        check.note("eps=0.5: worst |bias| = " + format_double(worst));
        check.expect(worst > 0.1, "poor detectors should leave at least one |bias| above 0.1");
    }
    return check.ok;
}

// ---------------------------------------------------------------------------
// 9. Rate perturbations of width 0.2 barely move the corrected estimators.
bool criterion_9(Check& check) {
    double worst_diff = 0.0;
    std::string worst_at;
    for (double epsilon : {0.0, 0.1, 0.2, 0.3, 0.4}) {
        for (int n : {5, 10, 15, 25, 35}) {
            SimConfig cfg = slight_heterogeneity_config(n, epsilon, 200, 900);
            ReplicatedRunRequest request;
            request.cfg = cfg;
            request.run_naive = false;
            const ExperimentReport plain = run_replicated(request);
            request.cfg.perturbation_delta = 0.2;
            const ExperimentReport perturbed = run_replicated(request);
            const auto bias_gap = [&](const char* metric) {
                double a, b;
                if (std::string(metric) == "pi1") {
                    a = std::abs(plain.find("pi1", -1, EstimateKind::Adjusted)->mean_bias);
                    b = std::abs(perturbed.find("pi1", -1, EstimateKind::Adjusted)->mean_bias);
                } else {
                    a = plain.mean_abs_bias_over_detectors(metric, EstimateKind::Adjusted);
                    b = perturbed.mean_abs_bias_over_detectors(metric, EstimateKind::Adjusted);
                }
                return std::abs(a - b);
            };
            for (const char* metric : {"pi1", "fp", "ppv"}) {
                const double diff = bias_gap(metric);
                if (diff > worst_diff) {
                    worst_diff = diff;
                    worst_at = std::string(metric) + " at n=" + std::to_string(n) +
                               ", eps=" + format_double(epsilon);
                }
            }
        }
    }
    check.note("largest |bias| difference: " + format_double(worst_diff) + " (" + worst_at + ")");
    check.expect(worst_diff < 0.05, "perturbation moved some adjusted |bias| by 0.05 or more");
    return check.ok;
}

// ---------------------------------------------------------------------------
// 10. Determinism: worker count cannot change a report; CSV round-trips.
bool criterion_10(Check& check) {
    SimConfig cfg = slight_heterogeneity_config(7, 0.2, 24, 1010);
    cfg.m = 5'000;
    ReplicatedRunRequest request;
    request.cfg = cfg;
    request.threads = 1;
    const ExperimentReport serial = run_replicated(request);
    request.threads = 8;
    const ExperimentReport parallel = run_replicated(request);
    const std::string serial_json = experiment_report_to_json(serial).dump(2);
    const std::string parallel_json = experiment_report_to_json(parallel).dump(2);
    check.expect(serial_json == parallel_json, "1-worker and 8-worker reports differ");

    const auto profiles = draw_profiles(cfg);
    const SyntheticDataset ds = generate_replicate(cfg, profiles, 0);
    std::ostringstream first;
    write_matrix_csv(ds.matrix, first);
    std::istringstream back(first.str());
    const IngestResult in = ingest_stream(back);
    std::ostringstream second;
    write_matrix_csv(in.matrix, second);
    check.expect(first.str() == second.str(), "CSV ingest/serialize round-trip changed bytes");

    // the CLI end to end: same config, different thread counts
    const fs::path dir = fs::temp_directory_path() / "detmet_acceptance_c10";
    fs::create_directories(dir);
    std::ofstream((dir / "run.cfg")) << "m = 2000\npi1 = 0.3\nn = 5\nepsilon = 0.1\n"
                                     << "seed = 5\nreplicates = 10\n";
    const std::string cli = DETMET_CLI_PATH;
    const auto run_cli = [&](int threads, const std::string& out) {
        const std::string cmd = cli + " evaluate --config " + (dir / "run.cfg").string() +
                                " --threads " + std::to_string(threads) + " --out-dir " +
                                (dir / out).string() + " >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    check.expect(run_cli(1, "one") && run_cli(8, "eight"), "CLI evaluate failed");
    check.expect(read_file((dir / "one" / "report.json").string()) ==
                     read_file((dir / "eight" / "report.json").string()),
                 "CLI reports differ across thread counts");
    check.expect(read_file((dir / "one" / "report_series.csv").string()) ==
                     read_file((dir / "eight" / "report_series.csv").string()),
                 "CLI series CSVs differ across thread counts");
    std::error_code ec;
    fs::remove_all(dir, ec);
    return check.ok;
}

// ---------------------------------------------------------------------------
// 11. Degenerate inputs produce documented values or typed errors, never NaN.
bool criterion_11(Check& check) {
    {  // unanimous malicious matrix
        LabelStorage labels(3, 4);
        labels.setConstant(1);
        const auto matrix = LabelMatrix::from_labels(std::move(labels));
        const MetricEstimates naive = naive_estimates(matrix, majority_vote(matrix));
        check.expect(naive.pi1.value == 1.0, "unanimous malicious: pi1 should be 1");
        check.expect(!naive.fp[0].available, "unanimous malicious: fp must be unavailable");
        check.expect(naive.fn[0].available && naive.fn[0].value == 0.0,
                     "unanimous malicious: fn should be 0");
        const MetricEstimates adjusted = full_adjust(matrix);
        check.expect(!adjusted.pi1.available, "unavailability must propagate to adjusted pi1");
        // serialized form carries explicit nulls, not NaN
        const auto j = metric_estimates_to_json(adjusted, matrix.detector_names);
        check.expect(j["pi1"]["value"].is_null(), "unavailable values serialize as null");
    }
    {  // unanimous benign matrix
        LabelStorage labels(3, 4);
        labels.setConstant(0);
        const auto matrix = LabelMatrix::from_labels(std::move(labels));
        const MetricEstimates naive = naive_estimates(matrix, majority_vote(matrix));
        check.expect(naive.pi1.value == 0.0, "unanimous benign: pi1 should be 0");
        check.expect(!naive.fn[0].available, "unanimous benign: fn must be unavailable");
        check.expect(naive.fp[0].available && naive.fp[0].value == 0.0,
                     "unanimous benign: fp should be 0");
    }
    {  // single-detector path
        LabelStorage labels(4, 1);
        labels(0, 0) = 1;
        labels(1, 0) = 0;
        labels(2, 0) = 1;
        labels(3, 0) = 0;
        const auto matrix = LabelMatrix::from_labels(std::move(labels));
        const VoteResult votes = majority_vote(matrix);
        check.expect(votes.votes[0] == 1 && votes.votes[1] == 0,
                     "single detector: vote equals the label");
        bool threw = false;
        try {
            static_cast<void>(full_adjust(matrix));
        } catch (const InvalidInput&) {
            threw = true;
        }
        check.expect(threw, "single detector: adjustment must refuse with a typed error");
    }
    {  // all-benign truth
        SimConfig cfg;
        cfg.m = 300;
        cfg.pi1 = 0.0;
        cfg.n = 3;
        cfg.explicit_profiles.assign(3, DetectorProfile{0.05, 0.1});
        cfg.master_seed = 11011;
        const SyntheticDataset ds = generate_replicate(cfg, cfg.explicit_profiles, 0);
        check.expect(ds.truth.malicious_count() == 0, "pi1=0 must generate no malicious files");
        const MetricEstimates naive = naive_estimates(ds.matrix, majority_vote(ds.matrix));
        check.expect(naive.pi1.available && !std::isnan(naive.pi1.value),
                     "all-benign truth: naive pi1 must be a number");
    }
    {  // tie rows at even n
        LabelStorage labels(2, 4);
        labels.setZero();
        labels(0, 0) = 1;
        labels(0, 1) = 1;
        const auto matrix = LabelMatrix::from_labels(std::move(labels));
        const VoteResult votes = majority_vote(matrix);
        check.expect(votes.votes[0] == 1, "two of four votes must resolve malicious");
        check.expect(votes.votes[1] == 0, "zero of four votes must resolve benign");
    }
    return check.ok;
}

struct Criterion {
    std::string description;
    std::function<bool(Check&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, Criterion> criteria = {
        {1, {"closed-form trust identities at the benchmark anchors", criterion_1}},
        {2, {"homogeneous voting surface regimes", criterion_2}},
        {3, {"Monte Carlo tails track the exact oracle", criterion_3}},
        {4, {"voted-fraction moments match simulation", criterion_4}},
        {5, {"plug-in estimator means match simulation", criterion_5}},
        {6, {"corrected estimators beat plug-in at kappa=35", criterion_6}},
        {7, {"full panel: corrected = plug-in = truth", criterion_7}},
        {8, {"slight-heterogeneity bias regimes", criterion_8}},
        {9, {"insensitivity to per-file rate perturbation", criterion_9}},
        {10, {"byte-identical reports and CSV round-trips", criterion_10}},
        {11, {"degenerate inputs: documented values or typed errors", criterion_11}},
    };

    int only = 0;
    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg == "--criterion" && a + 1 < argc) only = std::atoi(argv[++a]);
        else if (arg == "--list") {
            for (const auto& [k, c] : criteria)
                std::cout << k << ": " << c.description << '\n';
            return 0;
        }
    }

    bool all_ok = true;
    for (const auto& [k, c] : criteria) {
        if (only != 0 && k != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Check check;
        bool ok = false;
        try {
            ok = c.run(check);
        } catch (const std::exception& err) {
            check.log << "    exception: " << err.what() << '\n';
        }
        const auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << k << " — " << c.description << " ("
                  << format_double(seconds.count()) << "s)\n"
                  << check.log.str();
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
