#include "detmet/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "detmet/adjusted.hpp"
#include "detmet/naive.hpp"
#include "detmet/parallel.hpp"
#include "detmet/rng.hpp"
#include "detmet/voting.hpp"

namespace detmet {

RabValue relative_absolute_bias(double mean_bias, double true_value) {
    RabValue rab;
    if (true_value == 0.0) return rab;  // reported unavailable; raw bias stands
    rab.available = true;
    rab.percent = std::abs(mean_bias) / true_value * 100.0;
    return rab;
}

const QuantityReport* ExperimentReport::find(const std::string& metric, int detector,
                                             EstimateKind kind) const {
    for (const auto& q : quantities)
        if (q.metric == metric && q.detector == detector && q.kind == kind) return &q;
    return nullptr;
}

double ExperimentReport::mean_abs_bias_over_detectors(const std::string& metric,
                                                      EstimateKind kind) const {
    double sum = 0.0;
    int count = 0;
    for (const auto& q : quantities) {
        if (q.metric != metric || q.kind != kind || q.detector < 0) continue;
        sum += std::abs(q.mean_bias);
        ++count;
    }
    return count == 0 ? 0.0 : sum / count;
}

namespace {

// Accumulates one estimator/quantity across replicates.
struct Accumulator {
    double true_value = 0.0;
    bool truth_available = true;
    std::int64_t n_used = 0;
    std::int64_t n_unavailable = 0;
    std::int64_t n_fallback = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    double sum_abs_dev = 0.0;

    void set_truth(const Estimate& t) {
        truth_available = t.available;
        true_value = t.available ? t.value : 0.0;
    }

    void add(const Estimate& e) {
        if (!e.available) {
            ++n_unavailable;
            return;
        }
        if (e.fell_back_to_naive) ++n_fallback;
        ++n_used;
        sum += e.value;
        sum_sq += e.value * e.value;
        sum_abs_dev += std::abs(e.value - true_value);
    }

    QuantityReport finish(std::string metric, int detector, EstimateKind kind) const {
        QuantityReport q;
        q.metric = std::move(metric);
        q.detector = detector;
        q.kind = kind;
        q.true_value = true_value;
        q.truth_available = truth_available;
        q.n_used = n_used;
        q.n_unavailable = n_unavailable;
        q.n_fallback = n_fallback;
        if (n_used > 0) {
            q.mean_estimate = sum / static_cast<double>(n_used);
            if (n_used > 1) {
                const double centered = sum_sq - sum * sum / static_cast<double>(n_used);
                q.var_estimate = std::max(0.0, centered / static_cast<double>(n_used - 1));
            }
            if (truth_available) {
                q.mean_bias = q.mean_estimate - true_value;
                q.mean_abs_dev = sum_abs_dev / static_cast<double>(n_used);
                const RabValue rab = relative_absolute_bias(q.mean_bias, true_value);
                q.rab_available = rab.available;
                q.rab_percent = rab.percent;
            }
        }
        return q;
    }
};

}  // namespace

ExperimentReport run_replicated(const ReplicatedRunRequest& request) {
    const SimConfig& cfg = request.cfg;
    cfg.validate();
    const std::vector<DetectorProfile> profiles = draw_profiles(cfg);
    const int n = cfg.n;
    const int reps = cfg.n_replicates;

    struct ReplicateResult {
        MetricEstimates naive;
        MetricEstimates adjusted;
    };
    std::vector<ReplicateResult> slots(static_cast<std::size_t>(reps));
    parallel_for_index(reps, request.threads, [&](std::int64_t r) {
        const SyntheticDataset ds = cfg.perturbation_delta > 0.0
                                        ? generate_perturbed(cfg, profiles, static_cast<int>(r))
                                        : generate_replicate(cfg, profiles, static_cast<int>(r));
        const VoteResult votes = majority_vote(ds.matrix);
        auto& slot = slots[static_cast<std::size_t>(r)];
        slot.naive = naive_estimates(ds.matrix, votes);
        if (request.run_adjusted) {
            // fresh Monte Carlo sub-streams per replicate; exact mode ignores this
            ProbEval eval = request.eval;
            eval.mc.seed = derive(request.eval.mc.seed, static_cast<std::uint64_t>(r));
            slot.adjusted = full_adjust_from_naive(slot.naive, cfg.m, eval);
        }
    });

    const MetricEstimates truth = true_metric_set(profiles, cfg.pi1);
    ExperimentReport report;
    report.config = cfg;
    report.mode = request.eval.mode;
    report.mc_samples = request.eval.mc.n_samples;
    report.replicates = reps;

    const auto collect = [&](EstimateKind kind, auto pick_set) {
        Accumulator pi1_acc;
        pi1_acc.set_truth(Estimate::of(cfg.pi1));
        std::vector<std::array<Accumulator, 4>> det(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            det[sj][0].set_truth(truth.fp[sj]);
            det[sj][1].set_truth(truth.fn[sj]);
            det[sj][2].set_truth(truth.ppv[sj]);
            det[sj][3].set_truth(truth.npv[sj]);
        }
        for (const auto& slot : slots) {
            const MetricEstimates& est = pick_set(slot);
            pi1_acc.add(est.pi1);
            for (int j = 0; j < n; ++j) {
                const auto sj = static_cast<std::size_t>(j);
                det[sj][0].add(est.fp[sj]);
                det[sj][1].add(est.fn[sj]);
                det[sj][2].add(est.ppv[sj]);
                det[sj][3].add(est.npv[sj]);
            }
        }
        report.quantities.push_back(pi1_acc.finish("pi1", -1, kind));
        static const char* names[4] = {"fp", "fn", "ppv", "npv"};
        for (int j = 0; j < n; ++j)
            for (int q = 0; q < 4; ++q)
                report.quantities.push_back(
                    det[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)].finish(
                        names[q], j, kind));
    };
    if (request.run_naive)
        collect(EstimateKind::Naive, [](const ReplicateResult& s) -> const MetricEstimates& {
            return s.naive;
        });
    if (request.run_adjusted)
        collect(EstimateKind::Adjusted, [](const ReplicateResult& s) -> const MetricEstimates& {
            return s.adjusted;
        });
    if (request.keep_replicates) {
        for (auto& slot : slots) {
            if (request.run_naive) report.naive_replicates.push_back(std::move(slot.naive));
            if (request.run_adjusted) report.adjusted_replicates.push_back(std::move(slot.adjusted));
        }
    }
    return report;
}

double agreement_probability(double pi1_hat, const Eigen::ArrayXd& fp_hat,
                             const Eigen::ArrayXd& fn_hat, const ProbEval& eval) {
    const VoteProbs probs = vote_correct_probs(fp_hat, fn_hat, eval);
    return pi1_hat * probs.p11 + (1.0 - pi1_hat) * probs.p00;
}

void SubsetPlan::validate(int n_detectors) const {
    if (subsets.empty()) throw InvalidInput("subset plan is empty");
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        const auto& subset = subsets[s];
        if (subset.empty()) throw InvalidInput("subset plan contains an empty set");
        std::vector<bool> seen(static_cast<std::size_t>(n_detectors), false);
        for (int idx : subset) {
            if (idx < 0 || idx >= n_detectors)
                throw InvalidInput("subset index out of range: " + std::to_string(idx));
            if (seen[static_cast<std::size_t>(idx)])
                throw InvalidInput("subset repeats index " + std::to_string(idx));
            seen[static_cast<std::size_t>(idx)] = true;
        }
        if (s > 0) {
            if (subset.size() <= subsets[s - 1].size())
                throw InvalidInput("subsets must grow strictly");
            for (int idx : subsets[s - 1])
                if (std::find(subset.begin(), subset.end(), idx) == subset.end())
                    throw InvalidInput("subsets must be nested");
        }
    }
}

SubsetPlan SubsetPlanSpec::resolve(const LabelMatrix& matrix) const {
    if (steps.empty()) throw InvalidInput("subset plan has no steps");
    const int n = static_cast<int>(matrix.detectors());
    const auto find_detector = [&](const std::string& token) {
        for (int j = 0; j < n; ++j)
            if (matrix.detector_names[static_cast<std::size_t>(j)] == token) return j;
        // fall back to a 0-based numeric index
        try {
            const int idx = std::stoi(token);
            if (idx >= 0 && idx < n && std::to_string(idx) == token) return idx;
        } catch (const std::exception&) {
        }
        throw InvalidInput("unknown detector '" + token + "'");
    };

    SubsetPlan plan;
    plan.seed = seed;
    std::vector<int> current;
    std::vector<bool> in_current(static_cast<std::size_t>(n), false);
    std::uint64_t step_index = 0;
    for (const auto& step : steps) {
        if (step.all) {
            for (int j = 0; j < n; ++j)
                if (!in_current[static_cast<std::size_t>(j)]) {
                    current.push_back(j);
                    in_current[static_cast<std::size_t>(j)] = true;
                }
        } else if (!step.named.empty()) {
            for (const auto& token : step.named) {
                const int j = find_detector(token);
                if (in_current[static_cast<std::size_t>(j)])
                    throw InvalidInput("detector '" + token + "' already in the subset");
                current.push_back(j);
                in_current[static_cast<std::size_t>(j)] = true;
            }
        } else {
            if (step.random_add < 1) throw InvalidInput("random augmentation must add >= 1");
            std::vector<int> remaining;
            for (int j = 0; j < n; ++j)
                if (!in_current[static_cast<std::size_t>(j)]) remaining.push_back(j);
            if (static_cast<int>(remaining.size()) < step.random_add)
                throw InvalidInput("not enough detectors left to add");
            Rng rng(derive_path(seed, {kTagSubset, step_index}));
            for (int a = 0; a < step.random_add; ++a) {
                const auto pick = static_cast<std::size_t>(rng.next_below(remaining.size()));
                const int j = remaining[pick];
                remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
                current.push_back(j);
                in_current[static_cast<std::size_t>(j)] = true;
            }
        }
        plan.subsets.push_back(current);
        ++step_index;
    }
    plan.validate(n);
    return plan;
}

std::vector<SubsetReport> subset_sweep(const LabelMatrix& matrix, const SubsetPlan& plan,
                                       const ProbEval& eval) {
    plan.validate(static_cast<int>(matrix.detectors()));
    std::vector<SubsetReport> reports;
    reports.reserve(plan.subsets.size());
    for (const auto& subset : plan.subsets) {
        SubsetReport report;
        report.detector_indices = subset;
        const LabelMatrix restricted = matrix.select_detectors(subset);
        const VoteResult votes = majority_vote(restricted);
        report.naive = naive_estimates(restricted, votes);
        if (restricted.detectors() >= 2) {
            report.adjusted = full_adjust_from_naive(report.naive, restricted.files(), eval);
            if (report.adjusted.pi1.available && report.adjusted.all_fp_available() &&
                report.adjusted.all_fn_available()) {
                Eigen::ArrayXd fp(restricted.detectors()), fn(restricted.detectors());
                for (int j = 0; j < restricted.detectors(); ++j) {
                    fp[j] = report.adjusted.fp[static_cast<std::size_t>(j)].value;
                    fn[j] = report.adjusted.fn[static_cast<std::size_t>(j)].value;
                }
                report.agreement = agreement_probability(report.adjusted.pi1.value, fp, fn, eval);
            }
        } else {
            // Adjustment refuses single-detector panels; report unavailable slots.
            report.adjusted.kind = EstimateKind::Adjusted;
            report.adjusted.fp.assign(1, Estimate::unavailable());
            report.adjusted.fn.assign(1, Estimate::unavailable());
            report.adjusted.ppv.assign(1, Estimate::unavailable());
            report.adjusted.npv.assign(1, Estimate::unavailable());
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace detmet
