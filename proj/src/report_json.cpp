#include "detmet/report_json.hpp"

#include <fstream>
#include <sstream>

#include "detmet/adjusted.hpp"
#include "detmet/voting.hpp"

namespace detmet {

using nlohmann::json;

json estimate_to_json(const Estimate& e) {
    json out;
    out["available"] = e.available;
    if (e.available) out["value"] = e.value;
    else out["value"] = nullptr;
    if (e.fell_back_to_naive) out["fallback_naive"] = true;
    if (e.clamped) out["clamped"] = true;
    return out;
}

json metric_estimates_to_json(const MetricEstimates& estimates,
                              const std::vector<std::string>& detector_names) {
    json out;
    out["kind"] = to_string(estimates.kind);
    out["pi1"] = estimate_to_json(estimates.pi1);
    json detectors = json::array();
    for (int j = 0; j < estimates.detectors(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        json d;
        d["detector"] = detector_names[sj];
        d["fp"] = estimate_to_json(estimates.fp[sj]);
        d["fn"] = estimate_to_json(estimates.fn[sj]);
        d["ppv"] = estimate_to_json(estimates.ppv[sj]);
        d["npv"] = estimate_to_json(estimates.npv[sj]);
        detectors.push_back(std::move(d));
    }
    out["detectors"] = std::move(detectors);
    return out;
}

json artifact_stamp() {
    json out;
    out["name"] = kArtifactName;
    out["version"] = kArtifactVersion;
    return out;
}

json config_echo_json(const RunConfig& config) {
    json out;
    for (const auto& [key, value] : config.echo()) out[key] = value;
    return out;
}

static json mean_var_to_json(const MeanVar& mv) {
    json out;
    out["available"] = mv.available;
    if (mv.available) {
        out["mean"] = mv.mean;
        out["var"] = mv.var;
    }
    return out;
}

json build_estimate_report(const EstimateReportInputs& in) {
    json out;
    out["artifact"] = artifact_stamp();
    out["mode"] = to_string(in.eval.mode);
    out["mc_samples"] = in.eval.mc.n_samples;
    out["mc_seed"] = in.eval.mc.seed;
    out["m"] = in.matrix.files();
    out["n"] = in.matrix.detectors();
    out["naive"] = metric_estimates_to_json(in.naive, in.matrix.detector_names);
    out["adjusted"] = metric_estimates_to_json(in.adjusted, in.matrix.detector_names);

    const MetricEstimates& adj = in.adjusted;
    const bool rates_ok = adj.pi1.available && adj.all_fp_available() && adj.all_fn_available();
    if (rates_ok) {
        const int n = adj.detectors();
        Eigen::ArrayXd fp(n), fn(n);
        for (int j = 0; j < n; ++j) {
            fp[j] = adj.fp[static_cast<std::size_t>(j)].value;
            fn[j] = adj.fn[static_cast<std::size_t>(j)].value;
        }
        const VoteProbs probs = vote_correct_probs(fp, fn, in.eval);
        out["vote_probs"] = {{"p11", probs.p11}, {"p01", probs.p01},
                             {"p00", probs.p00}, {"p10", probs.p10}};
        out["agreement"] = adj.pi1.value * probs.p11 + (1.0 - adj.pi1.value) * probs.p00;

        const VotedFractionMoments t1 =
            voted_fraction_moments(adj.pi1.value, in.matrix.files(), probs.p11, probs.p01);
        out["asymptotics"]["pi1"] = {{"mu", t1.mean}, {"var", t1.var}};
        const AdjustedCounts counts = AdjustedCounts::from_pi1(adj.pi1.value, in.matrix.files());
        if (counts.m0_hat >= 1 && counts.m1_hat >= 1 && n >= 2) {
            std::vector<DetectorProfile> profiles(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j)
                profiles[static_cast<std::size_t>(j)] = DetectorProfile{fp[j], fn[j]};
            json per_detector = json::array();
            for (int j = 0; j < n; ++j) {
                const AsymptoticMoments mom =
                    detector_estimator_moments(profiles, j, counts.m0_hat, counts.m1_hat, in.eval);
                json d;
                d["detector"] = in.matrix.detector_names[static_cast<std::size_t>(j)];
                d["fp"] = mean_var_to_json(mom.fp);
                d["fn"] = mean_var_to_json(mom.fn);
                d["ppv"] = mean_var_to_json(mom.ppv);
                d["npv"] = mean_var_to_json(mom.npv);
                per_detector.push_back(std::move(d));
            }
            out["asymptotics"]["detectors"] = std::move(per_detector);
        }
    } else {
        out["vote_probs"] = nullptr;
        out["agreement"] = nullptr;
    }

    if (in.truth) {
        out["truth"] = {{"m1", in.truth->malicious_count()},
                        {"pi1", in.truth->malicious_fraction()}};
    }
    return out;
}

static json quantity_to_json(const QuantityReport& q) {
    json out;
    out["metric"] = q.metric;
    out["detector"] = q.detector;
    out["kind"] = to_string(q.kind);
    out["truth_available"] = q.truth_available;
    if (q.truth_available) out["true_value"] = q.true_value;
    out["n_used"] = q.n_used;
    out["n_unavailable"] = q.n_unavailable;
    out["n_fallback"] = q.n_fallback;
    if (q.n_used > 0) {
        out["mean_estimate"] = q.mean_estimate;
        out["var_estimate"] = q.var_estimate;
        if (q.truth_available) {
            out["mean_bias"] = q.mean_bias;
            out["mean_abs_dev"] = q.mean_abs_dev;
            if (q.rab_available) out["rab_percent"] = q.rab_percent;
            else out["rab_percent"] = nullptr;
        }
    }
    return out;
}

json experiment_report_to_json(const ExperimentReport& report) {
    json out;
    out["artifact"] = artifact_stamp();
    out["mode"] = to_string(report.mode);
    out["mc_samples"] = report.mc_samples;
    out["replicates"] = report.replicates;
    json cfg;
    cfg["m"] = report.config.m;
    cfg["pi1"] = report.config.pi1;
    cfg["n"] = report.config.n;
    cfg["seed"] = report.config.master_seed;
    cfg["delta"] = report.config.perturbation_delta;
    if (report.config.epsilon) cfg["epsilon"] = *report.config.epsilon;
    cfg["explicit_profiles"] = !report.config.explicit_profiles.empty();
    out["config"] = std::move(cfg);
    json quantities = json::array();
    for (const auto& q : report.quantities) quantities.push_back(quantity_to_json(q));
    out["quantities"] = std::move(quantities);
    return out;
}

static void append_csv_value(std::ostringstream& out, double v) {
    out.precision(17);
    out << v;
}

std::string experiment_report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "metric,detector,kind,true_value,n_used,mean_estimate,mean_bias,mean_abs_dev,"
           "var_estimate,rab_percent\n";
    for (const auto& q : report.quantities) {
        out << q.metric << ',' << q.detector << ',' << to_string(q.kind) << ',';
        if (q.truth_available) append_csv_value(out, q.true_value);
        out << ',' << q.n_used << ',';
        if (q.n_used > 0) append_csv_value(out, q.mean_estimate);
        out << ',';
        if (q.n_used > 0 && q.truth_available) append_csv_value(out, q.mean_bias);
        out << ',';
        if (q.n_used > 0 && q.truth_available) append_csv_value(out, q.mean_abs_dev);
        out << ',';
        if (q.n_used > 0) append_csv_value(out, q.var_estimate);
        out << ',';
        if (q.n_used > 0 && q.rab_available) append_csv_value(out, q.rab_percent);
        out << '\n';
    }
    return out.str();
}

std::string replicate_series_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "replicate,metric,detector,kind,value\n";
    const auto emit_set = [&](int replicate, const MetricEstimates& est) {
        const auto row = [&](const char* metric, int detector, const Estimate& e) {
            if (!e.available) return;
            out << replicate << ',' << metric << ',' << detector << ',' << to_string(est.kind)
                << ',';
            append_csv_value(out, e.value);
            out << '\n';
        };
        row("pi1", -1, est.pi1);
        for (int j = 0; j < est.detectors(); ++j) {
            const auto sj = static_cast<std::size_t>(j);
            row("fp", j, est.fp[sj]);
            row("fn", j, est.fn[sj]);
            row("ppv", j, est.ppv[sj]);
            row("npv", j, est.npv[sj]);
        }
    };
    for (std::size_t r = 0; r < report.naive_replicates.size(); ++r)
        emit_set(static_cast<int>(r), report.naive_replicates[r]);
    for (std::size_t r = 0; r < report.adjusted_replicates.size(); ++r)
        emit_set(static_cast<int>(r), report.adjusted_replicates[r]);
    return out.str();
}

static void append_subset_rows(std::ostringstream& out, const SubsetReport& report,
                               const std::vector<std::string>& names, const MetricEstimates& est) {
    const auto row = [&](const std::string& metric, int detector, const Estimate& e) {
        if (!e.available) return;
        out << report.detector_indices.size() << ',' << metric << ','
            << (detector < 0 ? std::string("-") : names[static_cast<std::size_t>(
                                                      report.detector_indices[static_cast<std::size_t>(detector)])])
            << ',' << to_string(est.kind) << ',';
        append_csv_value(out, e.value);
        out << '\n';
    };
    row("pi1", -1, est.pi1);
    for (int j = 0; j < est.detectors(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        row("fp", j, est.fp[sj]);
        row("fn", j, est.fn[sj]);
        row("ppv", j, est.ppv[sj]);
        row("npv", j, est.npv[sj]);
    }
}

std::string subset_reports_to_csv(const std::vector<SubsetReport>& reports,
                                  const std::vector<std::string>& detector_names) {
    std::ostringstream out;
    out << "subset_size,metric,detector,kind,value\n";
    for (const auto& report : reports) {
        append_subset_rows(out, report, detector_names, report.naive);
        append_subset_rows(out, report, detector_names, report.adjusted);
    }
    return out.str();
}

json subset_reports_to_json(const std::vector<SubsetReport>& reports,
                            const std::vector<std::string>& detector_names) {
    json out = json::array();
    for (const auto& report : reports) {
        json entry;
        json names = json::array();
        std::vector<std::string> subset_names;
        for (int idx : report.detector_indices) {
            names.push_back(detector_names[static_cast<std::size_t>(idx)]);
            subset_names.push_back(detector_names[static_cast<std::size_t>(idx)]);
        }
        entry["detectors"] = std::move(names);
        entry["naive"] = metric_estimates_to_json(report.naive, subset_names);
        entry["adjusted"] = metric_estimates_to_json(report.adjusted, subset_names);
        if (report.agreement) entry["agreement"] = *report.agreement;
        out.push_back(std::move(entry));
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot open output file: " + path);
    out << text;
}

}  // namespace detmet
