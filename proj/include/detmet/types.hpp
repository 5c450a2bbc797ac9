#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace detmet {

inline constexpr const char* kArtifactName = "detmet";
inline constexpr const char* kArtifactVersion = "0.1.0";

// Binary labels are stored one byte per cell; detectors are columns so
// per-detector passes walk contiguous memory.
using LabelCell = std::uint8_t;
using LabelStorage = Eigen::Matrix<LabelCell, Eigen::Dynamic, Eigen::Dynamic>;
using BinaryArray = Eigen::Array<LabelCell, Eigen::Dynamic, 1>;
using CountArray = Eigen::ArrayXi;

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
    std::int64_t line = 0;
    ParseError(std::int64_t line_, const std::string& reason)
        : std::runtime_error("line " + std::to_string(line_) + ": " + reason), line(line_) {}
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TruthMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// m x n matrix of detector-assigned binary labels. Every cell is 0 or 1;
/// ingestion rejects anything else, so code past the boundary never sees gaps.
struct LabelMatrix {
    LabelStorage labels;                      // labels(i, j) = label of file i by detector j
    std::vector<std::string> detector_names;  // size n
    std::vector<std::string> file_ids;        // size m; index-based when not supplied

    Eigen::Index files() const { return labels.rows(); }
    Eigen::Index detectors() const { return labels.cols(); }

    static LabelMatrix from_labels(LabelStorage labels, std::vector<std::string> detector_names = {},
                                   std::vector<std::string> file_ids = {});

    /// Throws InvalidInput when any invariant is broken (empty dimensions,
    /// cell outside {0,1}, name/id count mismatch).
    void validate() const;

    /// Copy of the matrix restricted to the given detector columns (order kept).
    LabelMatrix select_detectors(const std::vector<int>& detector_indices) const;
};

/// Hidden true labels for validation runs: truth[i] = 1 means malicious.
struct GroundTruth {
    BinaryArray truth;

    Eigen::Index files() const { return truth.size(); }
    std::int64_t malicious_count() const;                  // m1
    std::int64_t benign_count() const;                     // m0
    double malicious_fraction() const;                     // pi1 = m1/m, exact
    void validate() const;
};

/// Majority-vote output. votes[i] = 1 iff vote_counts[i] >= n/2 (ties go to 1).
/// Counts are kept because several estimators need per-detector sums with one
/// detector removed (count - label), which avoids a second matrix pass.
struct VoteResult {
    BinaryArray votes;
    CountArray vote_counts;

    Eigen::Index files() const { return votes.size(); }
};

enum class EstimateKind { Naive, Adjusted, TrueParams };

const char* to_string(EstimateKind kind);

/// One estimated probability plus its bookkeeping. `available == false` means
/// the defining ratio had a zero denominator (or a required input was itself
/// unavailable); value is then NaN and must not be consumed silently.
struct Estimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool available = false;
    bool fell_back_to_naive = false;  // adjusted value replaced by the naive one
    bool clamped = false;             // raw solution was outside [0,1]

    static Estimate of(double v) { return Estimate{v, true, false, false}; }
    static Estimate unavailable() { return Estimate{}; }
};

/// Full metric set for one matrix: population fraction plus per-detector
/// false-positive / false-negative / PPV / NPV probabilities.
struct MetricEstimates {
    EstimateKind kind = EstimateKind::Naive;
    Estimate pi1;
    std::vector<Estimate> fp;   // p_plus per detector
    std::vector<Estimate> fn;   // p_minus per detector
    std::vector<Estimate> ppv;  // q_plus per detector
    std::vector<Estimate> npv;  // q_minus per detector

    int detectors() const { return static_cast<int>(fp.size()); }
    bool all_fp_available() const;
    bool all_fn_available() const;
};

/// True error probabilities of one detector; the source of synthetic labels.
struct DetectorProfile {
    double fp = 0.0;  // false positive probability
    double fn = 0.0;  // false negative probability

    /// PPV given a population fraction: pi*(1-fn) / (pi*(1-fn) + (1-pi)*fp).
    double ppv(double pi1) const;
    /// NPV given a population fraction: (1-pi)*(1-fp) / ((1-pi)*(1-fp) + pi*fn).
    double npv(double pi1) const;
};

Eigen::ArrayXd fp_rates(const std::vector<DetectorProfile>& profiles);
Eigen::ArrayXd fn_rates(const std::vector<DetectorProfile>& profiles);

/// Metric set holding the ground-truth parameters of a profile list.
MetricEstimates true_metric_set(const std::vector<DetectorProfile>& profiles, double pi1);

inline bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace detmet
