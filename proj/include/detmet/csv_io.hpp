#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "detmet/types.hpp"
#include "detmet/voting.hpp"

namespace detmet {

// CSV matrix format: header "file_id,<name1>,...,<nameN>", then one row per
// file: id followed by n cells, each exactly "0" or "1". The companion truth
// file is "file_id,truth" with the same ids. Serializing an ingested matrix
// reproduces the input byte for byte.

struct IngestOptions {
    /// Strict (default): any bad row aborts ingestion. Lenient: bad rows are
    /// dropped and reported.
    bool lenient = false;
};

struct IngestStats {
    std::int64_t rows_accepted = 0;
    std::int64_t rows_dropped = 0;
    std::vector<std::string> diagnostics;  // one line per dropped row
};

struct IngestResult {
    LabelMatrix matrix;
    std::optional<GroundTruth> truth;
    IngestStats stats;
};

IngestResult ingest(const std::string& matrix_path, const std::optional<std::string>& truth_path = {},
                    const IngestOptions& options = {});

IngestResult ingest_stream(std::istream& matrix_in, const IngestOptions& options = {});

void write_matrix_csv(const LabelMatrix& matrix, std::ostream& out);
void write_matrix_csv(const LabelMatrix& matrix, const std::string& path);

void write_truth_csv(const std::vector<std::string>& file_ids, const GroundTruth& truth,
                     std::ostream& out);
void write_truth_csv(const std::vector<std::string>& file_ids, const GroundTruth& truth,
                     const std::string& path);

/// Voted labels: "file_id,vote,vote_count".
void write_votes_csv(const LabelMatrix& matrix, const VoteResult& votes, std::ostream& out);

/// Detector profiles: "detector,fp,fn".
void write_profiles_csv(const std::vector<std::string>& names,
                        const std::vector<DetectorProfile>& profiles, std::ostream& out);
std::vector<std::pair<std::string, DetectorProfile>> read_profiles_csv(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace detmet
