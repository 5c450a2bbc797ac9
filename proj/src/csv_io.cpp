#include "detmet/csv_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace detmet {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

// getline that accepts both \n and \r\n endings.
bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

int parse_label(const std::string& field) {
    if (field == "0") return 0;
    if (field == "1") return 1;
    return -1;
}

}  // namespace

// Row-at-a-time parse into preallocated storage. expected_rows = 0 means
// unknown (grow a staging buffer); a positive count lets the matrix be sized
// once up front, keeping the peak near one byte per cell.
static IngestResult ingest_rows(std::istream& matrix_in, const IngestOptions& options,
                                std::int64_t expected_rows) {
    IngestResult result;
    std::string line;
    if (!read_line(matrix_in, line)) throw SchemaError("empty input: missing header row");
    const std::vector<std::string> header = split_csv(line);
    if (header.size() < 2) throw SchemaError("header must name an id column and >= 1 detector");
    const auto n = static_cast<Eigen::Index>(header.size() - 1);

    LabelStorage labels;
    std::vector<LabelCell> staging;  // used only when the row count is unknown
    if (expected_rows > 0) labels.resize(expected_rows, n);

    std::vector<std::string> ids;
    if (expected_rows > 0) ids.reserve(static_cast<std::size_t>(expected_rows));
    std::vector<LabelCell> row_cells(static_cast<std::size_t>(n));
    std::int64_t line_no = 1;
    Eigen::Index row = 0;
    while (read_line(matrix_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        // in-place field scan: id, then n single-character 0/1 cells
        std::string problem;
        const std::size_t id_end = line.find(',');
        Eigen::Index parsed = 0;
        if (id_end == std::string::npos) {
            problem = "expected " + std::to_string(n + 1) + " fields, got 1";
        } else {
            std::size_t pos = id_end + 1;
            while (true) {
                std::size_t end = line.find(',', pos);
                if (end == std::string::npos) end = line.size();
                if (parsed >= n) {
                    problem = "expected " + std::to_string(n + 1) + " fields, got more";
                    break;
                }
                if (end - pos == 1 && (line[pos] == '0' || line[pos] == '1')) {
                    row_cells[static_cast<std::size_t>(parsed)] =
                        static_cast<LabelCell>(line[pos] - '0');
                } else {
                    problem = "label '" + line.substr(pos, end - pos) + "' is not 0 or 1 (column " +
                              header[static_cast<std::size_t>(parsed + 1)] + ")";
                    break;
                }
                ++parsed;
                if (end == line.size()) break;
                pos = end + 1;
            }
            if (problem.empty() && parsed != n)
                problem = "expected " + std::to_string(n + 1) + " fields, got " +
                          std::to_string(parsed + 1);
        }
        if (!problem.empty()) {
            if (!options.lenient) throw ParseError(line_no, problem);
            ++result.stats.rows_dropped;
            result.stats.diagnostics.push_back("line " + std::to_string(line_no) + ": " + problem);
            continue;
        }
        ids.push_back(line.substr(0, id_end));
        if (expected_rows > 0) {
            if (row >= labels.rows()) throw SchemaError("input grew between passes");
            for (Eigen::Index j = 0; j < n; ++j)
                labels(row, j) = row_cells[static_cast<std::size_t>(j)];
            ++row;
        } else {
            staging.insert(staging.end(), row_cells.begin(), row_cells.end());
        }
        ++result.stats.rows_accepted;
    }
    if (ids.empty()) throw SchemaError("no data rows accepted");

    const auto m = static_cast<Eigen::Index>(ids.size());
    if (expected_rows > 0) {
        if (m < labels.rows()) labels.conservativeResize(m, n);  // rows were dropped
    } else {
        labels.resize(m, n);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                labels(i, j) = staging[static_cast<std::size_t>(i * n + j)];
    }
    result.matrix.labels = std::move(labels);
    result.matrix.detector_names.assign(header.begin() + 1, header.end());
    result.matrix.file_ids = std::move(ids);
    result.matrix.validate();
    return result;
}

IngestResult ingest_stream(std::istream& matrix_in, const IngestOptions& options) {
    return ingest_rows(matrix_in, options, 0);
}

static GroundTruth ingest_truth(const std::string& truth_path, const LabelMatrix& matrix) {
    std::ifstream in(truth_path);
    if (!in) throw SchemaError("cannot open truth file: " + truth_path);
    std::string line;
    if (!read_line(in, line)) throw SchemaError("empty truth file: missing header row");
    if (split_csv(line).size() != 2) throw SchemaError("truth header must have two columns");

    std::unordered_map<std::string, int> by_id;
    std::int64_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != 2) throw ParseError(line_no, "expected 2 fields");
        const int value = parse_label(fields[1]);
        if (value < 0) throw ParseError(line_no, "truth value '" + fields[1] + "' is not 0 or 1");
        if (!by_id.emplace(fields[0], value).second)
            throw ParseError(line_no, "duplicate file id '" + fields[0] + "'");
    }
    if (by_id.size() != matrix.file_ids.size())
        throw TruthMismatch("truth file covers " + std::to_string(by_id.size()) +
                            " ids, matrix has " + std::to_string(matrix.file_ids.size()));
    GroundTruth truth;
    truth.truth.resize(matrix.files());
    for (Eigen::Index i = 0; i < matrix.files(); ++i) {
        const auto it = by_id.find(matrix.file_ids[static_cast<std::size_t>(i)]);
        if (it == by_id.end())
            throw TruthMismatch("matrix id '" + matrix.file_ids[static_cast<std::size_t>(i)] +
                                "' missing from truth file");
        truth.truth[i] = static_cast<LabelCell>(it->second);
    }
    return truth;
}

// Upper bound on data rows: newline count (blank lines and CR-only endings
// only overcount, never undercount).
static std::int64_t count_data_rows(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open matrix file: " + path);
    std::vector<char> buffer(1 << 20);
    std::int64_t newlines = 0;
    bool ends_with_newline = true;
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        const auto got = in.gcount();
        if (got <= 0) break;
        for (std::streamsize b = 0; b < got; ++b) newlines += buffer[static_cast<std::size_t>(b)] == '\n';
        ends_with_newline = buffer[static_cast<std::size_t>(got - 1)] == '\n';
    }
    const std::int64_t lines = newlines + (ends_with_newline ? 0 : 1);
    return lines > 1 ? lines - 1 : 0;  // minus the header
}

IngestResult ingest(const std::string& matrix_path, const std::optional<std::string>& truth_path,
                    const IngestOptions& options) {
    // two passes over the file: count rows, then parse straight into a
    // once-allocated matrix (one byte per cell at peak)
    const std::int64_t expected_rows = count_data_rows(matrix_path);
    std::ifstream in(matrix_path);
    if (!in) throw SchemaError("cannot open matrix file: " + matrix_path);
    IngestResult result = ingest_rows(in, options, expected_rows);
    if (truth_path) result.truth = ingest_truth(*truth_path, result.matrix);
    return result;
}

void write_matrix_csv(const LabelMatrix& matrix, std::ostream& out) {
    out << "file_id";
    for (const auto& name : matrix.detector_names) out << ',' << name;
    out << '\n';
    for (Eigen::Index i = 0; i < matrix.files(); ++i) {
        out << matrix.file_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < matrix.detectors(); ++j)
            out << ',' << static_cast<int>(matrix.labels(i, j));
        out << '\n';
    }
}

void write_matrix_csv(const LabelMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot open output file: " + path);
    write_matrix_csv(matrix, out);
}

void write_truth_csv(const std::vector<std::string>& file_ids, const GroundTruth& truth,
                     std::ostream& out) {
    out << "file_id,truth\n";
    for (Eigen::Index i = 0; i < truth.files(); ++i)
        out << file_ids[static_cast<std::size_t>(i)] << ',' << static_cast<int>(truth.truth[i])
            << '\n';
}

void write_truth_csv(const std::vector<std::string>& file_ids, const GroundTruth& truth,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot open output file: " + path);
    write_truth_csv(file_ids, truth, out);
}

void write_votes_csv(const LabelMatrix& matrix, const VoteResult& votes, std::ostream& out) {
    out << "file_id,vote,vote_count\n";
    for (Eigen::Index i = 0; i < votes.files(); ++i)
        out << matrix.file_ids[static_cast<std::size_t>(i)] << ','
            << static_cast<int>(votes.votes[i]) << ',' << votes.vote_counts[i] << '\n';
}

void write_profiles_csv(const std::vector<std::string>& names,
                        const std::vector<DetectorProfile>& profiles, std::ostream& out) {
    out << "detector,fp,fn\n";
    std::ostringstream fmt;
    fmt.precision(17);
    for (std::size_t j = 0; j < profiles.size(); ++j) {
        fmt.str("");
        fmt << names[j] << ',' << profiles[j].fp << ',' << profiles[j].fn << '\n';
        out << fmt.str();
    }
}

std::vector<std::pair<std::string, DetectorProfile>> read_profiles_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open profiles file: " + path);
    std::string line;
    if (!read_line(in, line)) throw SchemaError("empty profiles file");
    if (split_csv(line).size() != 3) throw SchemaError("profiles header must be detector,fp,fn");
    std::vector<std::pair<std::string, DetectorProfile>> profiles;
    std::int64_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields");
        const auto parse_rate = [&](const std::string& field) {
            std::size_t consumed = 0;
            double value = 0.0;
            try {
                value = std::stod(field, &consumed);
            } catch (const std::exception&) {
                throw ParseError(line_no, "rates must be numeric");
            }
            if (consumed != field.size()) throw ParseError(line_no, "rates must be numeric");
            return value;
        };
        DetectorProfile p;
        p.fp = parse_rate(fields[1]);
        p.fn = parse_rate(fields[2]);
        if (!within(p.fp, 0, 1) || !within(p.fn, 0, 1))
            throw ParseError(line_no, "rate outside [0,1]");
        profiles.emplace_back(fields[0], p);
    }
    if (profiles.empty()) throw SchemaError("profiles file has no rows");
    return profiles;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace detmet
