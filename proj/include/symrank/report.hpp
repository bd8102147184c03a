#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "symrank/chain_sim.hpp"
#include "symrank/concentration.hpp"
#include "symrank/matrix_core.hpp"
#include "symrank/structure.hpp"

namespace symrank {

enum class OutputFormat { Jsonl, Csv };

OutputFormat parse_format(const std::string& s);

/// Flattened per-step chain record.
struct ChainStepRow {
    long long chain = 0;
    std::uint64_t seed = 0;
    int n = 0;
    int rank = 0;
    int increment = 0;
    std::string cls;
    double x_value = 0.0;
};

struct IncStatRow {
    int n = 0;
    std::string cls;
    int increment = 0;
    long long count = 0;
    long long class_total = 0;
    double freq = 0.0;
    double se = 0.0;
};

struct ClassifyRow {
    int n = 0;
    std::string cls;
    long long count = 0;
    long long group_total = 0;  // singular or non-singular population
    double freq = 0.0;
    double se = 0.0;
};

struct DecouplingRow {
    std::string desc;
    int k = 0;
    long long events = 0;
    long long violations = 0;
    double min_slack = 0.0;  // min over events of p_joint - p_event^(2^k)
};

using AnyRecord = std::variant<SurveyRow, ChainStepRow, IncStatRow, ClassifyRow, XDecayRow,
                               ConcentrationReport, DecouplingRow>;

/// Renders homogeneous records: CSV with a stable column order, exact
/// rationals as "p/q", reals with 6 significant digits; or JSONL with one
/// schema-tagged object per line. Mixed record types are rejected.
std::string render_table(std::span<const AnyRecord> records, OutputFormat format);

std::string fmt_real(double v);  // fixed "%.6g"; NaN renders as "nan"

std::vector<ChainStepRow> chain_step_rows(std::span<const ChainTrace> traces);
std::vector<IncStatRow> inc_stat_rows(const IncrementStats& stats);

/// JSONL (de)serialization for matrices: {"schema":"symrank.matrix.v1",...}.
std::string matrix_to_json(const SymMatrix& m);
SymMatrix matrix_from_json(const std::string& line);

std::vector<SurveyRow> parse_survey_csv(const std::string& text);
std::vector<SurveyRow> parse_survey_jsonl(const std::string& text);
std::vector<ChainStepRow> parse_chain_steps_jsonl(const std::string& text);

struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;  // flag -> value, insertion order
    std::string version;
    double wall_time_s = 0.0;
    long long total_trials = 0;
    std::vector<std::pair<std::string, std::string>> summary;
};

std::string manifest_to_json(const RunManifest& m);

/// Writes via a temp file and renames, so failed runs leave nothing behind.
void write_file_atomic(const std::string& path, const std::string& content);

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace symrank
