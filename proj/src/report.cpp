#include "symrank/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace symrank {

using ordered_json = nlohmann::ordered_json;

OutputFormat parse_format(const std::string& s) {
    if (s == "jsonl") return OutputFormat::Jsonl;
    if (s == "csv") return OutputFormat::Csv;
    throw std::invalid_argument("unknown format '" + s + "' (want jsonl or csv)");
}

std::string fmt_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace {

double json_real(const ordered_json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

ordered_json real_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

struct TableSpec {
    std::string schema;
    std::vector<std::string> columns;
    std::vector<std::string> (*csv_row)(const AnyRecord&);
    ordered_json (*json_row)(const AnyRecord&);
};

std::string csv_real(double v) { return fmt_real(v); }

const TableSpec& spec_for(std::size_t index) {
    static const std::vector<TableSpec> specs = {
        // SurveyRow
        {"symrank.survey.v1",
         {"n", "trials", "singular", "p_hat", "stderr", "logdet_scaled"},
         [](const AnyRecord& r) {
             const auto& s = std::get<SurveyRow>(r);
             return std::vector<std::string>{std::to_string(s.n), std::to_string(s.trials),
                                             std::to_string(s.singular_count), rat_str(s.p_hat),
                                             csv_real(s.stderr_), csv_real(s.mean_log_det_scaled)};
         },
         [](const AnyRecord& r) {
             const auto& s = std::get<SurveyRow>(r);
             ordered_json j;
             j["schema"] = "symrank.survey.v1";
             j["n"] = s.n;
             j["trials"] = s.trials;
             j["singular"] = s.singular_count;
             j["nonsingular"] = s.nonsingular_count;
             j["p_hat"] = rat_str(s.p_hat);
             j["stderr"] = real_or_null(s.stderr_);
             j["logdet_scaled"] = real_or_null(s.mean_log_det_scaled);
             j["exhaustive"] = s.exhaustive;
             return j;
         }},
        // ChainStepRow
        {"symrank.chainstep.v1",
         {"chain", "n", "rank", "increment", "class", "x_value"},
         [](const AnyRecord& r) {
             const auto& s = std::get<ChainStepRow>(r);
             return std::vector<std::string>{std::to_string(s.chain),     std::to_string(s.n),
                                             std::to_string(s.rank),      std::to_string(s.increment),
                                             s.cls,                       csv_real(s.x_value)};
         },
         [](const AnyRecord& r) {
             const auto& s = std::get<ChainStepRow>(r);
             ordered_json j;
             j["schema"] = "symrank.chainstep.v1";
             j["chain"] = s.chain;
             j["seed"] = s.seed;
             j["n"] = s.n;
             j["rank"] = s.rank;
             j["increment"] = s.increment;
             j["class"] = s.cls;
             j["x_value"] = s.x_value;
             return j;
         }},
        // IncStatRow
        {"symrank.incstats.v1",
         {"n", "class", "increment", "count", "class_total", "freq", "se"},
         [](const AnyRecord& r) {
             const auto& s = std::get<IncStatRow>(r);
             return std::vector<std::string>{std::to_string(s.n),     s.cls,
                                             std::to_string(s.increment), std::to_string(s.count),
                                             std::to_string(s.class_total), csv_real(s.freq),
                                             csv_real(s.se)};
         },
         [](const AnyRecord& r) {
             const auto& s = std::get<IncStatRow>(r);
             ordered_json j;
             j["schema"] = "symrank.incstats.v1";
             j["n"] = s.n;
             j["class"] = s.cls;
             j["increment"] = s.increment;
             j["count"] = s.count;
             j["class_total"] = s.class_total;
             j["freq"] = s.freq;
             j["se"] = s.se;
             return j;
         }},
        // ClassifyRow
        {"symrank.classify.v1",
         {"n", "class", "count", "group_total", "freq", "se"},
         [](const AnyRecord& r) {
             const auto& s = std::get<ClassifyRow>(r);
             return std::vector<std::string>{std::to_string(s.n),          s.cls,
                                             std::to_string(s.count),      std::to_string(s.group_total),
                                             csv_real(s.freq),             csv_real(s.se)};
         },
         [](const AnyRecord& r) {
             const auto& s = std::get<ClassifyRow>(r);
             ordered_json j;
             j["schema"] = "symrank.classify.v1";
             j["n"] = s.n;
             j["class"] = s.cls;
             j["count"] = s.count;
             j["group_total"] = s.group_total;
             j["freq"] = s.freq;
             j["se"] = s.se;
             return j;
         }},
        // XDecayRow
        {"symrank.xdecay.v1",
         {"n", "count", "mean_x", "se"},
         [](const AnyRecord& r) {
             const auto& s = std::get<XDecayRow>(r);
             return std::vector<std::string>{std::to_string(s.n), std::to_string(s.count),
                                             csv_real(s.mean), csv_real(s.se)};
         },
         [](const AnyRecord& r) {
             const auto& s = std::get<XDecayRow>(r);
             ordered_json j;
             j["schema"] = "symrank.xdecay.v1";
             j["n"] = s.n;
             j["count"] = s.count;
             j["mean_x"] = s.mean;
             j["se"] = s.se;
             return j;
         }},
        // ConcentrationReport
        {"symrank.concentration.v1",
         {"form", "interval", "size", "method", "exact", "prob", "estimate", "stderr", "trials",
          "atom_value", "bound", "hypothesis_met"},
         [](const AnyRecord& r) {
             const auto& s = std::get<ConcentrationReport>(r);
             return std::vector<std::string>{
                 s.form,
                 s.interval,
                 std::to_string(s.size),
                 to_string(s.method),
                 s.exact ? "1" : "0",
                 s.exact ? rat_str(s.prob) : "",
                 csv_real(s.estimate),
                 csv_real(s.stderr_),
                 std::to_string(s.trials),
                 s.atom_value,
                 csv_real(s.bound),
                 s.hypothesis_met ? "1" : "0"};
         },
         [](const AnyRecord& r) {
             const auto& s = std::get<ConcentrationReport>(r);
             ordered_json j;
             j["schema"] = "symrank.concentration.v1";
             j["form"] = s.form;
             j["interval"] = s.interval;
             j["size"] = s.size;
             j["method"] = to_string(s.method);
             j["exact"] = s.exact;
             j["prob"] = s.exact ? ordered_json(rat_str(s.prob)) : ordered_json(nullptr);
             j["estimate"] = s.estimate;
             j["stderr"] = s.stderr_;
             j["trials"] = s.trials;
             j["atom_value"] = s.atom_value;
             j["bound"] = real_or_null(s.bound);
             j["hypothesis_met"] = s.hypothesis_met;
             return j;
         }},
        // DecouplingRow
        {"symrank.decoupling.v1",
         {"desc", "k", "events", "violations", "min_slack"},
         [](const AnyRecord& r) {
             const auto& s = std::get<DecouplingRow>(r);
             return std::vector<std::string>{s.desc, std::to_string(s.k), std::to_string(s.events),
                                             std::to_string(s.violations), csv_real(s.min_slack)};
         },
         [](const AnyRecord& r) {
             const auto& s = std::get<DecouplingRow>(r);
             ordered_json j;
             j["schema"] = "symrank.decoupling.v1";
             j["desc"] = s.desc;
             j["k"] = s.k;
             j["events"] = s.events;
             j["violations"] = s.violations;
             j["min_slack"] = s.min_slack;
             return j;
         }},
    };
    return specs.at(index);
}

}  // namespace

std::string render_table(std::span<const AnyRecord> records, OutputFormat format) {
    std::size_t index = records.empty() ? 0 : records.front().index();
    for (const AnyRecord& r : records) {
        if (r.index() != index) throw std::invalid_argument("render_table: mixed record types");
    }
    const TableSpec& spec = spec_for(index);
    std::string out;
    if (format == OutputFormat::Csv) {
        for (std::size_t c = 0; c < spec.columns.size(); ++c) {
            if (c) out += ",";
            out += spec.columns[c];
        }
        out += "\n";
        for (const AnyRecord& r : records) {
            const auto row = spec.csv_row(r);
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out += ",";
                out += row[c];
            }
            out += "\n";
        }
    } else {
        for (const AnyRecord& r : records) {
            out += spec.json_row(r).dump();
            out += "\n";
        }
    }
    return out;
}

std::vector<ChainStepRow> chain_step_rows(std::span<const ChainTrace> traces) {
    std::vector<ChainStepRow> rows;
    for (std::size_t c = 0; c < traces.size(); ++c) {
        for (const ChainStep& s : traces[c].steps) {
            rows.push_back(ChainStepRow{static_cast<long long>(c), traces[c].seed, s.n, s.rank,
                                        s.increment, to_string(s.cls), s.x_value});
        }
    }
    return rows;
}

std::vector<IncStatRow> inc_stat_rows(const IncrementStats& stats) {
    std::vector<IncStatRow> rows;
    for (const auto& [key, count] : stats.counts()) {
        const auto [n, cls, inc] = key;
        const auto cond = stats.conditional(n, cls, inc);
        rows.push_back(
            IncStatRow{n, to_string(cls), inc, count, cond.total, cond.freq, cond.se});
    }
    return rows;
}

std::string matrix_to_json(const SymMatrix& m) {
    ordered_json j;
    j["schema"] = "symrank.matrix.v1";
    j["n"] = m.dim();
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.dim(); ++i) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.dim(); ++c) row.push_back(m.at(i, c));
        rows.push_back(std::move(row));
    }
    j["entries"] = std::move(rows);
    return j.dump();
}

SymMatrix matrix_from_json(const std::string& line) {
    const auto j = ordered_json::parse(line);
    if (j.at("schema") != "symrank.matrix.v1") throw std::invalid_argument("not a matrix record");
    const int n = j.at("n").get<int>();
    std::vector<std::vector<long long>> rows(n);
    for (int i = 0; i < n; ++i) rows[i] = j.at("entries").at(i).get<std::vector<long long>>();
    return SymMatrix::from_rows(rows);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

double parse_real(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

}  // namespace

std::vector<SurveyRow> parse_survey_csv(const std::string& text) {
    std::vector<SurveyRow> rows;
    std::stringstream ss(text);
    std::string line;
    bool header = true;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 6) throw std::invalid_argument("bad survey CSV line: " + line);
        SurveyRow r;
        r.n = std::stoi(f[0]);
        r.trials = std::stoll(f[1]);
        r.singular_count = std::stoll(f[2]);
        r.nonsingular_count = r.trials - r.singular_count;
        r.p_hat = parse_rat(f[3]);
        r.stderr_ = parse_real(f[4]);
        r.mean_log_det_scaled = parse_real(f[5]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SurveyRow> parse_survey_jsonl(const std::string& text) {
    std::vector<SurveyRow> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        const auto j = ordered_json::parse(line);
        if (j.at("schema") != "symrank.survey.v1") throw std::invalid_argument("not a survey record");
        SurveyRow r;
        r.n = j.at("n").get<int>();
        r.trials = j.at("trials").get<long long>();
        r.singular_count = j.at("singular").get<long long>();
        r.nonsingular_count = j.at("nonsingular").get<long long>();
        r.p_hat = parse_rat(j.at("p_hat").get<std::string>());
        r.stderr_ = json_real(j.at("stderr"));
        r.mean_log_det_scaled = json_real(j.at("logdet_scaled"));
        r.exhaustive = j.at("exhaustive").get<bool>();
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ChainStepRow> parse_chain_steps_jsonl(const std::string& text) {
    std::vector<ChainStepRow> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        const auto j = ordered_json::parse(line);
        if (j.at("schema") != "symrank.chainstep.v1") {
            throw std::invalid_argument("not a chain step record");
        }
        ChainStepRow r;
        r.chain = j.at("chain").get<long long>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.n = j.at("n").get<int>();
        r.rank = j.at("rank").get<int>();
        r.increment = j.at("increment").get<int>();
        r.cls = j.at("class").get<std::string>();
        r.x_value = j.at("x_value").get<double>();
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string manifest_to_json(const RunManifest& m) {
    ordered_json j;
    j["schema"] = "symrank.manifest.v1";
    j["version"] = m.version.empty() ? kArtifactVersion : m.version;
    j["command"] = m.command;
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : m.config) cfg[k] = v;
    j["config"] = std::move(cfg);
    j["wall_time_s"] = m.wall_time_s;
    j["total_trials"] = m.total_trials;
    ordered_json sum = ordered_json::object();
    for (const auto& [k, v] : m.summary) sum[k] = v;
    j["summary"] = std::move(sum);
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
            out.write(content.data(), static_cast<std::streamsize>(content.size()));
            if (!out) throw std::runtime_error("short write to '" + tmp + "'");
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

}  // namespace symrank
