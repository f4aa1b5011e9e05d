#include "harvol/ingest.hpp"

#include "harvol/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace harvol {
namespace {

using ordered_json = nlohmann::ordered_json;

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> cells;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

/// Reads a CSV whose header must equal `expected`. Blank lines are skipped.
std::vector<CsvRow> read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected,
                             const char* module) {
    std::ifstream in(path);
    if (!in) throw ValidationError(module, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::vector<CsvRow> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (!header_seen) {
            if (!cells.empty() && cells[0].rfind("\xEF\xBB\xBF", 0) == 0) cells[0].erase(0, 3);
            if (cells != expected) {
                std::string want;
                for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
                throw ValidationError(module, path.string() + ":" + std::to_string(line_no) + ": expected header '" +
                                                  want + "'");
            }
            header_seen = true;
            continue;
        }
        if (cells.size() != expected.size()) {
            throw ValidationError(module, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(expected.size()) + " fields, got " +
                                              std::to_string(cells.size()));
        }
        rows.push_back({line_no, std::move(cells)});
    }
    if (!header_seen) throw ValidationError(module, path.string() + ": empty file");
    return rows;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

double parse_double(const std::string& text, const std::filesystem::path& path, std::size_t line, const char* module) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw ValidationError(module, where(path, line) + ": not a number '" + text + "'");
    }
    return value;
}

Instant parse_ts(const std::string& text, const std::filesystem::path& path, std::size_t line, const char* module) {
    try {
        return parse_timestamp(text);
    } catch (const ValidationError& e) {
        throw ValidationError(module, where(path, line) + ": " + e.what());
    }
}

ordered_json series_json(const WindowSeries& s) {
    ordered_json arr = ordered_json::array();
    for (const auto& v : s.values()) {
        if (v) {
            arr.push_back(*v);
        } else {
            arr.push_back(nullptr);
        }
    }
    return arr;
}

WindowSeries series_from_json(const ordered_json& arr, const GridPtr& grid, CalendarScope scope, const char* name) {
    if (!arr.is_array()) throw ValidationError("ingest", std::string("dataset field '") + name + "' must be an array");
    std::vector<std::optional<double>> values;
    values.reserve(arr.size());
    for (const auto& v : arr) {
        if (v.is_null()) {
            values.emplace_back();
        } else if (v.is_number()) {
            values.emplace_back(v.get<double>());
        } else {
            throw ValidationError("ingest", std::string("dataset field '") + name + "' has a non-numeric entry");
        }
    }
    try {
        return WindowSeries(grid, scope, std::move(values));
    } catch (const ValidationError& e) {
        throw ValidationError("ingest", std::string("dataset field '") + name + "': " + e.what());
    }
}

}  // namespace

PriceSeries ingest_prices(const std::filesystem::path& path, std::chrono::seconds interval) {
    constexpr const char* kModule = "ingest";
    PriceSeries out;
    out.interval = interval;
    for (const auto& row : read_csv(path, {"timestamp_utc", "price"}, kModule)) {
        const Instant ts = parse_ts(row.cells[0], path, row.line, kModule);
        const double price = parse_double(row.cells[1], path, row.line, kModule);
        if (!(price > 0.0)) {
            throw ValidationError(kModule, where(path, row.line) + ": nonpositive price " + row.cells[1]);
        }
        if (!out.timestamps.empty() && ts <= out.timestamps.back()) {
            throw ValidationError(kModule, where(path, row.line) + ": timestamp " + row.cells[0] +
                                               " is not after the previous row");
        }
        out.timestamps.push_back(ts);
        out.prices.push_back(price);
    }
    return out;
}

IVQuoteSeries ingest_iv(const std::filesystem::path& path, const std::string& maturity) {
    constexpr const char* kModule = "ingest";
    const auto& known = known_maturities();
    if (std::find(known.begin(), known.end(), maturity) == known.end()) {
        throw ValidationError(kModule, "unknown maturity '" + maturity + "'");
    }
    IVQuoteSeries out;
    out.maturity = maturity;
    std::map<std::string, Instant> last_seen;
    for (const auto& row : read_csv(path, {"timestamp_utc", "maturity", "quote"}, kModule)) {
        const Instant ts = parse_ts(row.cells[0], path, row.line, kModule);
        const std::string& m = row.cells[1];
        if (std::find(known.begin(), known.end(), m) == known.end()) {
            throw ValidationError(kModule, where(path, row.line) + ": unknown maturity '" + m + "'");
        }
        const double quote = parse_double(row.cells[2], path, row.line, kModule);
        if (!(quote > 0.0)) {
            throw ValidationError(kModule, where(path, row.line) + ": nonpositive quote " + row.cells[2]);
        }
        const auto it = last_seen.find(m);
        if (it != last_seen.end() && ts <= it->second) {
            throw ValidationError(kModule, where(path, row.line) + ": timestamps for maturity " + m +
                                               " are not increasing");
        }
        last_seen[m] = ts;
        if (m == maturity) {
            out.timestamps.push_back(ts);
            out.quotes.push_back(quote);
        }
    }
    return out;
}

RawBatch ingest_batch(const std::filesystem::path& path) {
    constexpr const char* kModule = "ingest";
    const auto rows = read_csv(path, {"term", "timestamp_utc", "value"}, kModule);
    if (rows.empty()) throw ValidationError(kModule, path.string() + ": batch has no observations");
    std::string term = rows.front().cells[0];
    const Instant first = parse_ts(rows.front().cells[1], path, rows.front().line, kModule);
    const Hour start = std::chrono::floor<std::chrono::hours>(first);
    if (Instant{start} != first) {
        throw ValidationError(kModule, where(path, rows.front().line) + ": batch timestamps must be on the hour");
    }
    std::vector<int> raw;
    raw.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.cells[0] != term) {
            throw ValidationError(kModule, where(path, row.line) + ": batch mixes terms '" + term + "' and '" +
                                               row.cells[0] + "'");
        }
        const Instant ts = parse_ts(row.cells[1], path, row.line, kModule);
        if (ts != Instant{start} + std::chrono::hours{i}) {
            throw ValidationError(kModule, where(path, row.line) + ": expected consecutive hourly timestamps");
        }
        int value = 0;
        const auto& cell = row.cells[2];
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
            throw ValidationError(kModule, where(path, row.line) + ": search volume must be an integer, got '" +
                                               cell + "'");
        }
        if (value < 0 || value > 100) {
            throw ValidationError(kModule, where(path, row.line) + ": search volume " + cell + " outside 0..100");
        }
        raw.push_back(value);
    }
    return clamp_batch(std::move(term), start, raw);
}

std::vector<CategoryBatches> ingest_batches(const std::filesystem::path& manifest) {
    constexpr const char* kModule = "ingest";
    std::ifstream in(manifest);
    if (!in) throw ValidationError(kModule, "cannot open manifest " + manifest.string());
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(kModule, manifest.string() + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ValidationError(kModule, manifest.string() + ": manifest must be an object");
    const auto base = manifest.parent_path();

    std::vector<CategoryBatches> out;
    for (const auto& [cat_name, terms] : doc.items()) {
        CategoryBatches cat;
        cat.category = parse_category(cat_name);
        if (!terms.is_object()) {
            throw ValidationError(kModule, "manifest category '" + cat_name + "' must map terms to file lists");
        }
        for (const auto& [term, files] : terms.items()) {
            if (!files.is_array() || files.empty()) {
                throw ValidationError(kModule, "manifest term '" + term + "' needs a non-empty list of batch files");
            }
            TermBatches tb{term, {}};
            std::vector<std::string> names;
            for (const auto& f : files) {
                const std::filesystem::path p = f.get<std::string>();
                const auto resolved = p.is_absolute() ? p : base / p;
                RawBatch b = ingest_batch(resolved);
                if (b.term != term) {
                    throw ValidationError(kModule, resolved.string() + ": batch term '" + b.term +
                                                       "' does not match manifest term '" + term + "'");
                }
                if (!tb.batches.empty() && b.start <= tb.batches.back().start) {
                    throw ValidationError(kModule, "batches out of order for '" + term + "': " + names.back() +
                                                       " and " + resolved.string());
                }
                names.push_back(resolved.string());
                tb.batches.push_back(std::move(b));
            }
            cat.terms.push_back(std::move(tb));
        }
        out.push_back(std::move(cat));
    }
    return out;
}

std::string dataset_json(const ModelInputs& inputs, const std::map<std::string, double>& truth) {
    const auto& g = *inputs.grid;
    ordered_json doc;
    doc["grid"] = {{"start", format_date(g.start_date())},
                   {"end", format_date(g.end_date())},
                   {"window_hours", g.window_hours()}};
    doc["trading"] = {{"ln_rv", series_json(inputs.ln_rv)},
                      {"ln_iv", series_json(inputs.ln_iv)},
                      {"dln_iv", series_json(inputs.dln_iv)}};
    doc["all_days"] = {{"ln_g", series_json(inputs.ln_g)},
                       {"ln_r", series_json(inputs.ln_r)},
                       {"ln_e", series_json(inputs.ln_e)}};
    if (!truth.empty()) {
        ordered_json t = ordered_json::object();
        for (const auto& [k, v] : truth) t[k] = v;
        doc["truth"] = t;
    }
    return doc.dump(1) + "\n";
}

void write_dataset(const std::filesystem::path& path, const ModelInputs& inputs,
                   const std::map<std::string, double>& truth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("ingest", "cannot write " + path.string());
    out << dataset_json(inputs, truth);
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("ingest", "cannot open dataset " + path.string());
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
        const auto& g = doc.at("grid");
        const GridPtr grid = build_grid(parse_date(g.at("start").get<std::string>()),
                                        parse_date(g.at("end").get<std::string>()), g.at("window_hours").get<int>());
        Dataset ds;
        ds.inputs.grid = grid;
        const auto& tr = doc.at("trading");
        const auto& ad = doc.at("all_days");
        ds.inputs.ln_rv = series_from_json(tr.at("ln_rv"), grid, CalendarScope::trading_days, "ln_rv");
        ds.inputs.ln_iv = series_from_json(tr.at("ln_iv"), grid, CalendarScope::trading_days, "ln_iv");
        ds.inputs.dln_iv = series_from_json(tr.at("dln_iv"), grid, CalendarScope::trading_days, "dln_iv");
        ds.inputs.ln_g = series_from_json(ad.at("ln_g"), grid, CalendarScope::all_days, "ln_g");
        ds.inputs.ln_r = series_from_json(ad.at("ln_r"), grid, CalendarScope::all_days, "ln_r");
        ds.inputs.ln_e = series_from_json(ad.at("ln_e"), grid, CalendarScope::all_days, "ln_e");
        if (doc.contains("truth")) {
            for (const auto& [k, v] : doc["truth"].items()) ds.truth[k] = v.get<double>();
        }
        return ds;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("ingest", path.string() + ": malformed dataset: " + e.what());
    }
}

std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw ValidationError("ingest", "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> col;
    std::vector<double> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (!col) {
            const auto it = std::find(cells.begin(), cells.end(), column);
            if (it == cells.end()) throw ValidationError("ingest", path.string() + ": no column '" + column + "'");
            col = static_cast<std::size_t>(it - cells.begin());
            continue;
        }
        if (*col >= cells.size() || cells[*col].empty()) continue;
        out.push_back(parse_double(cells[*col], path, line_no, "ingest"));
    }
    return out;
}

}  // namespace harvol
