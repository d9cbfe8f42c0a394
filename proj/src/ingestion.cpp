#include "resave/ingestion.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "resave/error.hpp"
#include "resave/rng.hpp"

namespace resave {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::optional<double> parse_cell(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty() || cell == "NA") return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

namespace {

std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::size_t resolve(const ColumnRef& ref, const std::vector<std::string>& header) {
    if (const auto* index = std::get_if<std::size_t>(&ref)) {
        require(*index < header.size(), ErrorCode::schema_error,
                "column index " + std::to_string(*index) + " out of range (" + std::to_string(header.size()) +
                    " columns)");
        return *index;
    }
    const std::string& name = std::get<std::string>(ref);
    const auto it = std::find(header.begin(), header.end(), name);
    if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    if (const auto index = parse_index(name)) return resolve(ColumnRef{*index}, header);
    fail(ErrorCode::schema_error, "unknown column '" + name + "'");
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    auto flush = [&] {
        fields.push_back(was_quoted ? current : std::string(trim(current)));
        current.clear();
        was_quoted = false;
    };
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"' && trim(current).empty()) {
            current.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            flush();
        } else if (!(was_quoted && (c == ' ' || c == '\t' || c == '\r'))) {
            current.push_back(c);
        }
    }
    flush();
    return fields;
}

std::string read_text_file(const std::string& path) {
    if (ends_with(path, ".gz")) {
        gzFile file = gzopen(path.c_str(), "rb");
        require(file != nullptr, ErrorCode::io_error, "cannot open '" + path + "'");
        std::string out;
        char buffer[1 << 16];
        int got = 0;
        while ((got = gzread(file, buffer, sizeof buffer)) > 0) out.append(buffer, static_cast<std::size_t>(got));
        int errnum = 0;
        const char* msg = got < 0 ? gzerror(file, &errnum) : nullptr;
        const std::string detail = msg ? msg : "";
        gzclose(file);
        require(got == 0, ErrorCode::io_error, "cannot decompress '" + path + "': " + detail);
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io_error, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    require(!in.bad(), ErrorCode::io_error, "read error on '" + path + "'");
    return ss.str();
}

ColumnSelection resolve_columns(const std::vector<std::string>& header, const ColumnRef& response,
                                const std::vector<ColumnRef>& predictors) {
    ColumnSelection sel;
    sel.response = resolve(response, header);
    if (predictors.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (c != sel.response) sel.predictors.push_back(c);
    } else {
        for (const ColumnRef& ref : predictors) {
            const std::size_t c = resolve(ref, header);
            require(c != sel.response, ErrorCode::schema_error,
                    "response column '" + header[c] + "' is also a predictor");
            require(std::find(sel.predictors.begin(), sel.predictors.end(), c) == sel.predictors.end(),
                    ErrorCode::schema_error, "predictor column '" + header[c] + "' selected twice");
            sel.predictors.push_back(c);
        }
    }
    require(!sel.predictors.empty(), ErrorCode::schema_error, "no predictor columns selected");
    return sel;
}

Dataset parse_csv(std::string_view text, const ColumnRef& response, const std::vector<ColumnRef>& predictors,
                  std::string_view source) {
    if (ends_with(std::string_view(text).substr(0, 3), "\xEF\xBB\xBF")) text.remove_prefix(3);

    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++line_no;
        return true;
    };

    std::string_view line;
    require(next_line(line) && !trim(line).empty(), ErrorCode::schema_error,
            "'" + std::string(source) + "' has no header line");
    const std::vector<std::string> header = split_csv_line(line);

    const ColumnSelection sel = resolve_columns(header, response, predictors);
    const std::size_t y_col = sel.response;
    const std::vector<std::size_t>& x_cols = sel.predictors;

    std::vector<std::size_t> kept = x_cols;
    kept.push_back(y_col);
    std::sort(kept.begin(), kept.end());
    auto position = [&](std::size_t col) {
        return static_cast<std::size_t>(std::lower_bound(kept.begin(), kept.end(), col) - kept.begin());
    };

    Dataset data;
    for (std::size_t c : kept) data.column_names.push_back(header[c]);
    data.response_index = position(y_col);
    for (std::size_t c : x_cols) data.predictor_indices.push_back(position(c));

    while (next_line(line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        bool ok = fields.size() == header.size();
        Vector row(kept.size());
        for (std::size_t k = 0; ok && k < kept.size(); ++k) {
            const auto v = parse_cell(fields[kept[k]]);
            if (v) row[k] = *v;
            ok = v.has_value();
        }
        if (ok) {
            data.rows.push_back(std::move(row));
        } else {
            data.skipped_lines.push_back(line_no);
        }
    }
    require(!data.rows.empty(), ErrorCode::empty_dataset,
            "'" + std::string(source) + "' has no usable rows (" + std::to_string(data.skipped_lines.size()) +
                " rejected)");
    return data;
}

Dataset load_csv(const std::string& path, const ColumnRef& response, const std::vector<ColumnRef>& predictors) {
    return parse_csv(read_text_file(path), response, predictors, path);
}

Observation Dataset::observation(std::size_t i) const {
    const Vector& row = rows.at(i);
    Observation obs{row[response_index], Vector(predictor_indices.size())};
    for (std::size_t j = 0; j < predictor_indices.size(); ++j) obs.x[j] = row[predictor_indices[j]];
    return obs;
}

std::vector<Observation> Dataset::observations() const {
    std::vector<Observation> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out.push_back(observation(i));
    return out;
}

std::vector<std::size_t> row_order(std::size_t n, std::optional<std::uint64_t> shuffle_seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (!shuffle_seed || n < 2) return order;
    Rng rng(*shuffle_seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        // unbiased draw from [0, i] by rejection
        const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t r = rng.next_u64();
        while (r >= limit) r = rng.next_u64();
        std::swap(order[i], order[static_cast<std::size_t>(r % bound)]);
    }
    return order;
}

HoldoutReport holdout_eval(const Dataset& data, const HoldoutConfig& config) {
    const std::size_t n = data.size();
    require(config.n0 >= 1, ErrorCode::invalid_argument, "n0 must be at least 1");
    require(config.n0 + config.p < n, ErrorCode::insufficient_data,
            "n0 + p = " + std::to_string(config.n0 + config.p) + " leaves no held-out rows out of " +
                std::to_string(n));

    const std::vector<std::size_t> order = row_order(n, config.shuffle_seed);
    std::vector<Observation> obs;
    obs.reserve(n);
    for (std::size_t i : order) obs.push_back(data.observation(i));

    HoldoutReport report;
    report.estimator = config.estimator;
    report.n0 = config.n0;
    report.p = config.p;
    const std::span<const Observation> all(obs);
    report.beta_hat = estimate_direction(all.first(config.n0 + config.p), config.n0, config.estimator, config.fit);
    if (config.reference) {
        require(config.reference->size() == data.dim(), ErrorCode::invalid_argument,
                "reference direction has " + std::to_string(config.reference->size()) + " entries, expected " +
                    std::to_string(data.dim()));
        report.reference = *config.reference;
    } else {
        report.reference = fit_batch(all, config.fit).edr.direction_original(0);
    }

    std::vector<double> r2;
    for (const Observation& o : all.subspan(config.n0 + config.p)) {
        if (const auto v = r_squared_projected(report.beta_hat, report.reference, o.x)) {
            r2.push_back(*v);
        } else {
            ++report.skipped;
        }
    }
    report.evaluated = r2.size();
    const SummaryStats stats = summarize(r2);
    report.r2_mean = stats.mean;
    report.r2_std = stats.std;
    return report;
}

}  // namespace resave
