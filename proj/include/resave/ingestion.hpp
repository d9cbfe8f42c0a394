#pragma once

// Delimited-text datasets and the held-out evaluation on real data.
//
// Format: UTF-8, ',' delimiter, '.' decimal point, exactly one header line.
// Fields may be double-quoted ("" escapes a quote). Files whose name ends
// in ".gz" are read through zlib. A data row is skipped (and its line number
// recorded) when any selected cell is empty, "NA", unparsable or non-finite;
// cells of columns that are not selected are never inspected.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "resave/experiments.hpp"
#include "resave/linalg.hpp"
#include "resave/recursive_estimators.hpp"
#include "resave/save_estimator.hpp"

namespace resave {

/// A column chosen by header name or by 0-based position. A name that
/// matches a header wins over its numeric reading.
using ColumnRef = std::variant<std::string, std::size_t>;

struct Dataset {
    /// Selected columns only, in file order.
    std::vector<std::string> column_names;
    std::vector<Vector> rows;
    std::size_t response_index = 0;
    std::vector<std::size_t> predictor_indices;
    /// 1-based line numbers of rejected data rows.
    std::vector<std::size_t> skipped_lines;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t dim() const noexcept { return predictor_indices.size(); }
    Observation observation(std::size_t i) const;
    std::vector<Observation> observations() const;
};

struct ColumnSelection {
    std::size_t response = 0;
    std::vector<std::size_t> predictors;
};

/// Resolves references against a header row. Empty `predictors` selects
/// every column except the response. Errors as for load_csv.
ColumnSelection resolve_columns(const std::vector<std::string>& header, const ColumnRef& response,
                                const std::vector<ColumnRef>& predictors);

/// Parses one selected cell: empty, "NA", unparsable or non-finite -> nullopt.
std::optional<double> parse_cell(std::string_view cell);

/// Empty `predictors` selects every column except the response.
/// Errors: unreadable file -> io-error; unknown column, duplicate selection
/// or response among predictors -> schema-error; no usable row -> empty-dataset.
Dataset load_csv(const std::string& path, const ColumnRef& response, const std::vector<ColumnRef>& predictors = {});

/// Same parser on in-memory text (`source` only labels messages).
Dataset parse_csv(std::string_view text, const ColumnRef& response, const std::vector<ColumnRef>& predictors = {},
                  std::string_view source = "<memory>");

/// Raw file contents, gunzipped when the name ends in ".gz".
std::string read_text_file(const std::string& path);

/// Splits one CSV record into trimmed fields.
std::vector<std::string> split_csv_line(std::string_view line);

struct HoldoutConfig {
    std::size_t n0 = 100;
    std::size_t p = 0;
    Estimator estimator = Estimator::save_r;
    /// Fit options; whitening is estimated from the fitted rows unless set.
    FitOptions fit;
    /// Reference direction; defaults to Save-NR on the whole dataset.
    std::optional<Vector> reference;
    /// Rows are used in file order unless a shuffle seed is given.
    std::optional<std::uint64_t> shuffle_seed;
};

struct HoldoutReport {
    Estimator estimator = Estimator::save_r;
    std::size_t n0 = 0;
    std::size_t p = 0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;  ///< held-out rows where R^2_i is undefined
    double r2_mean = 0.0;
    double r2_std = 0.0;
    Vector beta_hat;   ///< leading direction, original predictor scale
    Vector reference;  ///< direction R^2_i was measured against
};

/// Save-R fits rows 1..n0 and streams n0+1..n0+p; Save-NR fits rows 1..n0+p
/// at once. R^2_i is evaluated on rows n0+p+1..end with the raw predictors.
/// Throws insufficient-data unless n0 + p < number of rows.
HoldoutReport holdout_eval(const Dataset& data, const HoldoutConfig& config);

/// Row order used by holdout_eval: identity, or a Fisher-Yates shuffle
/// driven by Rng(seed).
std::vector<std::size_t> row_order(std::size_t n, std::optional<std::uint64_t> shuffle_seed);

}  // namespace resave
