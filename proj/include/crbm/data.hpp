#pragma once

#include "crbm/model.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace crbm {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws std::invalid_argument on malformed or impossible dates.
Date parse_date(const std::string& text);
std::string format_date(const Date& d);

/// Error raised for bad input data (unreadable files, schema problems,
/// degenerate columns).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Plain CSV table: a label column plus numeric columns. Rows with a missing
/// or unparseable numeric cell are dropped and counted.
struct CsvTable {
    std::string label_header;
    std::vector<std::string> column_names;
    std::vector<std::string> labels;
    Eigen::MatrixXd values;
    std::size_t dropped_rows = 0;
};

CsvTable read_csv_table(const std::filesystem::path& path, const std::string& label_column);

struct RawSeries {
    std::vector<Date> dates;
    Eigen::MatrixXd values;  // T x D
    std::vector<std::string> asset_names;
    std::string date_column = "date";

    Index length() const { return values.rows(); }
    Index assets() const { return values.cols(); }
};

struct IngestResult {
    RawSeries series;
    std::size_t dropped_rows = 0;
};

/// Reads a dated CSV: rows sorted ascending, incomplete rows dropped.
IngestResult ingest_csv(const std::filesystem::path& path, const std::string& date_column = "date");

/// First part holds dates <= boundary, second dates > boundary.
std::pair<RawSeries, RawSeries> chrono_split(const RawSeries& series, const Date& boundary);

struct BinaryCodec {
    Eigen::VectorXd min;
    Eigen::VectorXd max;
    int bits = 16;

    Index assets() const { return min.size(); }
    std::uint64_t levels() const { return (std::uint64_t{1} << bits) - 1; }
    double bin_width(Index asset) const { return (max(asset) - min(asset)) / static_cast<double>(levels()); }
};

inline constexpr int kMaxCodecBits = 32;

BinaryCodec fit_binary_codec(const RawSeries& train, int bits = 16);

/// Quantization level of `value` after clipping to the codec range.
std::uint64_t bin_index(double value, Index asset, const BinaryCodec& codec);
/// `bits` entries of 0/1, most significant bit first.
Eigen::VectorXd encode_binary(double value, Index asset, const BinaryCodec& codec);
double decode_binary(const Eigen::Ref<const Eigen::VectorXd>& bits, Index asset, const BinaryCodec& codec);

struct ZScoreParams {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma;
};

/// Column means and population standard deviations.
ZScoreParams fit_zscore(const RawSeries& train);

enum class EncodingMode { binary, continuous };

inline const char* to_string(EncodingMode mode) { return mode == EncodingMode::binary ? "binary" : "continuous"; }

using Codec = std::variant<std::monostate, BinaryCodec, ZScoreParams>;

struct EncodedSeries {
    Eigen::MatrixXd matrix;  // T x D'
    EncodingMode mode = EncodingMode::continuous;
    Codec codec;
    std::vector<Date> dates;
    std::vector<std::string> asset_names;
};

EncodedSeries encode_binary_series(const RawSeries& series, const BinaryCodec& codec);
EncodedSeries standardize(const RawSeries& series, const ZScoreParams& params);
/// x = v * sigma + mu, columnwise.
Eigen::MatrixXd destandardize(const EncodedSeries& encoded);

inline Arch arch_for(EncodingMode mode) { return mode == EncodingMode::binary ? Arch::bernoulli : Arch::gaussian; }

}  // namespace crbm
