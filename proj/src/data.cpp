#include "crbm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace crbm {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = first + text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

RawSeries take_rows(const RawSeries& s, Index begin, Index count) {
    RawSeries out;
    out.asset_names = s.asset_names;
    out.date_column = s.date_column;
    out.values = s.values.middleRows(begin, count);
    out.dates.assign(s.dates.begin() + begin, s.dates.begin() + begin + count);
    return out;
}

}  // namespace

Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        throw std::invalid_argument("not an ISO-8601 date: '" + text + "'");
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw std::invalid_argument("invalid calendar date: '" + text + "'");
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

CsvTable read_csv_table(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_fields(line);
    const auto label_it =
        label_column.empty() ? header.begin() : std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) throw DataError("column '" + label_column + "' not found in '" + path.string() + "'");
    const auto label_pos = static_cast<std::size_t>(label_it - header.begin());

    CsvTable table;
    table.label_header = *label_it;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_pos) table.column_names.push_back(header[c]);
    if (table.column_names.empty()) throw DataError("'" + path.string() + "' has no value columns");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        bool ok = fields.size() == header.size() && !fields[label_pos].empty();
        std::vector<double> row;
        row.reserve(table.column_names.size());
        for (std::size_t c = 0; ok && c < fields.size(); ++c) {
            if (c == label_pos) continue;
            double x = 0.0;
            ok = parse_double(fields[c], x);
            row.push_back(x);
        }
        if (!ok) {
            ++table.dropped_rows;
            continue;
        }
        table.labels.push_back(fields[label_pos]);
        rows.push_back(std::move(row));
    }

    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.column_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) table.values(Index(r), Index(c)) = rows[r][c];
    return table;
}

IngestResult ingest_csv(const std::filesystem::path& path, const std::string& date_column) {
    if (!std::filesystem::exists(path)) throw DataError("input file '" + path.string() + "' does not exist");
    CsvTable table = read_csv_table(path, date_column);

    std::vector<std::pair<Date, Index>> keyed;
    std::size_t dropped = table.dropped_rows;
    for (std::size_t r = 0; r < table.labels.size(); ++r) {
        try {
            keyed.emplace_back(parse_date(table.labels[r]), Index(r));
        } catch (const std::invalid_argument&) {
            ++dropped;
        }
    }
    if (keyed.empty()) throw DataError("'" + path.string() + "' has no parseable rows");
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t i = 1; i < keyed.size(); ++i)
        if (keyed[i].first == keyed[i - 1].first)
            throw DataError("duplicate date " + format_date(keyed[i].first) + " in '" + path.string() + "'");
    if (keyed.size() < 2) throw DataError("'" + path.string() + "' needs at least two complete rows");

    IngestResult out;
    out.dropped_rows = dropped;
    RawSeries& s = out.series;
    s.date_column = table.label_header;
    s.asset_names = table.column_names;
    s.values.resize(Index(keyed.size()), table.values.cols());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        s.dates.push_back(keyed[i].first);
        s.values.row(Index(i)) = table.values.row(keyed[i].second);
    }
    return out;
}

std::pair<RawSeries, RawSeries> chrono_split(const RawSeries& series, const Date& boundary) {
    const auto it = std::upper_bound(series.dates.begin(), series.dates.end(), boundary);
    const Index head = it - series.dates.begin();
    if (head == 0) throw DataError("split date " + format_date(boundary) + " precedes the first observation");
    if (head == series.length()) throw DataError("split date " + format_date(boundary) + " leaves the test side empty");
    return {take_rows(series, 0, head), take_rows(series, head, series.length() - head)};
}

BinaryCodec fit_binary_codec(const RawSeries& train, int bits) {
    if (bits < 1 || bits > kMaxCodecBits)
        throw std::invalid_argument("bits per asset must be in [1, " + std::to_string(kMaxCodecBits) + "]");
    if (train.length() < 2) throw DataError("binary codec needs at least two training rows");
    BinaryCodec codec;
    codec.bits = bits;
    codec.min = train.values.colwise().minCoeff().transpose();
    codec.max = train.values.colwise().maxCoeff().transpose();
    for (Index j = 0; j < codec.assets(); ++j)
        if (!(codec.min(j) < codec.max(j)))
            throw DataError("asset '" + train.asset_names.at(std::size_t(j)) + "' is constant on the training split");
    return codec;
}

std::uint64_t bin_index(double value, Index asset, const BinaryCodec& codec) {
    const double lo = codec.min(asset);
    const double hi = codec.max(asset);
    const double clipped = std::clamp(value, lo, hi);
    const double levels = static_cast<double>(codec.levels());
    const double idx = std::floor((clipped - lo) / (hi - lo) * levels + 0.5);
    return static_cast<std::uint64_t>(std::clamp(idx, 0.0, levels));
}

Eigen::VectorXd encode_binary(double value, Index asset, const BinaryCodec& codec) {
    const std::uint64_t idx = bin_index(value, asset, codec);
    Eigen::VectorXd bits(codec.bits);
    for (int k = 0; k < codec.bits; ++k) bits(k) = double((idx >> (codec.bits - 1 - k)) & 1U);
    return bits;
}

double decode_binary(const Eigen::Ref<const Eigen::VectorXd>& bits, Index asset, const BinaryCodec& codec) {
    if (bits.size() != codec.bits)
        throw std::invalid_argument("decode_binary: expected " + std::to_string(codec.bits) + " bits, got " +
                                    std::to_string(bits.size()));
    std::uint64_t idx = 0;
    for (int k = 0; k < codec.bits; ++k) idx = (idx << 1) | (bits(k) >= 0.5 ? 1U : 0U);
    const double lo = codec.min(asset);
    return lo + static_cast<double>(idx) / static_cast<double>(codec.levels()) * (codec.max(asset) - lo);
}

ZScoreParams fit_zscore(const RawSeries& train) {
    if (train.length() < 2) throw DataError("z-score parameters need at least two training rows");
    ZScoreParams p;
    p.mu = train.values.colwise().mean().transpose();
    const Eigen::MatrixXd centered = train.values.rowwise() - p.mu.transpose();
    p.sigma = (centered.colwise().squaredNorm() / double(train.length())).cwiseSqrt().transpose();
    for (Index j = 0; j < p.sigma.size(); ++j)
        if (!(p.sigma(j) > 0.0))
            throw DataError("asset '" + train.asset_names.at(std::size_t(j)) + "' has zero variance on the training split");
    return p;
}

EncodedSeries encode_binary_series(const RawSeries& series, const BinaryCodec& codec) {
    if (codec.assets() != series.assets()) throw std::invalid_argument("codec asset count does not match series");
    EncodedSeries out;
    out.mode = EncodingMode::binary;
    out.codec = codec;
    out.dates = series.dates;
    out.asset_names = series.asset_names;
    out.matrix.resize(series.length(), series.assets() * codec.bits);
    for (Index t = 0; t < series.length(); ++t)
        for (Index j = 0; j < series.assets(); ++j)
            out.matrix.row(t).segment(j * codec.bits, codec.bits) = encode_binary(series.values(t, j), j, codec).transpose();
    return out;
}

EncodedSeries standardize(const RawSeries& series, const ZScoreParams& params) {
    if (params.mu.size() != series.assets() || params.sigma.size() != series.assets())
        throw std::invalid_argument("z-score parameter length does not match series");
    if ((params.sigma.array() <= 0.0).any()) throw std::invalid_argument("z-score sigma must be positive");
    EncodedSeries out;
    out.mode = EncodingMode::continuous;
    out.codec = params;
    out.dates = series.dates;
    out.asset_names = series.asset_names;
    out.matrix = (series.values.rowwise() - params.mu.transpose()).array().rowwise() / params.sigma.transpose().array();
    return out;
}

Eigen::MatrixXd destandardize(const EncodedSeries& encoded) {
    const auto* params = std::get_if<ZScoreParams>(&encoded.codec);
    if (encoded.mode != EncodingMode::continuous || params == nullptr)
        throw std::invalid_argument("destandardize requires a continuous series with z-score parameters");
    if (params->mu.size() != encoded.matrix.cols()) throw std::invalid_argument("z-score parameter length mismatch");
    return (encoded.matrix.array().rowwise() * params->sigma.transpose().array()).rowwise() +
           params->mu.transpose().array();
}

}  // namespace crbm
