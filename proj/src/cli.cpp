#include "crbm/cli.hpp"

#include "crbm/diagnostics.hpp"
#include "crbm/generation.hpp"
#include "crbm/model_io.hpp"
#include "crbm/training.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>

namespace crbm {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const fs::path& path) : out_(path) {
        if (!out_) throw DataError("cannot write '" + path.string() + "'");
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_matrix_csv(const fs::path& path, const std::vector<std::string>& names, const Eigen::MatrixXd& m) {
    CsvWriter w(path);
    std::vector<std::string> header{"asset"};
    header.insert(header.end(), names.begin(), names.end());
    w.row(header);
    for (Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row{names[std::size_t(i)]};
        for (Index j = 0; j < m.cols(); ++j) row.push_back(fmt(m(i, j)));
        w.row(row);
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

struct CommonOptions {
    std::string input;
    std::string model;
    std::string output_dir = ".";
    std::string date_column;
};

// ---------------------------------------------------------------- train

struct TrainOptions : CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string arch = "gaussian";
    std::string split_date;
    std::optional<int> lag;
    std::optional<int> hidden;
    std::optional<int> epochs;
    int bits = 16;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
    TrainConfig cfg = o.config.empty() ? TrainConfig{} : load_train_config(o.config);
    if (o.seed) cfg.seed = o.seed;
    if (o.lag) cfg.lag = *o.lag;
    if (o.hidden) cfg.hidden_units = *o.hidden;
    if (o.epochs) cfg.epochs = *o.epochs;
    cfg.validate();
    const Arch arch = parse_arch(o.arch);

    const IngestResult ingested = ingest_csv(o.input, o.date_column);
    const auto [train_raw, test_raw] = chrono_split(ingested.series, parse_date(o.split_date));

    ModelFile mf;
    mf.date_column = ingested.series.date_column;
    mf.asset_names = ingested.series.asset_names;
    EncodedSeries train_enc;
    EncodedSeries test_enc;
    if (arch == Arch::bernoulli) {
        const BinaryCodec codec = fit_binary_codec(train_raw, o.bits);
        train_enc = encode_binary_series(train_raw, codec);
        test_enc = encode_binary_series(test_raw, codec);
        mf.codec = codec;
        mf.mode = EncodingMode::binary;
    } else {
        const ZScoreParams z = fit_zscore(train_raw);
        train_enc = standardize(train_raw, z);
        test_enc = standardize(test_raw, z);
        mf.codec = z;
        mf.mode = EncodingMode::continuous;
    }
    if (train_enc.matrix.rows() <= cfg.lag) throw DataError("training split is not longer than the lag");

    const TrainReport report = train(train_enc, cfg, &test_enc);
    mf.params = report.params;
    mf.config = cfg;
    mf.seed_window = history_window(train_enc.matrix, train_enc.matrix.rows(), Index(cfg.lag));

    save_model(o.model, mf);
    ensure_dir(o.output_dir);
    CsvWriter w(fs::path(o.output_dir) / "train_report.csv");
    w.row({"epoch", "reconstruction_mse", "free_energy_train", "free_energy_heldout"});
    for (std::size_t e = 0; e < report.reconstruction_mse.size(); ++e) {
        const double held = e < report.free_energy_heldout.size() ? report.free_energy_heldout[e] : std::nan("");
        w.row({std::to_string(e + 1), fmt(report.reconstruction_mse[e]), fmt(report.free_energy_train[e]), fmt(held)});
    }
    out << "trained " << to_string(arch) << " CRBM on " << train_raw.length() << " rows (" << ingested.dropped_rows
        << " dropped), final mse " << fmt(report.reconstruction_mse.back()) << ", model written to " << o.model << '\n';
    return kExitOk;
}

// ------------------------------------------------------------- generate

struct GenerateOptions : CommonOptions {
    std::optional<std::uint64_t> seed;
    Index steps = 0;
    Index burn_in = kDefaultBurnIn;
    std::string output_name = "synthetic.csv";
};

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
    const ModelFile mf = load_model(o.model);
    Rng rng(*o.seed);
    EncodedSeries series = generate(mf.params, mf.seed_window, o.steps, o.burn_in, rng);
    series.codec = mf.codec;
    const Eigen::MatrixXd raw = decode_series(series);

    ensure_dir(o.output_dir);
    const fs::path path = fs::path(o.output_dir) / o.output_name;
    CsvWriter w(path);
    std::vector<std::string> header{mf.date_column};
    header.insert(header.end(), mf.asset_names.begin(), mf.asset_names.end());
    w.row(header);
    for (Index t = 0; t < raw.rows(); ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (Index j = 0; j < raw.cols(); ++j) row.push_back(fmt(raw(t, j)));
        w.row(row);
    }
    out << "wrote " << raw.rows() << " synthetic rows to " << path.string() << '\n';
    return kExitOk;
}

// --------------------------------------------------------------- energy

struct EnergyOptions : CommonOptions {
    std::string overlay;
    int flag_window = kDefaultFlagWindow;
    double flag_threshold = kDefaultFlagThreshold;
};

int cmd_energy(const EnergyOptions& o, std::ostream& out) {
    const ModelFile mf = load_model(o.model);
    IngestResult ingested = ingest_csv(o.input, o.date_column);
    RawSeries& series = ingested.series;

    std::optional<Eigen::VectorXd> overlay;
    if (!o.overlay.empty()) {
        const auto it = std::find(series.asset_names.begin(), series.asset_names.end(), o.overlay);
        if (it == series.asset_names.end()) throw DataError("overlay column '" + o.overlay + "' not found in input");
        const Index col = it - series.asset_names.begin();
        overlay = series.values.col(col);
        const bool model_asset = std::find(mf.asset_names.begin(), mf.asset_names.end(), o.overlay) != mf.asset_names.end();
        if (!model_asset) {
            Eigen::MatrixXd kept(series.length(), series.assets() - 1);
            kept << series.values.leftCols(col), series.values.rightCols(series.assets() - col - 1);
            series.values = std::move(kept);
            series.asset_names.erase(it);
        }
    }
    if (series.asset_names != mf.asset_names) {
        std::string msg = "input columns do not match the model's assets: expected [";
        for (std::size_t i = 0; i < mf.asset_names.size(); ++i) msg += (i ? "," : "") + mf.asset_names[i];
        msg += "], got [";
        for (std::size_t i = 0; i < series.asset_names.size(); ++i) msg += (i ? "," : "") + series.asset_names[i];
        throw DataError(msg + "]");
    }

    const EncodedSeries encoded = mf.mode == EncodingMode::binary
                                      ? encode_binary_series(series, std::get<BinaryCodec>(mf.codec))
                                      : standardize(series, std::get<ZScoreParams>(mf.codec));
    if (encoded.matrix.rows() <= mf.params.lag) throw DataError("input is not longer than the model lag");
    const auto records = free_energy_series(encoded, mf.params);
    const auto flags = regime_flags(records, o.flag_window, o.flag_threshold);

    ensure_dir(o.output_dir);
    CsvWriter w(fs::path(o.output_dir) / "free_energy.csv");
    w.row({"date", "total", "quadratic", "structural", "flag"});
    double sum = 0.0;
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        w.row({format_date(*r.date), fmt(r.total), fmt(r.quadratic), fmt(r.structural), flags[i] ? "1" : "0"});
        sum += r.total;
        flagged += flags[i] ? 1 : 0;
    }
    if (overlay) {
        CsvWriter ow(fs::path(o.output_dir) / "free_energy_overlay.csv");
        ow.row({"date", "total", "quadratic", "structural", o.overlay});
        for (const auto& r : records)
            ow.row({format_date(*r.date), fmt(r.total), fmt(r.quadratic), fmt(r.structural), fmt((*overlay)(r.row))});
    }
    out << "scored " << records.size() << " dates, mean free energy " << fmt(sum / double(records.size())) << ", "
        << flagged << " flagged\n";
    return kExitOk;
}

// ---------------------------------------------------------------- stats

struct StatsOptions : CommonOptions {
    std::string synthetic;
    int quantiles = 99;
};

int cmd_stats(const StatsOptions& o, std::ostream& out) {
    const CsvTable real = read_csv_table(o.input, o.date_column);
    const CsvTable synth = read_csv_table(o.synthetic, o.date_column);

    auto sorted_names = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    if (sorted_names(real.column_names) != sorted_names(synth.column_names))
        throw DataError("real and synthetic files have different asset columns");
    Eigen::MatrixXd synth_values(synth.values.rows(), synth.values.cols());
    for (std::size_t j = 0; j < real.column_names.size(); ++j) {
        const auto pos = std::find(synth.column_names.begin(), synth.column_names.end(), real.column_names[j]) -
                         synth.column_names.begin();
        synth_values.col(Index(j)) = synth.values.col(pos);
    }
    const auto& names = real.column_names;

    ensure_dir(o.output_dir);
    const fs::path dir(o.output_dir);
    for (std::size_t j = 0; j < names.size(); ++j) {
        CsvWriter w(dir / ("qq_" + names[j] + ".csv"));
        w.row({"level", "real", "synthetic"});
        for (const auto& q : qq_table(real.values.col(Index(j)), synth_values.col(Index(j)), o.quantiles))
            w.row({fmt(q.level), fmt(q.real), fmt(q.synthetic)});
    }

    const CorrelationFidelity fid = correlation_fidelity(real.values, synth_values);
    write_matrix_csv(dir / "corr_real.csv", names, fid.real.values);
    write_matrix_csv(dir / "corr_synth.csv", names, fid.synthetic.values);
    write_matrix_csv(dir / "corr_diff.csv", names, fid.difference);

    const SummaryStats rs = summary_stats(real.values);
    const SummaryStats ss = summary_stats(synth_values);
    {
        CsvWriter w(dir / "summary_stats.csv");
        w.row({"source", "asset", "mean", "std", "skewness", "excess_kurtosis", "q0.001", "q0.01", "q0.05", "q0.25",
               "q0.5", "q0.75", "q0.95", "q0.99", "q0.999"});
        for (const auto& [label, s] : {std::pair{"real", &rs}, std::pair{"synthetic", &ss}}) {
            for (std::size_t j = 0; j < names.size(); ++j) {
                const Index c = Index(j);
                std::vector<std::string> row{label, names[j], fmt(s->mean(c)), fmt(s->std(c)), fmt(s->skewness(c)),
                                             fmt(s->excess_kurtosis(c))};
                for (Index k = 0; k < s->quantiles.rows(); ++k) row.push_back(fmt(s->quantiles(k, c)));
                w.row(row);
            }
        }
    }
    {
        CsvWriter w(dir / "sq_autocorr.csv");
        std::vector<std::string> header{"lag"};
        for (const auto& n : names) header.push_back("real_" + n);
        for (const auto& n : names) header.push_back("synthetic_" + n);
        w.row(header);
        for (Index k = 0; k < rs.squared_autocorr.rows(); ++k) {
            std::vector<std::string> row{std::to_string(k + 1)};
            for (Index j = 0; j < rs.squared_autocorr.cols(); ++j) row.push_back(fmt(rs.squared_autocorr(k, j)));
            for (Index j = 0; j < ss.squared_autocorr.cols(); ++j) row.push_back(fmt(ss.squared_autocorr(k, j)));
            w.row(row);
        }
    }
    out << "correlation fidelity score " << fmt(fid.score) << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conditional RBM training, generation and free-energy diagnostics", "crbm"};
    app.require_subcommand(1);

    TrainOptions train_opts;
    auto* train = app.add_subcommand("train", "fit a CRBM on the training split of a CSV");
    train->add_option("--input", train_opts.input, "input CSV (date column + assets)")->required();
    train->add_option("--model", train_opts.model, "model file to write")->required();
    train->add_option("--config", train_opts.config, "key=value training config");
    train->add_option("--seed", train_opts.seed, "random seed")->required();
    train->add_option("--output-dir", train_opts.output_dir, "directory for train_report.csv");
    train->add_option("--arch", train_opts.arch, "bernoulli or gaussian")
        ->check(CLI::IsMember({"bernoulli", "gaussian"}));
    train->add_option("--split-date", train_opts.split_date, "last training date (YYYY-MM-DD)")->required();
    train->add_option("--lag", train_opts.lag, "autoregressive lag N");
    train->add_option("--hidden", train_opts.hidden, "hidden units");
    train->add_option("--epochs", train_opts.epochs, "training epochs");
    train->add_option("--bits", train_opts.bits, "bits per asset (bernoulli)");
    train->add_option("--date-column", train_opts.date_column, "date column name (default: first column)");

    GenerateOptions gen_opts;
    auto* gen = app.add_subcommand("generate", "sample a synthetic series from a trained model");
    gen->add_option("--model", gen_opts.model, "model file")->required();
    gen->add_option("--steps", gen_opts.steps, "rows to generate")->required()->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_opts.seed, "random seed")->required();
    gen->add_option("--burn-in", gen_opts.burn_in, "Gibbs steps discarded per row")->check(CLI::NonNegativeNumber);
    gen->add_option("--output-dir", gen_opts.output_dir, "output directory");
    gen->add_option("--output", gen_opts.output_name, "output file name");

    EnergyOptions energy_opts;
    auto* energy = app.add_subcommand("energy", "per-date free energy and its decomposition");
    energy->add_option("--model", energy_opts.model, "model file")->required();
    energy->add_option("--input", energy_opts.input, "CSV to score")->required();
    energy->add_option("--output-dir", energy_opts.output_dir, "output directory");
    energy->add_option("--overlay", energy_opts.overlay, "column to join onto the free-energy series");
    energy->add_option("--flag-window", energy_opts.flag_window, "rolling window for regime flags")
        ->check(CLI::Range(2, 1 << 30));
    energy->add_option("--flag-threshold", energy_opts.flag_threshold, "flag threshold in rolling std units");
    energy->add_option("--date-column", energy_opts.date_column, "date column name (default: first column)");

    StatsOptions stats_opts;
    auto* stats = app.add_subcommand("stats", "compare real and synthetic series");
    stats->add_option("--input", stats_opts.input, "real CSV")->required();
    stats->add_option("--synthetic", stats_opts.synthetic, "synthetic CSV")->required();
    stats->add_option("--output-dir", stats_opts.output_dir, "output directory");
    stats->add_option("--quantiles", stats_opts.quantiles, "QQ levels")->check(CLI::PositiveNumber);
    stats->add_option("--date-column", stats_opts.date_column, "label column name (default: first column)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "crbm: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(train_opts, out);
        if (gen->parsed()) return cmd_generate(gen_opts, out);
        if (energy->parsed()) return cmd_energy(energy_opts, out);
        return cmd_stats(stats_opts, out);
    } catch (const std::exception& e) {
        err << "crbm: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace crbm
