#include "crbm/training.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace crbm {

namespace {

// Stream ids derived from the run seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kScheduleStream = 1;
constexpr std::uint64_t kChainStream = 2;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last)
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + text + "'");
    return value;
}

Eigen::MatrixXd sigmoid_matrix(const Eigen::MatrixXd& x) {
    return x.unaryExpr([](double z) { return sigmoid(z); });
}

// Sufficient statistics of -dF/dtheta averaged over rows of (contexts, visibles).
Gradients phase_statistics(const Eigen::MatrixXd& contexts, const Eigen::MatrixXd& visibles, const ModelParamsd& m) {
    const double n = double(visibles.rows());
    Eigen::MatrixXd abias = contexts * m.A;
    abias.rowwise() += m.a.transpose();
    Eigen::MatrixXd bbias = contexts * m.B;
    bbias.rowwise() += m.b.transpose();

    Eigen::MatrixXd scaled = visibles;
    Eigen::MatrixXd visible_stat = visibles;
    if (m.arch == Arch::gaussian) {
        const Eigen::RowVectorXd inv_sigma = m.sigma.cwiseInverse().transpose();
        scaled = visibles.array().rowwise() * inv_sigma.array();
        visible_stat = (visibles - abias).array().rowwise() * inv_sigma.array().square();
    }
    const Eigen::MatrixXd p = sigmoid_matrix(bbias + scaled * m.W);

    Gradients s;
    s.W = scaled.transpose() * p / n;
    s.a = visible_stat.colwise().mean().transpose();
    s.b = p.colwise().mean().transpose();
    s.A = contexts.transpose() * visible_stat / n;
    s.B = contexts.transpose() * p / n;
    s.hidden_mean = s.b;
    return s;
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (learning_rate && !(*learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
    if (n_chains < 1) throw std::invalid_argument("n_chains must be >= 1");
    if (gibbs_k < 1) throw std::invalid_argument("gibbs_k must be >= 1");
    if (sparsity_target && !(*sparsity_target > 0.0 && *sparsity_target < 1.0))
        throw std::invalid_argument("sparsity_target must be in (0, 1)");
    if (!(sparsity_cost >= 0.0)) throw std::invalid_argument("sparsity_cost must be >= 0");
    if (lag < 0) throw std::invalid_argument("lag must be >= 0");
    if (hidden_units < 1) throw std::invalid_argument("hidden_units must be >= 1");
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "epochs") cfg.epochs = parse_number<int>(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_number<int>(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_number<double>(key, value);
    else if (key == "momentum") cfg.momentum = parse_number<double>(key, value);
    else if (key == "weight_decay") cfg.weight_decay = parse_number<double>(key, value);
    else if (key == "n_chains") cfg.n_chains = parse_number<int>(key, value);
    else if (key == "gibbs_k") cfg.gibbs_k = parse_number<int>(key, value);
    else if (key == "sparsity_target") cfg.sparsity_target = parse_number<double>(key, value);
    else if (key == "sparsity_cost") cfg.sparsity_cost = parse_number<double>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "lag") cfg.lag = parse_number<int>(key, value);
    else if (key == "hidden_units") cfg.hidden_units = parse_number<int>(key, value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

TrainConfig parse_train_config(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_train_config(buf.str());
}

std::string format_train_config(const TrainConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "epochs=" << cfg.epochs << '\n' << "batch_size=" << cfg.batch_size << '\n';
    if (cfg.learning_rate) out << "learning_rate=" << *cfg.learning_rate << '\n';
    out << "momentum=" << cfg.momentum << '\n'
        << "weight_decay=" << cfg.weight_decay << '\n'
        << "n_chains=" << cfg.n_chains << '\n'
        << "gibbs_k=" << cfg.gibbs_k << '\n';
    if (cfg.sparsity_target) out << "sparsity_target=" << *cfg.sparsity_target << '\n';
    out << "sparsity_cost=" << cfg.sparsity_cost << '\n';
    if (cfg.seed) out << "seed=" << *cfg.seed << '\n';
    out << "lag=" << cfg.lag << '\n' << "hidden_units=" << cfg.hidden_units << '\n';
    return out.str();
}

Gradients Gradients::zeros_like(const ModelParamsd& m) {
    Gradients g;
    g.W = Eigen::MatrixXd::Zero(m.W.rows(), m.W.cols());
    g.a = Eigen::VectorXd::Zero(m.a.size());
    g.b = Eigen::VectorXd::Zero(m.b.size());
    g.A = Eigen::MatrixXd::Zero(m.A.rows(), m.A.cols());
    g.B = Eigen::MatrixXd::Zero(m.B.rows(), m.B.cols());
    g.hidden_mean = Eigen::VectorXd::Zero(m.b.size());
    return g;
}

bool Gradients::all_finite() const {
    return W.allFinite() && a.allFinite() && b.allFinite() && A.allFinite() && B.allFinite();
}

PersistentChains PersistentChains::from_data(const WindowedSeriesd& data, int n_chains, Rng& rng, const Rng& streams) {
    if (data.size() == 0) throw std::invalid_argument("cannot start chains from an empty series");
    PersistentChains c;
    c.states.resize(n_chains, data.targets.cols());
    c.contexts.resize(n_chains, data.contexts.cols());
    for (int j = 0; j < n_chains; ++j) {
        const auto row = Index(rng.index(std::uint64_t(data.size())));
        c.states.row(j) = data.targets.row(row);
        c.contexts.row(j) = data.contexts.row(row);
        c.rngs.push_back(streams.split(std::uint64_t(j)));
    }
    return c;
}

ModelParamsd init_params(Index visible, Index hidden, Index lag, Arch arch, std::uint64_t seed) {
    if (visible < 1 || hidden < 1 || lag < 0) throw std::invalid_argument("init_params: non-positive dimensions");
    ModelParamsd m = ModelParamsd::zeros(arch, visible, hidden, lag);
    Rng rng = Rng(seed).split(kInitStream);
    for (Index j = 0; j < hidden; ++j)
        for (Index i = 0; i < visible; ++i) m.W(i, j) = 0.01 * rng.normal();
    return m;
}

Gradients pcd_gradients(const WindowedSeriesd& batch, PersistentChains& chains, const ModelParamsd& m,
                        const TrainConfig& cfg, Rng& rng) {
    if (batch.size() == 0) throw std::invalid_argument("pcd_gradients: empty batch");
    if (batch.targets.cols() != m.visible_size() || batch.contexts.cols() != m.history_size())
        throw std::invalid_argument("pcd_gradients: batch shape does not match model");
    if (chains.states.cols() != m.visible_size() || chains.contexts.cols() != m.history_size() ||
        chains.size() != cfg.n_chains || Index(chains.rngs.size()) != chains.size())
        throw std::invalid_argument("pcd_gradients: chain state does not match model or config");

    Gradients g = phase_statistics(batch.contexts, batch.targets, m);

    for (Index c = 0; c < chains.size(); ++c) {
        chains.contexts.row(c) = batch.contexts.row(Index(rng.index(std::uint64_t(batch.size()))));
        const Eigen::VectorXd window = chains.contexts.row(c).transpose();
        const Eigen::VectorXd abias = dynamic_visible_bias(window, m);
        const Eigen::VectorXd bbias = dynamic_hidden_bias(window, m);
        Eigen::VectorXd v = chains.states.row(c).transpose();
        for (int k = 0; k < cfg.gibbs_k; ++k) v = gibbs_step(v, m, abias, bbias, chains.rngs[std::size_t(c)]).v;
        chains.states.row(c) = v.transpose();
    }

    const Gradients neg = phase_statistics(chains.contexts, chains.states, m);
    g.W -= neg.W;
    g.a -= neg.a;
    g.b -= neg.b;
    g.A -= neg.A;
    g.B -= neg.B;
    if (!g.all_finite()) throw TrainingError("non-finite gradient encountered; lower the learning rate");
    return g;
}

void apply_update(ModelParamsd& m, const Gradients& grads, Gradients& velocity, const TrainConfig& cfg) {
    const double lr = cfg.resolved_learning_rate(m.arch);
    const double mom = cfg.momentum;

    Eigen::VectorXd gb = grads.b;
    if (cfg.sparsity_target && cfg.sparsity_cost > 0.0)
        gb.array() += cfg.sparsity_cost * (*cfg.sparsity_target - grads.hidden_mean.array());

    velocity.W = mom * velocity.W + lr * (grads.W - cfg.weight_decay * m.W);
    velocity.a = mom * velocity.a + lr * grads.a;
    velocity.b = mom * velocity.b + lr * gb;
    velocity.A = mom * velocity.A + lr * grads.A;
    velocity.B = mom * velocity.B + lr * grads.B;

    m.W += velocity.W;
    m.a += velocity.a;
    m.b += velocity.b;
    m.A += velocity.A;
    m.B += velocity.B;
    if (!m.W.allFinite() || !m.a.allFinite() || !m.b.allFinite() || !m.A.allFinite() || !m.B.allFinite())
        throw TrainingError("parameter update produced non-finite values");
}

double reconstruction_mse(const WindowedSeriesd& data, const ModelParamsd& m) {
    Eigen::MatrixXd abias = data.contexts * m.A;
    abias.rowwise() += m.a.transpose();
    Eigen::MatrixXd bbias = data.contexts * m.B;
    bbias.rowwise() += m.b.transpose();
    Eigen::MatrixXd scaled = data.targets;
    if (m.arch == Arch::gaussian) scaled = data.targets.array().rowwise() / m.sigma.transpose().array();
    const Eigen::MatrixXd p = sigmoid_matrix(bbias + scaled * m.W);
    Eigen::MatrixXd recon;
    if (m.arch == Arch::gaussian)
        recon = abias + ((p * m.W.transpose()).array().rowwise() * m.sigma.transpose().array()).matrix();
    else
        recon = sigmoid_matrix(abias + p * m.W.transpose());
    return (data.targets - recon).squaredNorm() / double(data.targets.size());
}

double mean_free_energy(const WindowedSeriesd& data, const ModelParamsd& m) {
    double sum = 0.0;
    for (Index t = 0; t < data.size(); ++t)
        sum += conditional_free_energy(data.targets.row(t).transpose(), data.contexts.row(t).transpose(), m);
    return sum / double(data.size());
}

TrainReport train_windows(const WindowedSeriesd& train_data, const WindowedSeriesd* heldout, Arch arch,
                          const TrainConfig& cfg) {
    cfg.validate();
    if (!cfg.seed) throw std::invalid_argument("training requires an explicit seed");
    if (train_data.size() == 0) throw std::invalid_argument("training series has no target rows");
    const Index visible = train_data.targets.cols();
    if (train_data.contexts.cols() != Index(cfg.lag) * visible)
        throw std::invalid_argument("training windows do not match the configured lag");

    const Rng root(*cfg.seed);
    TrainReport report;
    report.params = init_params(visible, cfg.hidden_units, cfg.lag, arch, *cfg.seed);
    ModelParamsd& m = report.params;
    Gradients velocity = Gradients::zeros_like(m);
    Rng rng = root.split(kScheduleStream);
    PersistentChains chains = PersistentChains::from_data(train_data, cfg.n_chains, rng, root.split(kChainStream));

    const Index n = train_data.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    WindowedSeriesd batch;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
        for (Index start = 0; start < n; start += cfg.batch_size) {
            const Index count = std::min<Index>(cfg.batch_size, n - start);
            batch.contexts.resize(count, train_data.contexts.cols());
            batch.targets.resize(count, visible);
            for (Index r = 0; r < count; ++r) {
                batch.contexts.row(r) = train_data.contexts.row(order[std::size_t(start + r)]);
                batch.targets.row(r) = train_data.targets.row(order[std::size_t(start + r)]);
            }
            const Gradients g = pcd_gradients(batch, chains, m, cfg, rng);
            apply_update(m, g, velocity, cfg);
        }

        const double mse = reconstruction_mse(train_data, m);
        const double fe = mean_free_energy(train_data, m);
        if (!std::isfinite(mse) || !std::isfinite(fe))
            throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1));
        report.reconstruction_mse.push_back(mse);
        report.free_energy_train.push_back(fe);
        if (heldout != nullptr && heldout->size() > 0) report.free_energy_heldout.push_back(mean_free_energy(*heldout, m));
    }
    return report;
}

TrainReport train(const EncodedSeries& encoded, const TrainConfig& cfg, const EncodedSeries* heldout) {
    cfg.validate();
    const WindowedSeriesd windows = build_windows(encoded.matrix, Index(cfg.lag));
    if (heldout == nullptr) return train_windows(windows, nullptr, arch_for(encoded.mode), cfg);
    if (heldout->mode != encoded.mode || heldout->matrix.cols() != encoded.matrix.cols())
        throw std::invalid_argument("held-out series encoding does not match the training series");
    const WindowedSeriesd held = build_windows(encoded.matrix, heldout->matrix, Index(cfg.lag));
    return train_windows(windows, &held, arch_for(encoded.mode), cfg);
}

}  // namespace crbm
