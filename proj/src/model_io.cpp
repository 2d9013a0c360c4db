#include "crbm/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace crbm {

namespace {

constexpr char kMagic[8] = {'C', 'R', 'B', 'M', 'M', 'O', 'D', 'L'};

class Writer {
public:
    void raw(const char* p, std::size_t n) { out_.append(p, n); }

    template <typename UInt>
    void uint(UInt x) {
        for (std::size_t k = 0; k < sizeof(UInt); ++k) out_.push_back(static_cast<char>((x >> (8 * k)) & 0xFF));
    }
    void i32(std::int32_t x) { uint(static_cast<std::uint32_t>(x)); }
    void f64(double x) { uint(std::bit_cast<std::uint64_t>(x)); }
    void str(const std::string& s) {
        uint(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    // row-major
    void matrix(const Eigen::MatrixXd& m) {
        for (Index r = 0; r < m.rows(); ++r)
            for (Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
    void vector(const Eigen::VectorXd& v) {
        for (Index i = 0; i < v.size(); ++i) f64(v(i));
    }

    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    const char* raw(std::size_t n) {
        if (n > bytes_.size() - pos_) throw DataError("model file is truncated");
        const char* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    template <typename UInt>
    UInt uint() {
        const auto* p = reinterpret_cast<const unsigned char*>(raw(sizeof(UInt)));
        UInt x = 0;
        for (std::size_t k = 0; k < sizeof(UInt); ++k) x |= static_cast<UInt>(p[k]) << (8 * k);
        return x;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(uint<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
    std::string str() {
        const auto n = uint<std::uint32_t>();
        const char* p = raw(n);
        return std::string(p, n);
    }
    Eigen::MatrixXd matrix(Index rows, Index cols) {
        if (std::size_t(rows) * std::size_t(cols) > (bytes_.size() - pos_) / 8) throw DataError("model file is truncated");
        Eigen::MatrixXd m(rows, cols);
        for (Index r = 0; r < rows; ++r)
            for (Index c = 0; c < cols; ++c) m(r, c) = f64();
        return m;
    }
    Eigen::VectorXd vector(Index n) {
        if (std::size_t(n) > (bytes_.size() - pos_) / 8) throw DataError("model file is truncated");
        Eigen::VectorXd v(n);
        for (Index i = 0; i < n; ++i) v(i) = f64();
        return v;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

// Guards allocations driven by header fields of a corrupt file.
constexpr std::uint64_t kMaxDimension = std::uint64_t{1} << 24;

}  // namespace

std::string serialize_model(const ModelFile& model) {
    const ModelParamsd& m = model.params;
    m.validate();
    const auto d = static_cast<std::uint64_t>(model.asset_names.size());
    std::uint32_t bits = 0;
    if (model.mode == EncodingMode::binary) {
        const auto* codec = std::get_if<BinaryCodec>(&model.codec);
        if (codec == nullptr) throw std::invalid_argument("binary model requires a binary codec");
        bits = static_cast<std::uint32_t>(codec->bits);
        if (codec->assets() != Index(d) || Index(d) * codec->bits != m.visible_size())
            throw std::invalid_argument("binary codec does not match model dimensions");
    } else {
        const auto* z = std::get_if<ZScoreParams>(&model.codec);
        if (z == nullptr) throw std::invalid_argument("continuous model requires z-score parameters");
        if (z->mu.size() != Index(d) || Index(d) != m.visible_size())
            throw std::invalid_argument("z-score parameters do not match model dimensions");
    }
    if (model.seed_window.size() != m.history_size())
        throw std::invalid_argument("seed window length does not match lag * visible");

    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.uint(kModelFormatVersion);
    w.uint(static_cast<std::uint32_t>(m.arch == Arch::bernoulli ? 0 : 1));
    w.uint(static_cast<std::uint32_t>(model.mode == EncodingMode::binary ? 0 : 1));
    w.uint(d);
    w.uint(static_cast<std::uint64_t>(m.visible_size()));
    w.uint(static_cast<std::uint64_t>(m.hidden_size()));
    w.uint(static_cast<std::uint64_t>(m.lag));
    w.uint(bits);

    w.str(model.date_column);
    for (const auto& name : model.asset_names) w.str(name);

    if (const auto* codec = std::get_if<BinaryCodec>(&model.codec)) {
        w.vector(codec->min);
        w.vector(codec->max);
    } else {
        const auto& z = std::get<ZScoreParams>(model.codec);
        w.vector(z.mu);
        w.vector(z.sigma);
    }

    w.matrix(m.W);
    w.vector(m.a);
    w.vector(m.b);
    w.vector(m.sigma);
    w.matrix(m.A);
    w.matrix(m.B);
    w.vector(model.seed_window);

    const TrainConfig& c = model.config;
    w.i32(c.epochs);
    w.i32(c.batch_size);
    w.uint(static_cast<std::uint8_t>(c.learning_rate ? 1 : 0));
    w.f64(c.learning_rate.value_or(0.0));
    w.f64(c.momentum);
    w.f64(c.weight_decay);
    w.i32(c.n_chains);
    w.i32(c.gibbs_k);
    w.uint(static_cast<std::uint8_t>(c.sparsity_target ? 1 : 0));
    w.f64(c.sparsity_target.value_or(0.0));
    w.f64(c.sparsity_cost);
    w.uint(static_cast<std::uint8_t>(c.seed ? 1 : 0));
    w.uint(c.seed.value_or(0));
    w.i32(c.lag);
    w.i32(c.hidden_units);
    return w.take();
}

ModelFile deserialize_model(const std::string& bytes) {
    Reader r(bytes);
    if (bytes.size() < sizeof kMagic || std::memcmp(r.raw(sizeof kMagic), kMagic, sizeof kMagic) != 0)
        throw DataError("not a CRBM model file (bad magic)");
    const auto version = r.uint<std::uint32_t>();
    if (version != kModelFormatVersion)
        throw DataError("model file format version " + std::to_string(version) + " is not supported (this build reads " +
                        std::to_string(kModelFormatVersion) + ")");

    const auto arch = r.uint<std::uint32_t>();
    const auto mode = r.uint<std::uint32_t>();
    const auto d = r.uint<std::uint64_t>();
    const auto dv = r.uint<std::uint64_t>();
    const auto h = r.uint<std::uint64_t>();
    const auto lag = r.uint<std::uint64_t>();
    const auto bits = r.uint<std::uint32_t>();
    if (arch > 1 || mode > 1) throw DataError("model file has an unknown architecture or encoding tag");
    if (d == 0 || dv == 0 || h == 0 || d > kMaxDimension || dv > kMaxDimension || h > kMaxDimension ||
        lag > kMaxDimension)
        throw DataError("model file has implausible dimensions");

    ModelFile mf;
    mf.mode = mode == 0 ? EncodingMode::binary : EncodingMode::continuous;
    mf.date_column = r.str();
    for (std::uint64_t j = 0; j < d; ++j) mf.asset_names.push_back(r.str());

    const Index nd = Index(d);
    if (mf.mode == EncodingMode::binary) {
        BinaryCodec codec;
        codec.bits = int(bits);
        codec.min = r.vector(nd);
        codec.max = r.vector(nd);
        if (bits < 1 || bits > std::uint32_t(kMaxCodecBits) || d * bits != dv)
            throw DataError("model file codec does not match visible dimension");
        mf.codec = std::move(codec);
    } else {
        ZScoreParams z;
        z.mu = r.vector(nd);
        z.sigma = r.vector(nd);
        if (dv != d) throw DataError("model file z-score parameters do not match visible dimension");
        mf.codec = std::move(z);
    }

    ModelParamsd& m = mf.params;
    m.arch = arch == 0 ? Arch::bernoulli : Arch::gaussian;
    m.lag = Index(lag);
    const Index nv = Index(dv);
    const Index nh = Index(h);
    const Index nk = Index(lag) * nv;
    m.W = r.matrix(nv, nh);
    m.a = r.vector(nv);
    m.b = r.vector(nh);
    m.sigma = r.vector(nv);
    m.A = r.matrix(nk, nv);
    m.B = r.matrix(nk, nh);
    mf.seed_window = r.vector(nk);

    TrainConfig& c = mf.config;
    c.epochs = r.i32();
    c.batch_size = r.i32();
    const bool has_lr = r.uint<std::uint8_t>() != 0;
    const double lr = r.f64();
    if (has_lr) c.learning_rate = lr;
    c.momentum = r.f64();
    c.weight_decay = r.f64();
    c.n_chains = r.i32();
    c.gibbs_k = r.i32();
    const bool has_target = r.uint<std::uint8_t>() != 0;
    const double target = r.f64();
    if (has_target) c.sparsity_target = target;
    c.sparsity_cost = r.f64();
    const bool has_seed = r.uint<std::uint8_t>() != 0;
    const auto seed = r.uint<std::uint64_t>();
    if (has_seed) c.seed = seed;
    c.lag = r.i32();
    c.hidden_units = r.i32();

    if (!r.done()) throw DataError("model file has trailing bytes");
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model file is inconsistent: ") + e.what());
    }
    return mf;
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
    const std::string bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write model file '" + path.string() + "'");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw DataError("failed writing model file '" + path.string() + "'");
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read model file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace crbm
