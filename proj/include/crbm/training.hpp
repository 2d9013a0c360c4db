#pragma once

#include "crbm/data.hpp"
#include "crbm/dynamics.hpp"
#include "crbm/random.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace crbm {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    int epochs = 200;
    int batch_size = 64;
    /// Unset means the architecture default: 1e-3 Gaussian, 1e-2 Bernoulli.
    std::optional<double> learning_rate;
    double momentum = 0.5;
    double weight_decay = 1e-4;
    int n_chains = 64;
    int gibbs_k = 1;
    std::optional<double> sparsity_target;
    double sparsity_cost = 0.0;
    std::optional<std::uint64_t> seed;
    int lag = 5;
    int hidden_units = 16;

    double resolved_learning_rate(Arch arch) const {
        return learning_rate.value_or(arch == Arch::gaussian ? 1e-3 : 1e-2);
    }

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Applies one `key=value` setting. Unknown keys and malformed values throw.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
/// Parses a key=value config file; '#' starts a comment.
TrainConfig load_train_config(const std::filesystem::path& path);
TrainConfig parse_train_config(const std::string& text);
/// Canonical key=value rendering, in field order.
std::string format_train_config(const TrainConfig& cfg);

/// Parameter-shaped bundle used for both gradients and momentum velocity.
struct Gradients {
    Eigen::MatrixXd W;
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    /// Mean data-phase hidden activation, consumed by the sparsity penalty.
    Eigen::VectorXd hidden_mean;

    static Gradients zeros_like(const ModelParamsd& m);
    bool all_finite() const;
};

/// Persistent fantasy particles. Each chain owns its visible state, its
/// current context window and a private random stream.
struct PersistentChains {
    Eigen::MatrixXd states;    // n_chains x D'
    Eigen::MatrixXd contexts;  // n_chains x (lag*D')
    std::vector<Rng> rngs;

    Index size() const { return states.rows(); }

    /// Starts every chain at a randomly drawn training pair.
    static PersistentChains from_data(const WindowedSeriesd& data, int n_chains, Rng& rng, const Rng& streams);
};

ModelParamsd init_params(Index visible, Index hidden, Index lag, Arch arch, std::uint64_t seed);

/// Data-minus-model statistics for one mini-batch. Chains are reassigned
/// contexts from the batch, advanced cfg.gibbs_k steps and left in place for
/// the next call.
Gradients pcd_gradients(const WindowedSeriesd& batch, PersistentChains& chains, const ModelParamsd& m,
                        const TrainConfig& cfg, Rng& rng);

/// Momentum SGD step with L2 decay on W and optional hidden sparsity penalty.
void apply_update(ModelParamsd& m, const Gradients& grads, Gradients& velocity, const TrainConfig& cfg);

struct TrainReport {
    std::vector<double> reconstruction_mse;
    std::vector<double> free_energy_train;
    std::vector<double> free_energy_heldout;  // empty without held-out data
    ModelParamsd params;
};

/// Mean squared error of one mean-field h-then-v pass over every pair.
double reconstruction_mse(const WindowedSeriesd& data, const ModelParamsd& m);
double mean_free_energy(const WindowedSeriesd& data, const ModelParamsd& m);

TrainReport train_windows(const WindowedSeriesd& train, const WindowedSeriesd* heldout, Arch arch,
                          const TrainConfig& cfg);

/// Trains on an encoded split. Held-out windows take their first history
/// from the tail of the training split.
TrainReport train(const EncodedSeries& encoded, const TrainConfig& cfg, const EncodedSeries* heldout = nullptr);

}  // namespace crbm
