#pragma once

#include "crbm/data.hpp"
#include "crbm/training.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace crbm {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Everything needed to score or sample without the training data: the
/// parameters, the codec that maps raw values to visible units, the asset
/// schema, the training tail used as the default generation seed, and the
/// configuration that produced it. See docs/model_format.md for the layout.
struct ModelFile {
    ModelParamsd params;
    EncodingMode mode = EncodingMode::continuous;
    Codec codec;
    std::string date_column = "date";
    std::vector<std::string> asset_names;
    Eigen::VectorXd seed_window;  // lag * D', oldest first
    TrainConfig config;

    Index assets() const { return Index(asset_names.size()); }
};

std::string serialize_model(const ModelFile& model);
/// Throws DataError on a bad magic, an unsupported version or a truncated body.
ModelFile deserialize_model(const std::string& bytes);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace crbm
