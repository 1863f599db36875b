#pragma once

#include <cstdint>
#include <string>

#include "segtopic/pipeline.hpp"

namespace segtopic {

// Versioned text containers; every float is written with 17 significant
// digits, so serialize -> parse -> serialize is byte-stable.

std::string serialize_features(const FeaturePipeline& features);
FeaturePipeline parse_features(const std::string& text);
void save_features(const FeaturePipeline& features, const std::string& path);
// hash_out (if non-null) receives the FNV-1a hash of the file bytes.
FeaturePipeline load_features(const std::string& path, std::uint64_t* hash_out = nullptr);

std::string serialize_model(const TrainedModel& model);
void save_model(const TrainedModel& model, const std::string& path);
// Loads both files and fails (DataError) when the model's embedded feature
// hash does not match the feature file's bytes.
TrainedModel load_model(const std::string& model_path, const std::string& features_path);

}  // namespace segtopic
