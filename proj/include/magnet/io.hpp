#pragma once

#include <nlohmann/json_fwd.hpp>
#include <stdexcept>
#include <string>

#include "magnet/estimator.hpp"
#include "magnet/interpreter.hpp"
#include "magnet/synth.hpp"

namespace magnet {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : IoError {
    using IoError::IoError;
};
struct VersionMismatch : IoError {
    using IoError::IoError;
};

inline constexpr int kSchemaVersion = 1;

// All artifacts are single JSON documents carrying schema_version and the
// run_config that produced them. Doubles round-trip exactly.
void save_dataset(const GraphDataset& dataset, const std::string& path,
                  const nlohmann::json* run_config = nullptr);
GraphDataset load_dataset(const std::string& path);

void save_model(const MaGNetModel& model, const std::string& path,
                const nlohmann::json* run_config = nullptr);
MaGNetModel load_model(const std::string& path);

void save_explanation(const Explanation& explanation, const std::string& path,
                      const nlohmann::json* run_config = nullptr);
Explanation load_explanation(const std::string& path);

}  // namespace magnet
