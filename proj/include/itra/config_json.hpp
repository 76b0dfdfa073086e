#pragma once

#include "itra/harness.hpp"

#include <nlohmann/json.hpp>

namespace itra::config {

// Every from_json call accepts a partial object; absent keys keep the struct
// defaults. Unknown keys are rejected so typos fail loudly.

nlohmann::json to_json(const descriptors::PhogConfig& c);
nlohmann::json to_json(const descriptors::Hog3dConfig& c);
nlohmann::json to_json(const decomposition::SelectionConfig& c);
nlohmann::json to_json(const solvers::AdmmConfig& c);
nlohmann::json to_json(const decomposition::DecomposeConfig& c);
nlohmann::json to_json(const features::BankConfig& c);
nlohmann::json to_json(const features::ItraConfig& c);
nlohmann::json to_json(const harness::SynthConfig& c);
nlohmann::json to_json(const harness::ExperimentConfig& c);

descriptors::PhogConfig phog_from_json(const nlohmann::json& j);
descriptors::Hog3dConfig hog3d_from_json(const nlohmann::json& j);
decomposition::SelectionConfig selection_from_json(const nlohmann::json& j);
solvers::AdmmConfig admm_from_json(const nlohmann::json& j);
decomposition::DecomposeConfig decompose_from_json(const nlohmann::json& j);
features::BankConfig bank_from_json(const nlohmann::json& j);
features::ItraConfig itra_from_json(const nlohmann::json& j);
harness::SynthConfig synth_from_json(const nlohmann::json& j);
harness::ExperimentConfig experiment_from_json(const nlohmann::json& j);

// FNV-1a of the canonical (key-sorted) dump.
std::uint64_t hash(const nlohmann::json& j);

}  // namespace itra::config
