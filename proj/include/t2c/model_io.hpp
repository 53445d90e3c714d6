#pragma once

#include "t2c/dqn_scorer.hpp"

#include <iosfwd>
#include <memory>
#include <string>

namespace t2c {

inline constexpr std::string_view kModelMagic = "T2C-MODEL-v1";

/// Layout: magic, '\n', u64 little-endian header length, JSON header, float32 little-endian payload.
/// The header carries the config, feature norms, embedder spec and the tensor index.
void save_model(const Model& model, std::ostream& out);
void save_model_file(const Model& model, const std::string& path);

std::unique_ptr<Model> load_model(std::istream& in);
std::unique_ptr<Model> load_model_file(const std::string& path);

}  // namespace t2c
