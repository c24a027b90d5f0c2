#pragma once

#include <string>

#include "simmst/model.hpp"

namespace simmst {

// Canonical JSON form of a model config: fixed key order, every field
// present. Used inside checkpoints and for the resolved-config echo.
std::string config_to_json_text(const SimMstConfig& cfg);
SimMstConfig config_from_json_text(const std::string& text);

// Binary checkpoint: magic "SIMMSTCK", u32 format version, the canonical
// config JSON (u32 length + bytes), then u64 parameter count followed by each
// parameter as u32 name length + name, u32 rank, u64 dims, f64 values.
// Everything little-endian. Loading reconstructs the model from the embedded
// config and requires names and shapes to match the registry exactly, so a
// save/load cycle is bitwise exact.
void save_checkpoint(const SimMstModel& model, const std::string& path);
SimMstModel load_checkpoint(const std::string& path);

}  // namespace simmst
