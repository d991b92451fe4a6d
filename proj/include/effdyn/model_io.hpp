#pragma once

#include <string>

#include "effdyn/effective.hpp"

namespace effdyn {

// Versioned text serialization of an EffectiveModel. The header line is
// "effdyn-model v1"; nodes carry b components, the sigma_tilde upper
// triangle, Q and sample counts. Round-trips bit-exactly (floats are written
// with max precision); phi_mean is reconstructed as sigma^2.
void save_model(const EffectiveModel& model, const std::string& path);
EffectiveModel load_model(const std::string& path);

std::string model_to_string(const EffectiveModel& model);
EffectiveModel model_from_string(const std::string& text);

// Plot-friendly CSV of the same content (one row per node).
void export_model_csv(const EffectiveModel& model, const std::string& path);

}  // namespace effdyn
