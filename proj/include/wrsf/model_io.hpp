#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wrsf/dataset.hpp"
#include "wrsf/forest.hpp"
#include "wrsf/weights.hpp"

namespace wrsf::ensemble {

// A fitted model as persisted to disk: the forest, the feature metadata it
// was trained against, and (for weighted ensembles) the trained weights.
struct SavedModel {
  Forest forest;
  std::vector<std::string> feature_names;
  std::vector<data::FeatureKind> feature_kinds;
  std::optional<weights::WeightVector> weights;  // per tree or per group
  int weight_groups = 0;                         // 0 when no weights stored
};

// Versioned text format. Floating-point payloads are written as hex floats,
// so save -> load -> save reproduces the file byte for byte and a loaded
// model predicts identically to the one that was saved.
void save_model(std::ostream& out, const SavedModel& model);
void save_model(const std::string& path, const SavedModel& model);

SavedModel load_model(std::istream& in, const std::string& origin = "<stream>");
SavedModel load_model(const std::string& path);

}  // namespace wrsf::ensemble
