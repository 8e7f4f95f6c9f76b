// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include "ddn/model.hpp"

namespace ddn {

/// JSONL dataset: optional header line {"schema":"ddn-dataset-v1"}, then one
/// {"features":[...],"labels":[0,1,...]} object per line (labels optional).
/// The loader streams line by line, validates uniform dimensions and 0/1
/// labels, and reports errors with line numbers.
Dataset load_dataset(std::istream& is, const std::string& origin = "<stream>");
Dataset load_dataset(const std::string& path);

/// Writes the schema header then one line per instance, floats with 17
/// significant digits so a round trip is bit-exact.
void save_dataset(const Dataset& data, std::ostream& os);
void save_dataset(const Dataset& data, const std::string& path);

/// Model JSON: {"format_version":1,"n_labels","n_features","w","v","b"}
/// with w and v flattened row-major. The loader validates all model
/// invariants.
DdnModel load_model(std::istream& is, const std::string& origin = "<stream>");
DdnModel load_model(const std::string& path);
void save_model(const DdnModel& model, std::ostream& os);
void save_model(const DdnModel& model, const std::string& path);

struct GenSynthResult {
  Dataset data;
  DdnModel model;  // the generating parameters
};

/// Synthetic correlated-label data: a random model with symmetric label
/// interactions scaled by coupling_strength, standard-normal features, and
/// labels drawn exactly from the Gibbs stationary distribution (closed-form
/// enumeration, n <= 12) or by a long Gibbs run (n <= 20). Deterministic
/// given the seed; instance t uses RNG substream t+1.
GenSynthResult gen_synth(int n_labels, int n_features, int n_instances,
                         double coupling_strength, std::uint64_t seed);

}  // namespace ddn
