// Copyright 2026 The treedet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treedet/detpost.hpp"

namespace treedet {

struct ModelConfig {
  std::string backbone;
  int batch_size = 0;
  double detection_min_confidence = 0;
  int detection_max_instances = 0;
  double learning_momentum = 0;
  double learning_rate = 0;
  int steps_per_epoch = 0;
  int train_rois_per_image = 0;
  int validation_steps = 0;
  double weight_decay = 0;
  int epochs = 0;
  AnchorSpec anchor;
  int backbone_stride = 0;
  int backbone_channels = 0;
  /// Post-inference NMS IoU threshold.
  double detection_nms_threshold = 0;

  void validate() const;
  friend bool operator==(const ModelConfig& a, const ModelConfig& b);
};

ModelConfig default_config();

/// Flat `key = value` text; `#` starts a comment. Lists are comma separated.
std::string to_config_text(const ModelConfig& cfg);
/// Keys absent from the text keep their default_config() value; unknown
/// keys are an error.
ModelConfig parse_config_text(std::string_view text);
ModelConfig read_config_file(const std::string& path);

struct LossPoint {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  std::optional<double> map;
};

struct LossSeries {
  std::string label;
  std::vector<LossPoint> points;
};

/// CSV with header `epoch,train_loss,val_loss[,map]`.
LossSeries parse_loss_log(std::string_view text, std::string label = "");
std::string to_loss_log(const LossSeries& s);

enum class EpochCriterion { min_val_loss, max_map };

struct BestEpoch {
  int epoch = 0;
  double value = 0;
};

/// Earliest epoch wins ties.
BestEpoch select_best_epoch(const LossSeries& s, EpochCriterion criterion);

struct SeriesSummary {
  std::string label;
  double final_train = 0, final_val = 0;
  double min_train = 0, min_val = 0;
  int min_val_epoch = 0;
  /// 1-based; equal min_val shares a rank.
  int rank = 0;
};

struct BatchComparison {
  /// Ordered by ascending minimum validation loss, then label.
  std::vector<SeriesSummary> rows;

  std::string to_text() const;
};

BatchComparison compare_batch_sizes(const std::vector<LossSeries>& series);

}  // namespace treedet
