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

#include "treedet/trainlog.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "text_util.hpp"
#include "treedet/error.hpp"

namespace treedet {

namespace {

std::string join(const std::vector<double>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ",";
    out += detail::format_double(vs[i]);
  }
  return out;
}

double need_double(std::string_view key, std::string_view v) {
  auto d = detail::parse_double(detail::trim(v));
  if (!d) throw Error(Errc::parse_error, "config key '" + std::string(key) + "' expects a number");
  return *d;
}

int need_int(std::string_view key, std::string_view v) {
  auto i = detail::parse_int(detail::trim(v));
  if (!i || *i < std::numeric_limits<int>::min() || *i > std::numeric_limits<int>::max()) {
    throw Error(Errc::parse_error, "config key '" + std::string(key) + "' expects an integer");
  }
  return static_cast<int>(*i);
}

std::vector<double> need_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (std::string_view part : detail::split(detail::trim(v), ',')) out.push_back(need_double(key, part));
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_argument, "invalid config: " + what);
}

bool unit_open(double v) { return v > 0.0 && v <= 1.0; }

}  // namespace

void ModelConfig::validate() const {
  require(!backbone.empty(), "backbone is empty");
  require(batch_size > 0, "batch_size must be > 0");
  require(detection_max_instances > 0, "detection_max_instances must be > 0");
  require(steps_per_epoch > 0, "steps_per_epoch must be > 0");
  require(train_rois_per_image > 0, "train_rois_per_image must be > 0");
  require(validation_steps > 0, "validation_steps must be > 0");
  require(epochs > 0, "epochs must be > 0");
  require(backbone_stride > 0, "backbone_stride must be > 0");
  require(backbone_channels > 0, "backbone_channels must be > 0");
  require(detection_min_confidence >= 0.0 && detection_min_confidence <= 1.0,
          "detection_min_confidence must be in [0, 1]");
  require(detection_nms_threshold >= 0.0 && detection_nms_threshold <= 1.0,
          "detection_nms_threshold must be in [0, 1]");
  require(unit_open(learning_momentum), "learning_momentum must be in (0, 1]");
  require(unit_open(learning_rate), "learning_rate must be in (0, 1]");
  require(unit_open(weight_decay), "weight_decay must be in (0, 1]");
  try {
    anchor.validate();
  } catch (const Error& e) {
    require(false, e.what());
  }
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  return std::tie(a.backbone, a.batch_size, a.detection_min_confidence, a.detection_max_instances,
                  a.learning_momentum, a.learning_rate, a.steps_per_epoch, a.train_rois_per_image,
                  a.validation_steps, a.weight_decay, a.epochs, a.anchor.scales, a.anchor.ratios,
                  a.anchor.stride, a.backbone_stride, a.backbone_channels,
                  a.detection_nms_threshold) ==
         std::tie(b.backbone, b.batch_size, b.detection_min_confidence, b.detection_max_instances,
                  b.learning_momentum, b.learning_rate, b.steps_per_epoch, b.train_rois_per_image,
                  b.validation_steps, b.weight_decay, b.epochs, b.anchor.scales, b.anchor.ratios,
                  b.anchor.stride, b.backbone_stride, b.backbone_channels,
                  b.detection_nms_threshold);
}

ModelConfig default_config() {
  ModelConfig c;
  c.backbone = "resnet101";
  c.batch_size = 1;
  c.detection_min_confidence = 0.9;
  c.detection_max_instances = 100;
  c.learning_momentum = 0.9;
  c.learning_rate = 0.001;
  c.steps_per_epoch = 100;
  c.train_rois_per_image = 110;
  c.validation_steps = 50;
  c.weight_decay = 0.0001;
  c.epochs = 50;
  c.anchor = AnchorSpec::defaults();
  c.backbone_stride = 32;
  c.backbone_channels = 2048;
  c.detection_nms_threshold = 0.3;
  return c;
}

std::string to_config_text(const ModelConfig& c) {
  std::ostringstream out;
  out << "backbone = " << c.backbone << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "detection_min_confidence = " << detail::format_double(c.detection_min_confidence) << "\n"
      << "detection_max_instances = " << c.detection_max_instances << "\n"
      << "learning_momentum = " << detail::format_double(c.learning_momentum) << "\n"
      << "learning_rate = " << detail::format_double(c.learning_rate) << "\n"
      << "steps_per_epoch = " << c.steps_per_epoch << "\n"
      << "train_rois_per_image = " << c.train_rois_per_image << "\n"
      << "validation_steps = " << c.validation_steps << "\n"
      << "weight_decay = " << detail::format_double(c.weight_decay) << "\n"
      << "epochs = " << c.epochs << "\n"
      << "rpn_anchor_scales = " << join(c.anchor.scales) << "\n"
      << "rpn_anchor_ratios = " << join(c.anchor.ratios) << "\n"
      << "rpn_anchor_stride = " << c.anchor.stride << "\n"
      << "backbone_stride = " << c.backbone_stride << "\n"
      << "backbone_channels = " << c.backbone_channels << "\n"
      << "detection_nms_threshold = " << detail::format_double(c.detection_nms_threshold) << "\n";
  return out.str();
}

ModelConfig parse_config_text(std::string_view text) {
  ModelConfig c = default_config();
  using Setter = std::function<void(std::string_view key, std::string_view value)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"backbone", [&](auto, auto v) { c.backbone = std::string(detail::trim(v)); }},
      {"batch_size", [&](auto k, auto v) { c.batch_size = need_int(k, v); }},
      {"detection_min_confidence", [&](auto k, auto v) { c.detection_min_confidence = need_double(k, v); }},
      {"detection_max_instances", [&](auto k, auto v) { c.detection_max_instances = need_int(k, v); }},
      {"learning_momentum", [&](auto k, auto v) { c.learning_momentum = need_double(k, v); }},
      {"learning_rate", [&](auto k, auto v) { c.learning_rate = need_double(k, v); }},
      {"steps_per_epoch", [&](auto k, auto v) { c.steps_per_epoch = need_int(k, v); }},
      {"train_rois_per_image", [&](auto k, auto v) { c.train_rois_per_image = need_int(k, v); }},
      {"validation_steps", [&](auto k, auto v) { c.validation_steps = need_int(k, v); }},
      {"weight_decay", [&](auto k, auto v) { c.weight_decay = need_double(k, v); }},
      {"epochs", [&](auto k, auto v) { c.epochs = need_int(k, v); }},
      {"rpn_anchor_scales", [&](auto k, auto v) { c.anchor.scales = need_list(k, v); }},
      {"rpn_anchor_ratios", [&](auto k, auto v) { c.anchor.ratios = need_list(k, v); }},
      {"rpn_anchor_stride", [&](auto k, auto v) { c.anchor.stride = need_int(k, v); }},
      {"backbone_stride", [&](auto k, auto v) { c.backbone_stride = need_int(k, v); }},
      {"backbone_channels", [&](auto k, auto v) { c.backbone_channels = need_int(k, v); }},
      {"detection_nms_threshold", [&](auto k, auto v) { c.detection_nms_threshold = need_double(k, v); }},
  };
  std::size_t line_no = 0;
  for (std::string_view raw : detail::split_lines(text)) {
    ++line_no;
    std::string_view line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::parse_error, "config line " + std::to_string(line_no) + " has no '='");
    }
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(Errc::parse_error,
                  "config line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    try {
      it->second(key, value);
    } catch (const Error& e) {
      throw Error(e.code(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

ModelConfig read_config_file(const std::string& path) {
  return parse_config_text(detail::read_text_file(path));
}

LossSeries parse_loss_log(std::string_view text, std::string label) {
  LossSeries s;
  s.label = std::move(label);
  std::vector<std::string_view> lines = detail::split_lines(text);
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(Errc::parse_error, "loss log is missing its header");
  const std::string_view header = detail::trim(lines.front());
  bool has_map = false;
  if (header == "epoch,train_loss,val_loss,map") {
    has_map = true;
  } else if (header != "epoch,train_loss,val_loss") {
    throw Error(Errc::parse_error, "loss log header must be 'epoch,train_loss,val_loss[,map]'");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = "loss log line " + std::to_string(i + 1);
    const auto cols = detail::split(detail::trim(lines[i]), ',');
    if (cols.size() != (has_map ? 4u : 3u)) throw Error(Errc::parse_error, where + ": wrong column count");
    LossPoint p;
    auto epoch = detail::parse_int(detail::trim(cols[0]));
    auto tl = detail::parse_double(detail::trim(cols[1]));
    auto vl = detail::parse_double(detail::trim(cols[2]));
    if (!epoch || !tl || !vl) throw Error(Errc::parse_error, where + ": malformed row");
    if (*tl < 0 || *vl < 0) throw Error(Errc::parse_error, where + ": negative loss");
    p.epoch = static_cast<int>(*epoch);
    p.train_loss = *tl;
    p.val_loss = *vl;
    if (has_map && !detail::trim(cols[3]).empty()) {
      auto m = detail::parse_double(detail::trim(cols[3]));
      if (!m || *m < 0 || *m > 1) throw Error(Errc::parse_error, where + ": map must be in [0, 1]");
      p.map = *m;
    }
    if (!s.points.empty() && p.epoch <= s.points.back().epoch) {
      throw Error(Errc::parse_error, where + ": epoch " + std::to_string(p.epoch) +
                                         " does not increase");
    }
    s.points.push_back(p);
  }
  return s;
}

std::string to_loss_log(const LossSeries& s) {
  const bool has_map = std::any_of(s.points.begin(), s.points.end(),
                                   [](const LossPoint& p) { return p.map.has_value(); });
  std::string out = has_map ? "epoch,train_loss,val_loss,map\n" : "epoch,train_loss,val_loss\n";
  for (const LossPoint& p : s.points) {
    out += std::to_string(p.epoch) + "," + detail::format_double(p.train_loss) + "," +
           detail::format_double(p.val_loss);
    if (has_map) out += "," + (p.map ? detail::format_double(*p.map) : std::string());
    out += "\n";
  }
  return out;
}

BestEpoch select_best_epoch(const LossSeries& s, EpochCriterion criterion) {
  if (s.points.empty()) throw Error(Errc::invalid_argument, "cannot select an epoch from an empty series");
  std::optional<BestEpoch> best;
  for (const LossPoint& p : s.points) {
    if (criterion == EpochCriterion::min_val_loss) {
      if (!best || p.val_loss < best->value) best = BestEpoch{p.epoch, p.val_loss};
    } else {
      if (!p.map) continue;
      if (!best || *p.map > best->value) best = BestEpoch{p.epoch, *p.map};
    }
  }
  if (!best) throw Error(Errc::invalid_argument, "series '" + s.label + "' has no map column");
  return *best;
}

BatchComparison compare_batch_sizes(const std::vector<LossSeries>& series) {
  if (series.empty()) throw Error(Errc::invalid_argument, "no loss series to compare");
  if (series.size() < 2) throw Error(Errc::invalid_argument, "comparison needs at least two series");
  BatchComparison cmp;
  for (const LossSeries& s : series) {
    if (s.points.empty()) throw Error(Errc::invalid_argument, "series '" + s.label + "' is empty");
    SeriesSummary row;
    row.label = s.label;
    row.final_train = s.points.back().train_loss;
    row.final_val = s.points.back().val_loss;
    row.min_train = s.points.front().train_loss;
    for (const LossPoint& p : s.points) row.min_train = std::min(row.min_train, p.train_loss);
    const BestEpoch b = select_best_epoch(s, EpochCriterion::min_val_loss);
    row.min_val = b.value;
    row.min_val_epoch = b.epoch;
    cmp.rows.push_back(std::move(row));
  }
  std::sort(cmp.rows.begin(), cmp.rows.end(), [](const SeriesSummary& a, const SeriesSummary& b) {
    return std::tie(a.min_val, a.label, a.final_val, a.final_train, a.min_train) <
           std::tie(b.min_val, b.label, b.final_val, b.final_train, b.min_train);
  });
  for (SeriesSummary& row : cmp.rows) {
    row.rank = 1 + static_cast<int>(std::count_if(cmp.rows.begin(), cmp.rows.end(),
                                                  [&](const SeriesSummary& o) { return o.min_val < row.min_val; }));
  }
  return cmp;
}

std::string BatchComparison::to_text() const {
  std::string out = "rank  series        final_train  final_val  min_train  min_val  min_val_epoch\n";
  char buf[160];
  for (const SeriesSummary& r : rows) {
    std::snprintf(buf, sizeof buf, "%-5d %-13s %11.4f %10.4f %10.4f %8.4f %14d\n", r.rank,
                  r.label.c_str(), r.final_train, r.final_val, r.min_train, r.min_val, r.min_val_epoch);
    out += buf;
  }
  return out;
}

}  // namespace treedet
