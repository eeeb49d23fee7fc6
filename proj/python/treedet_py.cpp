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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "treedet/detfile.hpp"
#include "treedet/detpost.hpp"
#include "treedet/error.hpp"
#include "treedet/evalkit.hpp"
#include "treedet/geocore.hpp"
#include "treedet/pipeline.hpp"
#include "treedet/tiler.hpp"
#include "treedet/trainlog.hpp"
#include "treedet/vector_io.hpp"

namespace py = pybind11;
using namespace treedet;

namespace {

Ring to_ring(const std::vector<std::pair<double, double>>& pts) {
  Ring r;
  r.reserve(pts.size());
  for (const auto& [x, y] : pts) r.push_back({x, y});
  return r;
}

std::vector<std::pair<double, double>> from_ring(const Ring& r) {
  std::vector<std::pair<double, double>> out;
  out.reserve(r.size());
  for (const Vec2& v : r) out.emplace_back(v.x, v.y);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tree-crown detection pipeline core";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<GeoTransform>(m, "GeoTransform")
      .def(py::init<double, double, double, double, double, double>(), py::arg("origin_x"), py::arg("pixel_w"),
           py::arg("rot_x"), py::arg("origin_y"), py::arg("rot_y"), py::arg("pixel_h"))
      .def_static("identity", &GeoTransform::identity)
      .def("determinant", &GeoTransform::determinant)
      .def("invertible", &GeoTransform::invertible)
      .def("pixel_to_geo",
           [](const GeoTransform& g, double col, double row) {
             const GeoPoint p = g.pixel_to_geo({col, row});
             return std::make_pair(p.x, p.y);
           })
      .def("geo_to_pixel", [](const GeoTransform& g, double x, double y) {
        const PixelPoint p = g.geo_to_pixel({x, y});
        return std::make_pair(p.col, p.row);
      });
  m.def("load_world_file", [](const std::string& text) { return load_world_file(text); });

  py::class_<Box>(m, "Box")
      .def(py::init([](double x1, double y1, double x2, double y2) { return Box{x1, y1, x2, y2}; }))
      .def_readwrite("x1", &Box::x1)
      .def_readwrite("y1", &Box::y1)
      .def_readwrite("x2", &Box::x2)
      .def_readwrite("y2", &Box::y2)
      .def("area", &Box::area)
      .def("__eq__", [](const Box& a, const Box& b) { return a == b; })
      .def("__repr__", [](const Box& b) {
        return "Box(" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " + std::to_string(b.x2) + ", " +
               std::to_string(b.y2) + ")";
      });

  py::class_<Detection>(m, "Detection")
      .def(py::init([](const Box& box, double score, std::string label,
                       std::optional<std::vector<std::pair<double, double>>> mask) {
             Detection d{box, score, std::move(label), std::nullopt};
             if (mask) d.mask = to_ring(*mask);
             return d;
           }),
           py::arg("box"), py::arg("score"), py::arg("label") = "coconut", py::arg("mask") = py::none())
      .def_readwrite("box", &Detection::box)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("label", &Detection::label)
      .def_property_readonly("mask", [](const Detection& d) -> std::optional<std::vector<std::pair<double, double>>> {
        if (!d.mask) return std::nullopt;
        return from_ring(*d.mask);
      });

  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init([](const Box& box, std::string label) { return GroundTruth{box, std::move(label), std::nullopt}; }),
           py::arg("box"), py::arg("label") = "coconut")
      .def_static("from_ring",
                  [](const std::vector<std::pair<double, double>>& ring, std::string label) {
                    return GroundTruth::from_ring(to_ring(ring), std::move(label));
                  },
                  py::arg("ring"), py::arg("label") = "coconut")
      .def_readwrite("box", &GroundTruth::box)
      .def_readwrite("label", &GroundTruth::label);

  py::class_<TileData>(m, "TileData")
      .def(py::init([](std::string id, std::vector<Detection> dets, std::vector<GroundTruth> gts) {
             return TileData{std::move(id), std::move(dets), std::move(gts)};
           }),
           py::arg("tile_id"), py::arg("dets"), py::arg("gts"))
      .def_readwrite("tile_id", &TileData::tile_id)
      .def_readwrite("dets", &TileData::dets)
      .def_readwrite("gts", &TileData::gts);

  m.def("box_iou", &box_iou);
  m.def("nms", &nms, py::arg("dets"), py::arg("iou_thresh"));
  m.def("filter_detections", &filter_detections, py::arg("dets"), py::arg("min_conf"), py::arg("max_instances"));
  m.def("feature_map_shape", [](int w, int h, int stride) {
    const FeatureMapShape s = feature_map_shape(w, h, stride);
    return std::make_pair(s.width, s.height);
  });
  m.def("polygon_iou", [](const std::vector<std::pair<double, double>>& a,
                          const std::vector<std::pair<double, double>>& b) {
    return polygon_iou(to_ring(a), to_ring(b));
  });

  m.def("f1_score", &f1_score);
  py::enum_<Interpolation>(m, "Interpolation")
      .value("continuous", Interpolation::continuous)
      .value("point101", Interpolation::point101);
  py::enum_<IouMode>(m, "IouMode").value("box", IouMode::box).value("mask", IouMode::mask);
  m.def(
      "average_precision",
      [](const std::vector<TileData>& tiles, double iou, Interpolation interp, IouMode mode) {
        const APResult r = average_precision(tiles, iou, interp, mode);
        std::vector<std::tuple<double, double, double>> curve;
        for (const PRPoint& p : r.curve.points) curve.emplace_back(p.recall, p.precision, p.threshold);
        return std::make_pair(r.ap, curve);
      },
      py::arg("tiles"), py::arg("iou") = 0.5, py::arg("interp") = Interpolation::continuous,
      py::arg("mode") = IouMode::box);
  m.def(
      "evaluate",
      [](const std::vector<TileData>& tiles, double iou) {
        const MatchResult mr = match_dataset(tiles, iou);
        const Metrics met = precision_recall_f1(mr);
        py::dict d;
        d["tp"] = mr.tp;
        d["fp"] = mr.fp;
        d["fn"] = mr.fn;
        d["precision"] = met.precision;
        d["recall"] = met.recall;
        d["f1"] = met.f1;
        d["ca"] = met.ca;
        d["ap"] = average_precision(tiles, iou).ap;
        d["map_coco"] = mean_average_precision(tiles, MapMode::coco);
        return d;
      },
      py::arg("tiles"), py::arg("iou") = 0.5);

  py::class_<TileIndex>(m, "TileIndex")
      .def_readonly("tile_id", &TileIndex::tile_id)
      .def_readonly("grid_row", &TileIndex::grid_row)
      .def_readonly("grid_col", &TileIndex::grid_col)
      .def_readonly("x", &TileIndex::x)
      .def_readonly("y", &TileIndex::y)
      .def_readonly("width", &TileIndex::width)
      .def_readonly("height", &TileIndex::height);
  m.def("tile_grid", &tile_grid, py::arg("width"), py::arg("height"), py::arg("tile"), py::arg("overlap") = 0);
  m.def("clip_polygon", [](const std::vector<std::pair<double, double>>& ring, double x0, double y0, double x1,
                           double y1) {
    std::vector<std::vector<std::pair<double, double>>> out;
    for (const Ring& r : clip_polygon(to_ring(ring), Rect{x0, y0, x1, y1})) out.push_back(from_ring(r));
    return out;
  });
  m.def("ring_area", [](const std::vector<std::pair<double, double>>& ring) { return ring_area(to_ring(ring)); });
  m.def(
      "split_dataset",
      [](std::vector<std::string> ids, std::size_t train, std::size_t val, std::size_t test, std::uint64_t seed) {
        const Split s = split_dataset(std::move(ids), SplitCounts{train, val, test}, seed);
        py::dict d;
        d["train"] = s.train;
        d["val"] = s.val;
        d["test"] = s.test;
        return d;
      },
      py::arg("ids"), py::arg("train"), py::arg("val"), py::arg("test"), py::arg("seed") = 0);

  m.def("parse_geojson_feature_count", [](const std::string& text) { return parse_geojson(text).features.size(); });
  m.def("parse_shapefile", [](py::bytes shp, std::optional<py::bytes> dbf) {
    const std::string s = shp;
    std::optional<std::string> d;
    if (dbf) d = std::string(*dbf);
    const auto as_span = [](const std::string& b) {
      return std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(b.data()), b.size());
    };
    const FeatureSet fs = d ? parse_shapefile(as_span(s), as_span(*d)) : parse_shapefile(as_span(s), std::nullopt);
    py::list out;
    for (const Feature& f : fs.features) {
      py::dict item;
      if (const auto* pt = std::get_if<PointGeometry>(&f.geometry)) {
        item["type"] = "Point";
        item["coordinates"] = std::make_pair(pt->at.x, pt->at.y);
      } else {
        const auto& poly = std::get<PolygonGeometry>(f.geometry);
        item["type"] = "Polygon";
        std::vector<std::vector<std::pair<double, double>>> rings;
        for (const Ring& r : poly.rings) rings.push_back(from_ring(r));
        item["coordinates"] = rings;
      }
      py::dict tags;
      for (const auto& [k, v] : f.tags) tags[py::str(k)] = v;
      item["tags"] = tags;
      out.append(item);
    }
    return out;
  }, py::arg("shp"), py::arg("dbf") = py::none());

  m.def("default_config_text", [] { return to_config_text(default_config()); });
  m.def("parse_config_text", [](const std::string& text) { return to_config_text(parse_config_text(text)); });
  m.def("parse_detection_file", [](const std::string& text) {
    std::vector<std::pair<std::string, std::vector<Detection>>> out;
    for (TileDetections& t : parse_detection_file(text)) out.emplace_back(t.tile_id, std::move(t.dets));
    return out;
  });
  m.def("postprocess_detections", [](std::vector<Detection> dets, double min_conf, int max_instances, double nms_thresh) {
    ModelConfig cfg = default_config();
    cfg.detection_min_confidence = min_conf;
    cfg.detection_max_instances = max_instances;
    cfg.detection_nms_threshold = nms_thresh;
    return postprocess({{"", std::move(dets)}}, cfg).front().dets;
  });
}
