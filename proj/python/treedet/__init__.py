# Copyright 2026 The treedet Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the treedet tree-crown detection pipeline."""

from ._core import (  # noqa: F401
    Box,
    Detection,
    Error,
    GeoTransform,
    GroundTruth,
    Interpolation,
    IouMode,
    TileData,
    TileIndex,
    average_precision,
    box_iou,
    clip_polygon,
    default_config_text,
    evaluate,
    f1_score,
    feature_map_shape,
    filter_detections,
    load_world_file,
    nms,
    parse_config_text,
    parse_detection_file,
    parse_geojson_feature_count,
    parse_shapefile,
    polygon_iou,
    postprocess_detections,
    ring_area,
    split_dataset,
    tile_grid,
)

__version__ = "0.1.0"
