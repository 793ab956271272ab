"""Contour point-cloud fingerprints for tracked objects in mask videos."""

from .embed import DESCRIPTOR_VERSION, FEATURE_DIM, feature_distance
from .errors import ContourFPError, IncompatibleVersionError
from .kernels import BACKEND
from .pipeline import PipelineConfig, process_video, run_experiment, select_primary_target
from .pointcloud import SampleConfig, farthest_point_sample, masks_to_pointcloud, normalize_unit_sphere
from .tracker import TrackerConfig, track_video
from .vectordb import VectorDB

__version__ = "0.1.0"
