"""SDFC-LVT: motion estimation of fast maneuvering targets.

The range spectrum is split into two sub-bands whose conjugate product
carries a small equivalent carrier (half the bandwidth), which removes
velocity ambiguity.  The Keystone transform then corrects the range walk
and Lv's transform estimates centroid frequency and chirp rate, mapped to
velocity and acceleration.
"""
__version__ = "0.1.0"

from .errors import (GateError, GeometryError, GridCoverageError, IngestError, MetricError,
                     PeakCountError, PrincipalIntervalError, SDFCError)
from .keystone import keystone_transform, residual_walk
from .lvt import EstimateReport, LVTConfig, LVTPlane, TargetEstimate, lvt, sdfc_lvt_estimate
from .model import (DataMatrix, RadarParams, Scene, TargetMotion, derived_rng,
                    synthesize_compressed_spectrum, synthesize_raw_echo, table1_targets,
                    table2_radar)
from .rangeproc import conjugate_product, range_compress, sdfc_preprocess, split_subbands
