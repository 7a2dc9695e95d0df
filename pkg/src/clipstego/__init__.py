"""Hide payloads in uncompressed video clips.

Static regions carry whole payload bytes at key-selected pixels; dynamic
regions carry one bit per channel byte via LSB parity.
"""

from .embedding import CapacityReport, EmbedPlan, EmbedReport, ap_positions, build_plan, capacity, embed
from .errors import (
    BadMagic,
    CapacityExceeded,
    ClipTooSmall,
    CrcMismatch,
    DimensionMismatch,
    FormatError,
    IntegrityError,
    StegoError,
)
from .extraction import ExtractResult, extract, read_header
from .frame_io import Clip, Frame, load_clip, read_avi, read_ppm, save_clip, write_avi, write_ppm
from .keying import KeyMaterial, derive_key_material, hash_key, keystream
from .metrics import FidelityReport, compare, mse, psnr
from .motion_analysis import AnalysisParams, Method, RegionMap, analyze

__version__ = "0.1.0"
