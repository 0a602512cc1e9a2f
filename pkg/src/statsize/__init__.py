"""Statistical static timing analysis and exact statistical gate sizing."""

from .cell_library import CellType, GateInstance, Library, VariationModel, load_library, read_library
from .mc_oracle import McResult, empirical_percentile, sample_circuit_delays, validate_bound
from .netlist_io import Netlist, parse_bench, read_bench, write_bench
from .ssta_engine import OpCounter, SstaResult, TimingModel
from .stat_dist import DiscreteDist, convolve, max_delta, percentile, stat_max
from .sizer import SizerConfig, SizerRun, optimize
from .timing_graph import TimingGraph, build_graph

__version__ = "0.1.0"
