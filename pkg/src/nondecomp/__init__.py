"""Online and stochastic optimisation of non-decomposable performance measures."""

from .data import Dataset, FeasibleSet, InvalidInput, LabeledPoint, StreamOrder, project, score, shuffle
from .losses import MeasureSpec, evaluate, loss_value
from .online import FtrlConfig, run_ftrl
from .solvers import SgdConfig, run_1pmb, run_2pmb, run_psg

__version__ = "0.1.0"
