"""Online streaming analytics: dynamic preprocessing, drift-triggered feature
selection and a performance-weighted ensemble of incremental learners."""

from ._jit import using_jit
from .config import PipelineConfig, load_config
from .pipeline import MSANA, SingleLearner, make_pipeline

__all__ = ["MSANA", "PipelineConfig", "SingleLearner", "load_config", "make_pipeline",
           "using_jit"]
__version__ = "0.1.0"
