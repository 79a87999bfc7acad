"""
dlasso: penalized least squares with the differentiable lasso penalty

The penalty p(x, s) = x * erf(x / s) approaches |x| as s shrinks and behaves
like x^2 near zero for s = 2/sqrt(pi). This package provides the erf kernels
behind it, the scalar thresholding rule, an iterated-ridge solver, baseline
estimators, model selection over (lambda, s), simulation scenarios and a
command line.
"""

from .exceptions import *
from .special_fn import *
from .penalty import *
from .config import *
from .data import *
from .preprocessing import *
from .scalar_threshold import *
from .solver import *
from .baselines import *
from .model_select import *
from .simgen import *
from .bench import *
from .reports import *

__version__ = "0.1.0"
