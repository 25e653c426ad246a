"""Detection of rare and weak spikes in large covariance matrices."""

import json

from ._core import *  # noqa: F401,F403
from ._core import ideal_error as _ideal_error


def ideal_error(*args, **kwargs):
    """Ideal testing error report as a dict."""
    return json.loads(_ideal_error(*args, **kwargs))
