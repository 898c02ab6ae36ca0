"""Exponential-utility premiums for multi-period insurance contracts.

Thin pure-python face over the compiled extension module: every public
function lives in C++; see ``help(riskalloc._riskalloc)`` for signatures.
"""

try:
    # Installed layout: the extension module sits inside the package.
    from riskalloc._riskalloc import *  # noqa: F401,F403
    from riskalloc._riskalloc import __version__  # noqa: F401
except ImportError:
    # In-tree layout: the extension module sits on PYTHONPATH next to the
    # build directory.
    from _riskalloc import *  # noqa: F401,F403
    from _riskalloc import __version__  # noqa: F401
