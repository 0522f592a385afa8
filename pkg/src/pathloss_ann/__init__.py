"""Path loss regression with a from-scratch multilayer perceptron.

Modules: ``numeric`` (matrices, seeded RNG, compiled or pure-Python kernels),
``mlp`` (network, loss, backpropagation), ``optimizer`` (L-BFGS and gradient
descent), ``data`` (CSV, splitting, features, synthetic generator),
``baseline`` (log-distance least squares), ``experiment`` (sweeps and
evaluation), ``reports``, ``model_io`` and ``cli``.
"""

__version__ = "0.1.0"
