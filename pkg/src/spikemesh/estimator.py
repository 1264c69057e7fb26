"""scikit-learn style front end for spiking vector-matrix products."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._fast import CompiledNetwork, run_fast
from .mappers.vmm import VmmProblem, map_vmm


class SpikingVMM(BaseEstimator):
    """Multiply vectors by a fixed integer matrix on a simulated core mesh.

    ``fit`` compiles the matrix into a network; ``predict`` rate codes each
    row of ``X``, simulates until the network falls silent and decodes the
    output spike counts.

    >>> est = SpikingVMM(mode="symmetric").fit([[2, -3], [1, 4]])
    >>> est.predict([[3, -1]]).tolist()
    [[5, -13]]
    """

    def __init__(self, mode: str = "symmetric", magnitude_bits: int = 8,
                 core_axons: int = 256, core_neurons: int = 256):
        self.mode = mode
        self.magnitude_bits = magnitude_bits
        self.core_axons = core_axons
        self.core_neurons = core_neurons

    def _map(self, vector):
        problem = VmmProblem(self.matrix_, vector, self.magnitude_bits)
        return map_vmm(problem, None if self.mode == "positive" else self.mode,
                       core_limits=(self.core_axons, self.core_neurons))

    def fit(self, X, y=None):
        self.matrix_ = np.asarray(X, dtype=np.int64)
        if self.matrix_.ndim == 1:
            self.matrix_ = self.matrix_.reshape(-1, 1)
        mapped = self._map(np.zeros(self.matrix_.shape[0], dtype=np.int64))
        self.network_ = mapped.network
        self.resources_ = mapped.resources
        self.n_features_in_ = self.matrix_.shape[0]
        self._compiled = CompiledNetwork(self.network_)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "network_")
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = np.zeros((X.shape[0], self.matrix_.shape[1]), dtype=np.int64)
        for r, vec in enumerate(X):
            mapped = self._map(vec)
            res = run_fast(self.network_, mapped.inputs, mapped.ticks_required, compiled=self._compiled)
            out[r] = mapped.decode(res.trace)
        return out
