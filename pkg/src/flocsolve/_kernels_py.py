"""Numpy reference implementation of the hot tensor kernels.

These two contractions dominate residual and Jacobian evaluation; the
compiled extension (``flocsolve._kernels``) provides the same signatures.
"""
import numpy as np


def contract_vec(tensor: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """out[k, q] = sum_j tensor[k, q, j] * vec[j]."""
    return tensor @ vec


def contract_rows(weights: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    """out[k, m] = sum_q weights[k, q] * tensor[k, q, m]."""
    return np.einsum("kq,kqm->km", weights, tensor)
