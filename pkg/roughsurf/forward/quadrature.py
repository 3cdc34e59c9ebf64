import numpy as np
import numpy.typing as npt


_CHUNK = 2048


def kress_weights(n: int, tau: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """
    Weight function of the product quadrature for logarithmic kernels on ``2n`` equidistant nodes::

        R(tau) = -(2 pi / n) sum_{m=1}^{n-1} cos(m tau) / m - (pi / n^2) cos(n tau)

    ``sum_j R(t - t_j) f(t_j)`` integrates ``ln(4 sin^2((t - s)/2)) f(s)`` over a period exactly for
    trigonometric polynomials ``f`` of degree below ``n``.

    Args:
        n: Half the number of nodes.
        tau: Parameter offsets ``t - t_j`` of any shape.

    Raises:
        ValueError: If ``n < 2``.
    """
    if n < 2:
        raise ValueError(f'Quadrature needs n >= 2, got {n}.')
    tau = np.asarray(tau, dtype=np.float64)
    flat = np.mod(tau.ravel(), 2 * np.pi)
    # offsets on nested lattices repeat, so evaluate each distinct one once
    unique, inverse = np.unique(flat, return_inverse=True)
    m = np.arange(1, n)
    total = np.empty_like(unique)
    for start in range(0, len(unique), _CHUNK):
        chunk = unique[start:start + _CHUNK]
        total[start:start + _CHUNK] = np.cos(np.outer(chunk, m)) @ (1.0 / m)
    weights = -(2 * np.pi / n) * total - (np.pi / n ** 2) * np.cos(n * unique)
    return weights[inverse].reshape(tau.shape)


def quad_weights_R(n: int) -> npt.NDArray[np.float64]:
    """
    Returns:
        ``R_0 .. R_{2n-1}``, the weights of :func:`kress_weights` at the node offsets ``j pi / n``.
        The weight between nodes ``i`` and ``j`` is ``R_{|i-j|}``.

    Raises:
        ValueError: If ``n < 2``.
    """
    if n < 2:
        raise ValueError(f'Quadrature needs n >= 2, got {n}.')
    return kress_weights(n, np.pi * (np.arange(2 * n) / n))
