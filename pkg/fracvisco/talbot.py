"""
Fixed-Talbot numerical inversion of Laplace transforms.

The Bromwich contour is deformed into p(theta) = (r/t) theta (cot(theta) + i),
theta in (-pi, pi), with r = 2M/5. The contour wraps the negative real axis,
so branch cuts of s**alpha on (-inf, 0] and poles with Re(s) < r/t are
enclosed. Accuracy degrades for t -> 0 and for very large t
when the transform has poles close to the imaginary axis.
"""
import numpy as np

from fracvisco.errors import DomainError


def talbot_contour(t, nodes):
    """
    Contour nodes and quadrature weights of the fixed Talbot rule.

    # Arguments
    t (array): Strictly positive times, shape (n,)
    nodes (int): Number of contour nodes M

    # Returns
    (s, weights, factor) with s and weights of shape (n, M) and factor of shape (n,),
    such that f(t) ~= factor * Re(sum_k weights[:, k] * F(s[:, k])).
    """
    if nodes < 2:
        raise DomainError(f'Talbot inversion needs at least 2 nodes, got {nodes}')
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0.0):
        raise DomainError('Talbot inversion requires t > 0')

    theta = np.arange(nodes) * np.pi / nodes
    cot = np.zeros_like(theta)
    cot[1:] = 1.0 / np.tan(theta[1:])
    r = 0.4 * nodes

    shape = theta * (cot + 1j)
    shape[0] = 1.0
    s = (r / t)[:, None] * shape[None, :]

    weights = np.exp(t[:, None] * s) * (1 + 1j * theta * (1 + cot**2) - 1j * cot)
    weights[:, 0] = 0.5 * np.exp(r)

    return s, weights, r / nodes / t


def talbot_invert(fhat, t, nodes=32):
    """
    Invert a Laplace transform at the times t.

    # Arguments
    fhat (callable): Transform, vectorised over a complex array s. It must return an
                     array of shape s.shape (scalar transform) or s.shape + (m,)
                     (vector-valued transform).
    t (float or array): Strictly positive evaluation times
    nodes (int): Number of contour nodes M

    # Returns
    Real array of shape t.shape (+ (m,) for vector-valued transforms)
    """
    scalar = np.ndim(t) == 0
    s, weights, factor = talbot_contour(t, nodes)

    values = np.asarray(fhat(s))
    result = np.einsum('nm,nm...->n...', weights, values).real
    result *= factor.reshape((-1, ) + (1, ) * (result.ndim - 1))

    if scalar:
        return result[0]
    return result
