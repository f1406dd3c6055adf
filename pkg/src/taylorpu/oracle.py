"""Independent brute-force verifiers used by the test suite.

Nothing here shares code with the analytic implementations it checks:
gradients are approximated by central differences, expectations are exact
sums over small discrete worlds, and the geometric-series identity is
evaluated term by term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_order, check_prob_batch

DEFAULT_FD_EPS = 1e-6


def finite_diff_grad(fn, point, eps: float = DEFAULT_FD_EPS) -> np.ndarray:
    """Central-difference gradient of a scalar function.

    Args:
        fn: callable mapping a 1-D float vector to a float.
        point: evaluation point.
        eps: half-width of the central difference stencil.

    Returns:
        Vector of (fn(x + eps*e_i) - fn(x - eps*e_i)) / (2*eps).

    Raises:
        ValueError: if eps <= 0 or any evaluation is non-finite.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    x = np.asarray(point, dtype=np.float64).reshape(-1)
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = eps
        hi = float(fn(x + step))
        lo = float(fn(x - step))
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise ValueError(f"non-finite evaluation near coordinate {i}")
        grad[i] = (hi - lo) / (2.0 * eps)
    return grad


@dataclass(frozen=True)
class DiscreteToyWorld:
    """A finite distribution over a handful of points.

    ``marginal_prob[j]`` is the marginal mass of point j (sums to 1) and
    ``posterior[j]`` the true probability that point j is positive.  At
    least one point must have posterior exactly 1: that anchor is what
    pins the optimal scorer to the true posterior rather than to a scaled
    copy of it.
    """

    points: np.ndarray
    marginal_prob: np.ndarray
    posterior: np.ndarray

    def __post_init__(self):
        marg = np.asarray(self.marginal_prob, dtype=np.float64)
        post = np.asarray(self.posterior, dtype=np.float64)
        if marg.size != post.size or marg.size == 0:
            raise ValueError("marginal_prob and posterior must be non-empty and aligned")
        if not np.isclose(marg.sum(), 1.0, atol=1e-12):
            raise ValueError(f"marginal probabilities must sum to 1, got {marg.sum()}")
        if marg.min() < 0 or post.min() < 0 or post.max() > 1:
            raise ValueError("probabilities must lie in [0, 1]")
        if not np.any(post == 1.0):
            raise ValueError("world needs at least one point with posterior exactly 1")
        object.__setattr__(self, "marginal_prob", marg)
        object.__setattr__(self, "posterior", post)

    @property
    def positive_density(self) -> np.ndarray:
        """Exact conditional density of points given the positive class."""
        joint = self.posterior * self.marginal_prob
        return joint / joint.sum()


def random_toy_world(rng: np.random.Generator, max_points: int = 16) -> DiscreteToyWorld:
    """Draw a random world satisfying the posterior-1 anchor condition."""
    n = int(rng.integers(2, max_points + 1))
    marg = rng.random(n) + 1e-3
    marg /= marg.sum()
    post = rng.random(n)
    post[rng.integers(0, n)] = 1.0
    points = rng.normal(size=(n, 2))
    return DiscreteToyWorld(points=points, marginal_prob=marg, posterior=post)


def exact_variational_kl(world: DiscreteToyWorld, f_values) -> tuple[float, float]:
    """Both sides of the variational-gap identity, by exact summation.

    For a scorer f on the world's points, the KL divergence between the
    true positive density and the scorer-induced one,

        q_f(x) = f(x) * marginal(x) / E[f],

    must equal the difference between the variational loss of f and the
    variational loss of the true posterior.

    Args:
        world: finite world supplying marginal and posterior.
        f_values: scorer values per point, each in (0, 1].

    Returns:
        (kl, loss_gap) for side-by-side comparison.

    Raises:
        ValueError: if f has mass-zero expectation or leaves (0, 1].
    """
    f = np.asarray(f_values, dtype=np.float64).reshape(-1)
    if f.size != world.marginal_prob.size:
        raise ValueError("f_values must supply one value per world point")
    if f.min() <= 0 or f.max() > 1:
        raise ValueError("f values must lie in (0, 1]")

    marg = world.marginal_prob
    post = world.posterior
    p_pos = world.positive_density

    e_u_f = float(np.sum(f * marg))
    if e_u_f == 0:
        raise ValueError("expectation of f under the marginal is zero")
    q_f = f * marg / e_u_f

    support = p_pos > 0
    kl = float(np.sum(p_pos[support] * np.log(p_pos[support] / q_f[support])))

    def loss(values: np.ndarray) -> float:
        mean_term = float(np.log(np.sum(values * marg)))
        # 0 * log(0) terms vanish; restrict to the positive support.
        pos_term = float(np.sum(p_pos[support] * np.log(values[support])))
        return mean_term - pos_term

    loss_gap = loss(f) - loss(post)
    return kl, loss_gap


def series_identity_check(f_u, order: int) -> float:
    """Absolute gap between the two closed forms of the unlabeled weight.

    Compares (1/n_u) * sum_{i=1..order} s^(i-1) against
    (1 - s^order) / (n_u * (1 - s)) with s = 1 - mean(f_u); the two are
    equal by the geometric series whenever 0 < s < 1.
    """
    f_u = check_prob_batch(f_u, "f_u")
    order = check_order(order)
    n_u = f_u.size
    sigma = 1.0 - float(np.mean(f_u))
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie strictly in (0, 1), got {sigma}")
    term_form = float(np.sum(sigma ** np.arange(order, dtype=np.float64))) / n_u
    closed_form = (1.0 - sigma**order) / (n_u * (1.0 - sigma))
    return abs(term_form - closed_form)
