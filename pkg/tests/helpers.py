import numpy as np

from mlmolp.multilevel import MultilevelProblem


def random_problem(seed, P=None, gate=None):
    """Bounded, feasible multilevel problem with small integer data."""
    rng = np.random.default_rng(seed)
    P = int(rng.integers(2, 4)) if P is None else P
    n = int(rng.integers(P, 7))
    m = int(rng.integers(1, 5))
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    u = rng.integers(1, 8, size=n).astype(float)
    x0 = rng.uniform(0, u)
    b = np.round(A @ x0 + rng.integers(0, 5, size=m), 6)
    cuts = np.sort(rng.choice(np.arange(1, n), size=P - 1, replace=False))
    part = np.diff(np.concatenate([[0], cuts, [n]])).tolist()
    C = rng.integers(-4, 5, size=(P, n)).astype(float)
    gate = bool(rng.integers(0, 2)) if gate is None else gate
    return MultilevelProblem(partition=part, objectives=C, A=np.vstack([A, np.eye(n)]),
                             b=np.concatenate([b, u]), coefficient_gate=gate)
