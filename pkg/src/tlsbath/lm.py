"""Damped Gauss-Newton (Levenberg-Marquardt) least squares.

Minimizes ``0.5 * ||r(x)||^2`` for a residual vector ``r``. The damping
term uses Marquardt's diagonal scaling, and each step is computed from the
augmented system ``[J; sqrt(lam D)] dx = [-r; 0]`` with ``lstsq`` for
stability at poor conditioning.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["LMResult", "levenberg_marquardt", "numeric_jacobian"]


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    residual: np.ndarray
    jacobian: np.ndarray
    iterations: int
    converged: bool
    message: str
    history: list = field(default_factory=list)

    @property
    def residual_norm(self):
        return float(np.linalg.norm(self.residual))


def numeric_jacobian(fun, x, rel_step=1e-6):
    x = np.asarray(x, dtype=float)
    h = rel_step * np.maximum(np.abs(x), 1.0)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        cols.append((fun(x + e) - fun(x - e)) / (2 * h[i]))
    return np.column_stack(cols)


def levenberg_marquardt(fun, x0, jac=None, *, feasible=None, xtol=1e-9, ftol=1e-12,
                        max_iter=200, lam0=1e-3, lam_max=1e16):
    """Minimize ``0.5 ||fun(x)||^2`` starting from ``x0``.

    ``jac(x)`` returns the Jacobian of ``fun``; central differences are used
    when it is omitted. ``feasible(x)`` may reject trial points (treated as
    failed steps), which is how simple positivity barriers are imposed.

    Converged when an accepted step satisfies
    ``||dx|| <= xtol * (||x|| + xtol)`` or lowers the cost by less than
    ``ftol * cost``, or when the cost reaches exactly zero.
    """
    if jac is None:
        def jac(x):
            return numeric_jacobian(fun, x)

    x = np.array(x0, dtype=float)
    r = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("residuals are not finite at the starting point")
    cost = 0.5 * float(r @ r)
    J = np.asarray(jac(x), dtype=float)
    if not np.all(np.isfinite(J)):
        raise ValueError("Jacobian is not finite at the starting point")
    lam = lam0
    history = [cost]
    m = x.size

    for it in range(1, max_iter + 1):
        if cost == 0.0:
            return LMResult(x, cost, r, J, it - 1, True, "zero residual", history)
        jtj_diag = np.einsum("ij,ij->j", J, J)
        d = np.maximum(jtj_diag, 1e-12 * max(jtj_diag.max(), 1e-300))
        while True:
            a = np.vstack([J, np.diag(np.sqrt(lam * d))])
            b = np.concatenate([-r, np.zeros(m)])
            dx = np.linalg.lstsq(a, b, rcond=None)[0]
            x_new = x + dx
            ok = feasible is None or feasible(x_new)
            if ok:
                r_new = np.asarray(fun(x_new), dtype=float)
                ok = np.all(np.isfinite(r_new))
            if ok:
                cost_new = 0.5 * float(r_new @ r_new)
                if cost_new <= cost:
                    J_new = np.asarray(jac(x_new), dtype=float)
                    if np.all(np.isfinite(J_new)):
                        break
            lam *= 10.0
            if lam > lam_max:
                # no descent possible at machine precision: x is a minimum
                return LMResult(x, cost, r, J, it, True, "no further descent", history)

        small_step = np.linalg.norm(dx) <= xtol * (np.linalg.norm(x) + xtol)
        small_gain = (cost - cost_new) <= ftol * cost
        x, r, cost, J = x_new, r_new, cost_new, J_new
        history.append(cost)
        lam = max(lam / 10.0, 1e-12)
        if small_step or small_gain:
            msg = "relative step below xtol" if small_step else "relative cost change below ftol"
            return LMResult(x, cost, r, J, it, True, msg, history)

    return LMResult(x, cost, r, J, max_iter, False, "maximum iterations reached", history)
