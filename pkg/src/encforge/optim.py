"""Adaptive-moment optimizer and a central-difference gradient checker."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import ParamStore, Tape


class Adam:
    """Adam over a :class:`ParamStore`, updating in place from the grad slots.

    Defaults (lr 1e-3, decay 0.9/0.999, eps 1e-8) are the usual ones.
    ``step`` consumes the accumulated gradients and zeroes them.
    """

    def __init__(self, params: ParamStore, lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if len(params) == 0:
            raise ValueError("optimizer needs a non-empty parameter store")
        self.params = params
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self._t = 0
        self._m = {name: np.zeros(p.shape) for name, p in params.items()}
        self._v = {name: np.zeros(p.shape) for name, p in params.items()}

    def step(self) -> None:
        self._t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self._t
        bc2 = 1.0 - b2 ** self._t
        for name, p in self.params.items():
            g = p.grad
            if g is None:
                raise ValueError(f"parameter {name!r} has no populated gradient")
            m = self._m[name] = b1 * self._m[name] + (1.0 - b1) * g
            v = self._v[name] = b2 * self._v[name] + (1.0 - b2) * (g * g)
            update = self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.data = p.data - update
        self.params.zero_grads()


@dataclass
class GradCheckReport:
    """Outcome of comparing analytic gradients with central differences."""

    passed: bool
    deterministic: bool
    max_rel_err: float
    eps: float
    tol: float
    floor: float
    worst_param: str = ""
    worst_index: tuple = ()
    failures: list = field(default_factory=list)
    per_param: dict = field(default_factory=dict)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"grad check {status}: max rel err {self.max_rel_err:.3e} "
                 f"(tol {self.tol:.1e}, eps {self.eps:.1e})"]
        if not self.deterministic:
            lines.append("loss function is NOT deterministic; freeze all noise sources")
        if self.worst_param:
            lines.append(f"worst element: {self.worst_param}{list(self.worst_index)}")
        if self.failures:
            lines.append(f"{len(self.failures)} element(s) over tolerance")
        return "\n".join(lines)


def grad_check(loss_fn, params: ParamStore, eps: float = 1e-5,
               tol: float = 1e-4, floor: float = 1e-3) -> GradCheckReport:
    """Compare analytic gradients of ``loss_fn(params)`` with central differences.

    ``loss_fn`` must be a deterministic map from the current parameter values
    to a scalar tensor; any sampling inside it has to be frozen. Each element
    is scored as ``|analytic - numeric| / max(|analytic|, |numeric|, floor)``;
    the floor turns the comparison absolute for gradients smaller than
    ``floor``, where central differences are dominated by roundoff.
    """

    def eval_loss() -> float:
        return float(loss_fn(params).data)

    f0 = eval_loss()
    deterministic = (f0 == eval_loss())

    params.zero_grads()
    with Tape() as tape:
        tape.backward(loss_fn(params))
    analytic = {name: p.grad.copy() for name, p in params.items()}
    params.zero_grads()

    max_rel = 0.0
    worst = ("", ())
    failures = []
    per_param = {}
    for name, p in params.items():
        flat = p.data.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        param_max = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = eval_loss()
            flat[i] = orig - eps
            f_minus = eval_loss()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = a_flat[i]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            idx = np.unravel_index(i, p.shape)
            if rel > param_max:
                param_max = rel
            if rel > max_rel:
                max_rel = rel
                worst = (name, idx)
            if rel > tol:
                failures.append((name, idx, float(a), float(numeric), float(rel)))
        per_param[name] = param_max

    passed = deterministic and max_rel <= tol
    return GradCheckReport(passed=passed, deterministic=deterministic,
                           max_rel_err=max_rel, eps=eps, tol=tol, floor=floor,
                           worst_param=worst[0], worst_index=worst[1],
                           failures=failures, per_param=per_param)
