"""Single-trajectory optimizers: gradient descent, SPSA, Nelder-Mead, BFGS."""

from __future__ import annotations

import numpy as np

from .base import Optimizer, central_gradient, shift_gradient


class GradientDescent(Optimizer):
    """Fixed-step steepest descent ``theta <- theta - eta * grad``.

    Gradients use the parameter-shift rule when the objective supports it and
    central differences with step ``fd_step`` otherwise.  With
    ``track_value`` the current iterate is evaluated once per iteration so the
    trace follows the descent path (one extra FE per iteration).
    """

    name = "gd"

    def __init__(self, eta=0.1, budget=1000, fd_step=1e-3, track_value=True, seed=0):
        self.eta = eta
        self.budget = budget
        self.fd_step = fd_step
        self.track_value = track_value
        self.seed = seed

    def _minimize(self, obj, x, rng):
        while True:
            obj.next_iteration()
            if self.track_value:
                obj.evaluate(x)
            g = shift_gradient(obj, x) if obj.shift_rule else central_gradient(obj, x, self.fd_step)
            x = x - self.eta * g
            obj.iterate = x


class SPSA(Optimizer):
    """Simultaneous perturbation stochastic approximation.

    Two FEs per iteration.  Gains follow Spall's schedule
    ``a_k = a / (k + 1 + A)**alpha`` and ``c_k = c / (k + 1)**gamma``.
    The perturbed points never coincide with the iterate, so the best traced
    value stays above roughly ``c_k**2`` times the curvature; ``track_value``
    adds one evaluation of the iterate per iteration.
    """

    name = "spsa"

    def __init__(self, a=0.2, c=0.1, A=10.0, alpha=0.602, gamma=0.101, track_value=False,
                 budget=1000, seed=0):
        self.a = a
        self.track_value = track_value
        self.c = c
        self.A = A
        self.alpha = alpha
        self.gamma = gamma
        self.budget = budget
        self.seed = seed

    def _minimize(self, obj, x, rng):
        k = 0
        while True:
            obj.next_iteration()
            ak = self.a / (k + 1 + self.A) ** self.alpha
            ck = self.c / (k + 1) ** self.gamma
            if self.track_value:
                obj.evaluate(x)
            delta = rng.choice((-1.0, 1.0), size=x.shape[0])
            yp = obj.evaluate(x + ck * delta)
            ym = obj.evaluate(x - ck * delta)
            x = x - ak * (yp - ym) / (2 * ck) * delta
            obj.iterate = x
            k += 1


class NelderMead(Optimizer):
    """Downhill simplex with reflection 1, expansion 2, contraction 0.5, shrink 0.5.

    Stops early (status ``stopped``) once the simplex diameter falls below
    ``xatol``.
    """

    name = "nelder_mead"

    def __init__(self, initial_edge=0.1, reflection=1.0, expansion=2.0, contraction=0.5,
                 shrink=0.5, xatol=1e-12, budget=1000, seed=0):
        self.initial_edge = initial_edge
        self.reflection = reflection
        self.expansion = expansion
        self.contraction = contraction
        self.shrink = shrink
        self.xatol = xatol
        self.budget = budget
        self.seed = seed

    def _minimize(self, obj, x0, rng):
        d = x0.shape[0]
        obj.next_iteration()
        simplex = np.vstack([x0, x0 + self.initial_edge * np.eye(d)])
        f = obj.evaluate_many(simplex)
        while True:
            order = np.argsort(f, kind="stable")
            simplex, f = simplex[order], f[order]
            obj.iterate = simplex[0].copy()
            if np.max(np.abs(simplex[1:] - simplex[0])) < self.xatol:
                return simplex[0]
            obj.next_iteration()
            centroid = simplex[:-1].mean(axis=0)
            xr = centroid + self.reflection * (centroid - simplex[-1])
            fr = obj.evaluate(xr)
            if fr < f[0]:
                xe = centroid + self.expansion * (xr - centroid)
                fe = obj.evaluate(xe)
                simplex[-1], f[-1] = (xe, fe) if fe < fr else (xr, fr)
                continue
            if fr < f[-2]:
                simplex[-1], f[-1] = xr, fr
                continue
            if fr < f[-1]:
                xc = centroid + self.contraction * (xr - centroid)
                fc = obj.evaluate(xc)
                accept = fc <= fr
            else:
                xc = centroid + self.contraction * (simplex[-1] - centroid)
                fc = obj.evaluate(xc)
                accept = fc < f[-1]
            if accept:
                simplex[-1], f[-1] = xc, fc
                continue
            for i in range(1, d + 1):
                simplex[i] = simplex[0] + self.shrink * (simplex[i] - simplex[0])
                f[i] = obj.evaluate(simplex[i])


class BFGS(Optimizer):
    """Quasi-Newton BFGS with central-difference gradients and Armijo backtracking."""

    name = "bfgs_fd"

    def __init__(self, fd_step=1e-3, c1=1e-4, backtrack=0.5, max_backtracks=30, gtol=1e-10,
                 budget=1000, seed=0):
        self.fd_step = fd_step
        self.c1 = c1
        self.backtrack = backtrack
        self.max_backtracks = max_backtracks
        self.gtol = gtol
        self.budget = budget
        self.seed = seed

    def _minimize(self, obj, x, rng):
        d = x.shape[0]
        inv_hess = np.eye(d)
        obj.next_iteration()
        fx = obj.evaluate(x)
        g = central_gradient(obj, x, self.fd_step)
        while True:
            if np.linalg.norm(g) < self.gtol:
                return x
            obj.next_iteration()
            p = -inv_hess @ g
            slope = g @ p
            if slope >= 0:
                # not a descent direction under noise: restart from steepest descent
                inv_hess = np.eye(d)
                p, slope = -g, -(g @ g)
            alpha = 1.0
            for _ in range(self.max_backtracks):
                x_new = x + alpha * p
                f_new = obj.evaluate(x_new)
                if f_new <= fx + self.c1 * alpha * slope:
                    break
                alpha *= self.backtrack
            else:
                inv_hess = np.eye(d)
                continue
            g_new = central_gradient(obj, x_new, self.fd_step)
            s, y = x_new - x, g_new - g
            sy = s @ y
            if sy > 1e-12:
                rho = 1.0 / sy
                v = np.eye(d) - rho * np.outer(s, y)
                inv_hess = v @ inv_hess @ v.T + rho * np.outer(s, s)
            x, fx, g = x_new, f_new, g_new
            obj.iterate = x
