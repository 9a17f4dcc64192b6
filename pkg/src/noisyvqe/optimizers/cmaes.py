"""Covariance matrix adaptation evolution strategy."""

from __future__ import annotations

import math

import numpy as np

from .base import ANGLE_BOUND, Optimizer, clip_angles


class CMAES(Optimizer):
    """(mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates.

    Strategy parameters follow Hansen's tutorial defaults:
    ``lambda = 4 + floor(3 ln d)``, ``mu = lambda // 2`` with log weights.
    Offspring are clipped to ``[-2 pi, 2 pi]`` before evaluation and the
    clipped points enter the update.

    Parameters
    ----------
    sigma0 : float
        Initial step size.
    popsize : int, optional
        Offspring per generation; the default formula when ``None``.
    tolx : float
        Internal stop once ``sigma * max(sqrt(diag C))`` falls below it.
    """

    name = "cma_es"
    population_based = True

    def __init__(self, sigma0=0.3, popsize=None, tolx=1e-12, budget=1000, seed=0):
        self.sigma0 = sigma0
        self.popsize = popsize
        self.tolx = tolx
        self.budget = budget
        self.seed = seed

    def _minimize(self, obj, x0, rng):
        n = x0.shape[0]
        lam = self.popsize or 4 + int(3 * math.log(n))
        mu = lam // 2
        w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        w /= w.sum()
        mueff = 1.0 / np.sum(w**2)

        cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        cs = (mueff + 2) / (n + mueff + 5)
        c1 = 2 / ((n + 1.3) ** 2 + mueff)
        cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
        chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

        mean = x0.copy()
        sigma = self.sigma0
        pc = np.zeros(n)
        ps = np.zeros(n)
        B = np.eye(n)
        D = np.ones(n)
        C = np.eye(n)
        invsqrt = np.eye(n)
        eigen_age = 0
        gen = 0
        while True:
            obj.next_iteration()
            z = rng.standard_normal((lam, n))
            y = z @ (B * D).T
            x = clip_angles(mean + sigma * y)
            y = (x - mean) / sigma
            f = obj.evaluate_many(x)

            order = np.argsort(f, kind="stable")[:mu]
            old = mean
            y_sel = y[order]
            mean = old + sigma * (w @ y_sel)
            obj.iterate = mean

            ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) * (invsqrt @ ((mean - old) / sigma))
            gen += 1
            hsig = np.linalg.norm(ps) / math.sqrt(1 - (1 - cs) ** (2 * gen)) / chi_n < 1.4 + 2 / (n + 1)
            pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * (mean - old) / sigma

            C = (
                (1 - c1 - cmu) * C
                + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * C)
                + cmu * (y_sel.T * w) @ y_sel
            )
            sigma *= math.exp((cs / damps) * (np.linalg.norm(ps) / chi_n - 1))
            sigma = min(sigma, 2 * ANGLE_BOUND)

            eigen_age += lam
            if eigen_age > lam / (c1 + cmu) / n / 10:
                eigen_age = 0
                C = np.triu(C) + np.triu(C, 1).T
                evals, B = np.linalg.eigh(C)
                D = np.sqrt(np.maximum(evals, 1e-300))
                invsqrt = B @ np.diag(1 / D) @ B.T
            if sigma * D.max() < self.tolx:
                return mean
