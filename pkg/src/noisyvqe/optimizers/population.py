"""Population metaheuristics: PSO, DE/best/1/bin, iL-SHADE and Cauchy annealing."""

from __future__ import annotations

import math

import numpy as np

from .base import ANGLE_BOUND, Optimizer, clip_angles, init_population


class PSO(Optimizer):
    """Global-best particle swarm with constriction coefficients.

    Swarm size defaults to ``10 + floor(2 sqrt(d))``.  Velocities are capped
    at ``vmax_fraction`` of the angle box width.
    """

    name = "pso"
    population_based = True

    def __init__(self, popsize=None, inertia=0.729, cognitive=1.49445, social=1.49445,
                 init_radius=1.0, vmax_fraction=0.2, budget=1000, seed=0):
        self.popsize = popsize
        self.inertia = inertia
        self.cognitive = cognitive
        self.social = social
        self.init_radius = init_radius
        self.vmax_fraction = vmax_fraction
        self.budget = budget
        self.seed = seed

    def _minimize(self, obj, x0, rng):
        d = x0.shape[0]
        size = self.popsize or 10 + int(2 * math.sqrt(d))
        vmax = self.vmax_fraction * 2 * ANGLE_BOUND
        obj.next_iteration()
        x = init_population(x0, size, self.init_radius, rng)
        v = rng.uniform(-self.init_radius, self.init_radius, size=x.shape) * 0.1
        f = obj.evaluate_many(x)
        pbest, pbest_f = x.copy(), f.copy()
        g = int(np.argmin(pbest_f))
        while True:
            obj.next_iteration()
            r1, r2 = rng.random(x.shape), rng.random(x.shape)
            v = (self.inertia * v
                 + self.cognitive * r1 * (pbest - x)
                 + self.social * r2 * (pbest[g] - x))
            v = np.clip(v, -vmax, vmax)
            x = clip_angles(x + v)
            f = obj.evaluate_many(x)
            better = f < pbest_f
            pbest[better], pbest_f[better] = x[better], f[better]
            g = int(np.argmin(pbest_f))
            obj.iterate = pbest[g].copy()


class DEBest1Bin(Optimizer):
    """Classic DE/best/1/bin with fixed ``F`` and ``CR``.

    Population defaults to ``15 * d``; trial vectors outside the angle box
    are clipped.
    """

    name = "de_best1bin"
    population_based = True

    def __init__(self, popsize=None, F=0.8, CR=0.9, init_radius=1.0, budget=1000, seed=0):
        self.popsize = popsize
        self.F = F
        self.CR = CR
        self.init_radius = init_radius
        self.budget = budget
        self.seed = seed

    def _minimize(self, obj, x0, rng):
        d = x0.shape[0]
        size = max(self.popsize or 15 * d, 4)
        obj.next_iteration()
        pop = init_population(x0, size, self.init_radius, rng)
        fit = obj.evaluate_many(pop)
        while True:
            obj.next_iteration()
            best = pop[int(np.argmin(fit))].copy()
            for i in range(size):
                r1, r2 = rng.choice([j for j in range(size) if j != i], 2, replace=False)
                mutant = best + self.F * (pop[r1] - pop[r2])
                cross = rng.random(d) < self.CR
                cross[rng.integers(d)] = True
                trial = clip_angles(np.where(cross, mutant, pop[i]))
                ft = obj.evaluate(trial)
                if ft <= fit[i]:
                    pop[i], fit[i] = trial, ft
            obj.iterate = pop[int(np.argmin(fit))].copy()


class ILSHADE(Optimizer):
    """iL-SHADE: success-history DE with linear population size reduction.

    current-to-pbest/1/bin mutation with an external archive.  ``F`` is drawn
    from Cauchy(M_F, 0.1) and ``CR`` from N(M_CR, 0.1) around one of
    ``memory_size`` memory slots; the last slot is pinned at 0.9.  Memory
    updates average the old entry with the weighted Lehmer mean of successful
    values.  Early in the run ``F`` is capped (0.7 / 0.8 / 0.9 at 25 / 50 /
    75 % of the budget) and ``CR`` floored (0.5 / 0.25 at 25 / 50 %).
    The population shrinks linearly from ``init_factor * d`` to ``min_popsize``
    over ``budget`` evaluations and ``p`` decays from ``p_max`` to ``p_min``.
    """

    name = "ilshade"
    population_based = True

    def __init__(self, init_factor=18, min_popsize=4, memory_size=6, archive_rate=2.6,
                 p_max=0.2, p_min=0.1, init_radius=1.0, budget=1000, seed=0):
        self.init_factor = init_factor
        self.min_popsize = min_popsize
        self.memory_size = memory_size
        self.archive_rate = archive_rate
        self.p_max = p_max
        self.p_min = p_min
        self.init_radius = init_radius
        self.budget = budget
        self.seed = seed

    def _minimize(self, obj, x0, rng):
        d = x0.shape[0]
        max_fe = self.budget
        np_init = max(int(round(self.init_factor * d)), self.min_popsize)
        size = np_init
        lo, hi = -ANGLE_BOUND, ANGLE_BOUND
        start_fe = obj.n_fev

        H = self.memory_size
        mem_f = np.full(H, 0.5)
        mem_cr = np.full(H, 0.8)
        mem_f[-1] = mem_cr[-1] = 0.9
        k = 0
        archive = np.empty((0, d))

        obj.next_iteration()
        pop = init_population(x0, size, self.init_radius, rng)
        fit = obj.evaluate_many(pop)
        while True:
            obj.next_iteration()
            progress = (obj.n_fev - start_fe) / max_fe
            p = self.p_max - (self.p_max - self.p_min) * progress
            n_pbest = max(2, int(round(p * size)))

            r = rng.integers(H, size=size)
            cr = np.clip(rng.normal(mem_cr[r], 0.1), 0.0, 1.0)
            if progress < 0.25:
                cr = np.maximum(cr, 0.5)
            elif progress < 0.5:
                cr = np.maximum(cr, 0.25)
            f = np.empty(size)
            for i in range(size):
                fi = 0.0
                while fi <= 0:
                    fi = mem_f[r[i]] + 0.1 * math.tan(math.pi * (rng.random() - 0.5))
                f[i] = min(fi, 1.0)
            cap = 0.7 if progress < 0.25 else 0.8 if progress < 0.5 else 0.9 if progress < 0.75 else 1.0
            f = np.minimum(f, cap)

            order = np.argsort(fit, kind="stable")
            union = np.vstack([pop, archive]) if len(archive) else pop
            trials = np.empty_like(pop)
            for i in range(size):
                pb = pop[order[rng.integers(n_pbest)]]
                r1 = rng.choice([j for j in range(size) if j != i])
                r2 = i
                while r2 == i or r2 == r1:
                    r2 = int(rng.integers(len(union)))
                v = pop[i] + f[i] * (pb - pop[i]) + f[i] * (pop[r1] - union[r2])
                # midpoint repair towards the parent
                v = np.where(v < lo, (lo + pop[i]) / 2, v)
                v = np.where(v > hi, (hi + pop[i]) / 2, v)
                cross = rng.random(d) < cr[i]
                cross[rng.integers(d)] = True
                trials[i] = np.where(cross, v, pop[i])

            good_f, good_cr, gains = [], [], []
            for i in range(size):
                ft = obj.evaluate(trials[i])
                if ft <= fit[i]:
                    if ft < fit[i]:
                        archive = np.vstack([archive, pop[i]])
                        good_f.append(f[i])
                        good_cr.append(cr[i])
                        gains.append(fit[i] - ft)
                    pop[i], fit[i] = trials[i], ft

            if gains:
                wts = np.asarray(gains) / np.sum(gains)
                sf, scr = np.asarray(good_f), np.asarray(good_cr)
                lehmer_f = (wts @ sf**2) / (wts @ sf)
                lehmer_cr = (wts @ scr**2) / (wts @ scr) if np.any(scr > 0) else 0.0
                if k != H - 1:
                    mem_f[k] = (mem_f[k] + lehmer_f) / 2
                    mem_cr[k] = (mem_cr[k] + lehmer_cr) / 2
                k = (k + 1) % (H - 1) if H > 1 else 0

            obj.iterate = pop[int(np.argmin(fit))].copy()
            progress = (obj.n_fev - start_fe) / max_fe
            new_size = int(round(np_init + (self.min_popsize - np_init) * progress))
            new_size = max(self.min_popsize, min(size, new_size))
            if new_size < size:
                keep = np.argsort(fit, kind="stable")[:new_size]
                pop, fit, size = pop[keep], fit[keep], new_size
            cap_archive = int(round(self.archive_rate * size))
            if len(archive) > cap_archive:
                archive = archive[rng.choice(len(archive), cap_archive, replace=False)]


class CauchyAnnealing(Optimizer):
    """Simulated annealing with Cauchy proposals and geometric cooling.

    Each iteration proposes ``x + step * sqrt(T / t0) * Cauchy`` and accepts
    it by the Metropolis rule at temperature ``T``.  ``T`` shrinks by
    ``cooling`` per iteration; when ``cooling`` is ``None`` it is chosen so
    that ``T`` reaches ``t_final`` at the end of the budget.
    """

    name = "sa_cauchy"
    population_based = False

    def __init__(self, t0=1.0, t_final=1e-8, cooling=None, step=0.3, budget=1000, seed=0):
        self.t0 = t0
        self.t_final = t_final
        self.cooling = cooling
        self.step = step
        self.budget = budget
        self.seed = seed

    def _minimize(self, obj, x, rng):
        cooling = self.cooling or (self.t_final / self.t0) ** (1.0 / max(self.budget, 1))
        obj.next_iteration()
        fx = obj.evaluate(x)
        temp = self.t0
        while True:
            obj.next_iteration()
            scale = self.step * math.sqrt(temp / self.t0)
            cand = clip_angles(x + scale * rng.standard_cauchy(x.shape[0]))
            fc = obj.evaluate(cand)
            delta = fc - fx
            if delta <= 0 or rng.random() < math.exp(-delta / temp):
                x, fx = cand, fc
                obj.iterate = x
            temp *= cooling
