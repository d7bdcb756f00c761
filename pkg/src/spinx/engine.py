"""Pole-set provider: computes, caches, and prefetches Siegert spectra.

All observable layers pull gamma = 0 pole sets from here so that each
(state, j, l, mu) channel is diagonalized exactly once per process, and
optionally persisted to a JSON disk cache keyed by a content hash of the
potential tables plus the discretization parameters.  Channel solves are
independent; the prefetch pool runs them concurrently with the BLAS
pinned to one thread inside each solve, which keeps results identical
for any pool width.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import os
from pathlib import Path

from spinx.potential import Dataset, channel_potential
from spinx.siegert import PoleSet, SiegertSpec, solve_poles
from spinx.units import mu_khe

__all__ = ["PoleEngine", "default_thread_count"]

THREADS_ENV_VAR = "SPINX_THREADS"


def default_thread_count() -> int:
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


class PoleEngine:
    """Per-dataset pole cache with deterministic parallel prefetch."""

    def __init__(
        self,
        dataset: Dataset,
        spec: SiegertSpec | None = None,
        cache_dir: str | Path | None = None,
        threads: int | None = None,
        mu: float | None = None,
        allow_compute: bool = True,
    ):
        self.dataset = dataset
        self.spec = spec or SiegertSpec(a=dataset.truncation_radius)
        if self.spec.a != dataset.truncation_radius:
            raise ValueError("spec.a must equal the dataset truncation radius")
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.threads = threads if threads else default_thread_count()
        self.mu_default = mu if mu is not None else mu_khe()
        self.allow_compute = allow_compute
        self._memory: dict[str, PoleSet] = {}

    # -- keys ---------------------------------------------------------------

    def _key(self, state: str, j: int, l: int, mu: float) -> str:
        raw = "|".join(
            [
                self.dataset.source_digest,
                state,
                str(j),
                str(l),
                f"{mu:.12e}",
                str(self.spec.n_basis),
                f"{self.spec.a:.6f}",
                self.spec.boundary,
            ]
        )
        return hashlib.sha256(raw.encode()).hexdigest()

    # -- access -------------------------------------------------------------

    def poles(self, state: str, j: int, l: int, mu: float | None = None) -> PoleSet:
        """The gamma = 0 pole set of one channel (cached)."""
        mu = mu if mu is not None else self.mu_default
        key = self._key(state, j, l, mu)
        hit = self._memory.get(key)
        if hit is not None:
            return hit
        if self.cache_dir:
            path = self.cache_dir / f"{key}.json"
            if path.exists():
                ps = PoleSet.from_json(path.read_text())
                self._memory[key] = ps
                return ps
        if not self.allow_compute:
            raise LookupError(
                f"pole set for {state} j={j} l={l} not cached and computation disabled"
            )
        ps = self._solve(state, j, l, mu)
        self._memory[key] = ps
        if self.cache_dir:
            (self.cache_dir / f"{key}.json").write_text(ps.to_json())
        return ps

    def _solve(self, state: str, j: int, l: int, mu: float) -> PoleSet:
        cp = channel_potential(self.dataset.state(state), j=j, l=l, mu=mu)
        return solve_poles(cp, self.spec)

    def prefetch(
        self,
        state: str,
        js: tuple[int, ...] = (0, 1),
        ls: range | list | None = None,
        mu: float | None = None,
    ) -> None:
        """Solve a block of channels concurrently and fill the cache."""
        mu = mu if mu is not None else self.mu_default
        ls = list(ls) if ls is not None else list(range(0, 61))
        todo = [
            (j, l)
            for j in js
            for l in ls
            if self._key(state, j, l, mu) not in self._memory
        ]
        todo = [
            (j, l)
            for (j, l) in todo
            if not (self.cache_dir and (self.cache_dir / f"{self._key(state, j, l, mu)}.json").exists())
        ]
        if not todo:
            return
        if self.threads <= 1 or len(todo) == 1:
            for j, l in todo:
                self.poles(state, j, l, mu)
            return
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.threads) as pool:
            futures = {pool.submit(self._solve, state, j, l, mu): (j, l) for j, l in todo}
            for fut in concurrent.futures.as_completed(futures):
                j, l = futures[fut]
                ps = fut.result()
                key = self._key(state, j, l, mu)
                self._memory[key] = ps
                if self.cache_dir:
                    (self.cache_dir / f"{key}.json").write_text(ps.to_json())
