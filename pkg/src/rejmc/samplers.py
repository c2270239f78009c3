"""Rejection samplers over bounded boxes.

srmc_sample draws proposals uniformly on the support box against a constant
envelope c (accept when f(x) > c*u, u ~ U[0,1)); grmc_sample draws from a
piecewise-uniform proposal and accepts when f(x)/h_cell >= u. The comparison
direction differs on purpose: each mirrors its algorithm as printed, and the
boundary event has probability zero.

Requested sample counts are split into chunks of 4096 acceptances, each run
on substream(seed, chunk_index) and merged in chunk order, so results are a
pure function of (inputs, seed) no matter how many worker threads run. The
worker count comes from the RMC_THREADS environment variable when not passed
explicitly.

A run that draws far more proposals than its running acceptance rate
justifies fails loudly with BudgetExhausted instead of looping forever.
"""
from __future__ import annotations

import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .model import Box, PiecewiseUniformProposal, RunMetadata, SampleBatch, ScalarField, TargetSpec
from .randomness import RandomStream, make_stream, substream

__all__ = [
    "estimate_bound",
    "estimate_bound_argmax",
    "srmc_sample",
    "grmc_sample",
    "BudgetExhausted",
    "proposal_budget",
    "resolve_workers",
    "CHUNK_ACCEPTS",
    "PROGRESS_INTERVAL",
]

CHUNK_ACCEPTS = 4096
PROGRESS_INTERVAL = 1 << 16
_MAX_BATCH = 1 << 17
_MAX_GRID_TOTAL = 1 << 22

ProgressCallback = Callable[[int, int], None]


class BudgetExhausted(RuntimeError):
    """Proposal budget exceeded: grossly loose envelope or near-zero density."""

    def __init__(self, proposals_drawn: int, accepted: int, requested_n: int):
        self.proposals_drawn = proposals_drawn
        self.accepted = accepted
        self.requested_n = requested_n
        self.acceptance_rate = accepted / proposals_drawn if proposals_drawn else 0.0
        super().__init__(
            f"proposal budget exhausted after {proposals_drawn} proposals with "
            f"{accepted}/{requested_n} accepted (running acceptance rate "
            f"{self.acceptance_rate:.3g})"
        )


def proposal_budget(n: int, acceptance_rate: float) -> float:
    """Proposals allowed before giving up: max(1e4, 1000*n/max(rate, 1e-6))."""
    return max(10_000.0, 1000.0 * n / max(acceptance_rate, 1e-6))


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("RMC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def estimate_bound(
    field: ScalarField, box: Box, grid_per_dim: int, safety: float = 1.0
) -> float:
    """safety * max of the field over a regular grid including box corners."""
    value, _ = estimate_bound_argmax(field, box, grid_per_dim, safety)
    return value


def estimate_bound_argmax(
    field: ScalarField, box: Box, grid_per_dim: int, safety: float = 1.0
) -> tuple[float, np.ndarray]:
    """As estimate_bound, also returning the grid point of the maximum."""
    if grid_per_dim < 2:
        raise ValueError("grid_per_dim must be at least 2")
    if safety < 1.0:
        raise ValueError("safety factor must be at least 1")
    if grid_per_dim**box.dims > _MAX_GRID_TOTAL:
        raise ValueError(
            f"grid of {grid_per_dim}^{box.dims} points exceeds the {_MAX_GRID_TOTAL} limit"
        )
    axes = [np.linspace(lo, hi, grid_per_dim) for lo, hi in box.bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = field(pts)
    k = int(np.argmax(vals))
    return safety * float(vals[k]), pts[k]


class _Progress:
    """Aggregated proposal/acceptance counters shared by all chunks."""

    def __init__(self, callback: ProgressCallback | None):
        self.callback = callback
        self.lock = threading.Lock()
        self.proposals = 0
        self.accepted = 0
        self._next_mark = PROGRESS_INTERVAL

    def add(self, proposals: int, accepted: int) -> None:
        # the callback fires under the lock so observed counts never go
        # backwards when chunks run on several threads
        with self.lock:
            self.proposals += proposals
            self.accepted += accepted
            if self.callback is not None and self.proposals >= self._next_mark:
                self._next_mark = (self.proposals // PROGRESS_INTERVAL + 1) * PROGRESS_INTERVAL
                self.callback(self.proposals, self.accepted)

    def totals(self) -> tuple[int, int]:
        with self.lock:
            return self.proposals, self.accepted

    def fire_final(self) -> tuple[int, int]:
        snapshot = self.totals()
        if self.callback is not None:
            self.callback(*snapshot)
        return snapshot


class _ChunkBudgetExceeded(Exception):
    pass


def _next_batch_size(target: int, accepted: int, proposed: int) -> int:
    if accepted == 0:
        return int(min(max(4096, proposed), _MAX_BATCH))
    need = target - accepted
    rate = accepted / proposed
    return int(min(max(2048, math.ceil(1.2 * need / rate)), _MAX_BATCH))


def _run_chunk(
    stream: RandomStream,
    chunk_n: int,
    dims: int,
    propose_and_test,
    progress: _Progress,
    max_proposals: int | None,
) -> tuple[np.ndarray, int]:
    """Sequential rejection loop for one chunk, batched for speed.

    ``propose_and_test(stream, batch)`` returns (points, accept_mask). The
    final batch is trimmed at the accepting proposal that completes the
    chunk, so proposal counts match the plain sequential loop exactly.
    """
    taken: list[np.ndarray] = []
    accepted = 0
    proposed = 0
    while accepted < chunk_n:
        batch = _next_batch_size(chunk_n, accepted, proposed)
        pts, ok = propose_and_test(stream, batch)
        hits = np.nonzero(ok)[0]
        need = chunk_n - accepted
        if hits.size >= need:
            last = int(hits[need - 1])
            taken.append(pts[hits[:need]])
            progress.add(last + 1, need)
            proposed += last + 1
            accepted = chunk_n
            break
        taken.append(pts[hits])
        accepted += hits.size
        proposed += batch
        progress.add(batch, hits.size)
        budget = proposal_budget(chunk_n, accepted / proposed)
        if max_proposals is not None:
            budget = min(budget, float(max_proposals))
        if proposed > budget:
            raise _ChunkBudgetExceeded()
    points = np.concatenate(taken, axis=0) if taken else np.empty((0, dims))
    return points, proposed


def _chunk_plan(n: int) -> list[int]:
    plan = [CHUNK_ACCEPTS] * (n // CHUNK_ACCEPTS)
    if n % CHUNK_ACCEPTS:
        plan.append(n % CHUNK_ACCEPTS)
    return plan


def _run_chunked(
    n: int,
    dims: int,
    stream: RandomStream,
    propose_and_test,
    bound_for_meta: float,
    progress: ProgressCallback | None,
    workers: int | None,
    max_proposals: int | None,
) -> SampleBatch:
    if n < 1:
        raise ValueError("requested sample count must be at least 1")
    t0 = time.perf_counter()
    run_seed = stream.state
    stream.next_u64()  # consecutive runs on one stream must differ
    plan = _chunk_plan(n)
    tracker = _Progress(progress)
    nworkers = resolve_workers(workers)

    def work(i: int) -> tuple[np.ndarray, int]:
        return _run_chunk(
            substream(run_seed, i), plan[i], dims, propose_and_test, tracker, max_proposals
        )

    results: list[tuple[np.ndarray, int] | None] = [None] * len(plan)
    failed = False
    if nworkers > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=min(nworkers, len(plan))) as pool:
            futures = [pool.submit(work, i) for i in range(len(plan))]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except _ChunkBudgetExceeded:
                    failed = True
    else:
        for i in range(len(plan)):
            try:
                results[i] = work(i)
            except _ChunkBudgetExceeded:
                failed = True
                break
    if failed:
        proposals, accepted = tracker.fire_final()
        raise BudgetExhausted(proposals, accepted, n)

    points = np.concatenate([r[0] for r in results], axis=0)
    proposals = sum(r[1] for r in results)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    meta = RunMetadata(
        seed=run_seed,
        requested_n=n,
        proposals_drawn=proposals,
        accepted=n,
        acceptance_rate=n / proposals,
        wall_time_ms=elapsed_ms,
        bound_c=bound_for_meta,
    )
    return SampleBatch(dims=dims, points=points, meta=meta)


def _as_stream(stream_or_seed: RandomStream | int) -> RandomStream:
    if isinstance(stream_or_seed, RandomStream):
        return stream_or_seed
    return make_stream(stream_or_seed)


def srmc_sample(
    target: TargetSpec,
    n: int,
    stream: RandomStream | int,
    *,
    progress: ProgressCallback | None = None,
    workers: int | None = None,
    max_proposals: int | None = None,
) -> SampleBatch:
    """Draw n samples from the target via uniform proposals on its box.

    Per proposal: x uniform on the box (dims draws), y = bound_c * u (one
    draw); accept x iff f(x) > y. Accepted points are returned in acceptance
    order. Raises BudgetExhausted when the proposal budget runs out;
    ``max_proposals`` adds a harder per-chunk cap.
    """
    stream = _as_stream(stream)
    box = target.support
    d = box.dims
    lower, widths = box.lower, box.widths
    field, c = target.field, target.bound_c

    def propose_and_test(local: RandomStream, batch: int):
        u = local.uniform01_block(batch * (d + 1)).reshape(batch, d + 1)
        pts = lower + u[:, :d] * widths
        y = c * u[:, d]
        return pts, field(pts) > y

    return _run_chunked(n, d, stream, propose_and_test, c, progress, workers, max_proposals)


def grmc_sample(
    field: ScalarField,
    proposal: PiecewiseUniformProposal,
    n: int,
    stream: RandomStream | int,
    *,
    progress: ProgressCallback | None = None,
    workers: int | None = None,
    max_proposals: int | None = None,
) -> SampleBatch:
    """Draw n samples using a piecewise-uniform proposal.

    Per proposal: a cell is selected proportionally to its mass (inverse CDF
    over the cumulative mass table; a one-cell partition consumes no draw and
    the algorithm degenerates to srmc_sample), x is uniform within the cell,
    and x is accepted iff f(x)/h_cell >= u. The metadata's bound_c records
    the effective constant total_mass/volume.
    """
    stream = _as_stream(stream)
    box = proposal.box
    d = box.dims
    single_cell = proposal.cell_count == 1
    cell_widths = proposal.cell_widths
    cum = proposal.cumulative
    positive = proposal.positive_cells
    heights_flat = proposal.heights.ravel()

    if single_cell:
        h0 = float(heights_flat[0])
        lower, widths = box.lower, box.widths

        def propose_and_test(local: RandomStream, batch: int):
            u = local.uniform01_block(batch * (d + 1)).reshape(batch, d + 1)
            pts = lower + u[:, :d] * widths
            return pts, field(pts) / h0 >= u[:, d]

    else:

        def propose_and_test(local: RandomStream, batch: int):
            u = local.uniform01_block(batch * (d + 2)).reshape(batch, d + 2)
            cells = positive[np.searchsorted(cum, u[:, 0], side="right")]
            lows = proposal.cell_lower(cells)
            pts = lows + u[:, 1 : d + 1] * cell_widths
            return pts, field(pts) / heights_flat[cells] >= u[:, d + 1]

    effective_c = proposal.total_mass / box.volume
    return _run_chunked(
        n, d, stream, propose_and_test, effective_c, progress, workers, max_proposals
    )
