"""Run the approach x precision matrix over benchmark cases."""
from __future__ import annotations

import csv
import json
import multiprocessing as mp
import os
import time
from pathlib import Path

from ..explorer import IncompleteGraph, verify, verify_1ph
from ..machine import abstract
from .cases import BenchCase
from .score import COLUMNS, RunMetrics, score

TIMEOUT = 430.0
MATRIX = (("2PH", "H"), ("2PH", "L"), ("1PH", "H"), ("1PH", "L"))


def run_case(case: BenchCase, approach: str, precision: str, node_ceiling: int | None = None) -> RunMetrics:
    """One analysis run, scored.  A ceiling breach records the ceiling as the state count."""
    kw = {} if node_ceiling is None else {"node_ceiling": node_ceiling}
    cfg = abstract(precision, **kw)
    fn = verify if approach == "2PH" else verify_1ph
    t0 = time.perf_counter()
    try:
        res = fn(case.program, case.policy.meta, cfg, policy_id=case.policy.id,
                 meta_file=case.policy.file)
    except IncompleteGraph as exc:
        return RunMetrics(case.key, approach, precision, "ceiling", states=cfg.node_ceiling,
                          wall_time=time.perf_counter() - t0, message=str(exc))
    except Exception as exc:        # recorded, the suite continues
        return RunMetrics(case.key, approach, precision, "error",
                          wall_time=time.perf_counter() - t0, message=f"{type(exc).__name__}: {exc}")
    m = score(res, case, approach, precision)
    m.states = res.states
    m.wall_time = time.perf_counter() - t0
    if getattr(res, "errors", None):
        m.message = f"policy code errors at {len(res.errors)} nodes"
    return m


def _worker(conn, case, approach, precision, node_ceiling):
    try:
        conn.send(run_case(case, approach, precision, node_ceiling))
    finally:
        conn.close()


def run_suite(cases, matrix=MATRIX, *, timeout: float = TIMEOUT, workers: int | None = None,
              node_ceiling: int | None = None, progress=None) -> list[RunMetrics]:
    """Metrics for every case under every (approach, precision) pair.

    Runs execute in child processes, at most ``workers`` at a time; a run
    exceeding ``timeout`` seconds is killed and recorded with status timeout.
    Rows come back in case order, then matrix order.
    """
    jobs = [(c, a, p) for c in cases for a, p in matrix]
    workers = max(1, workers or min(len(jobs), os.cpu_count() or 1))
    try:
        ctx = mp.get_context("fork")
    except ValueError:
        ctx = mp.get_context()
    results: dict[int, RunMetrics] = {}
    pending = list(range(len(jobs)))
    live = {}   # index -> (process, conn, start)
    while pending or live:
        while pending and len(live) < workers:
            i = pending.pop(0)
            c, a, p = jobs[i]
            recv, send = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_worker, args=(send, c, a, p, node_ceiling), daemon=True)
            proc.start()
            send.close()
            live[i] = (proc, recv, time.monotonic())
        mp.connection.wait([r for _, r, _ in live.values()], timeout=0.2)
        for i in list(live):
            proc, recv, start = live[i]
            c, a, p = jobs[i]
            m = None
            if recv.poll():
                try:
                    m = recv.recv()
                except EOFError:
                    m = RunMetrics(c.key, a, p, "error", message="worker exited without a result")
            elif not proc.is_alive():
                m = RunMetrics(c.key, a, p, "error", message=f"worker exited with code {proc.exitcode}")
            elif time.monotonic() - start > timeout:
                proc.kill()
                m = RunMetrics(c.key, a, p, "timeout", message=f"no result within {timeout:g} s")
            if m is None:
                continue
            proc.join()
            recv.close()
            del live[i]
            results[i] = m
            if progress is not None:
                progress(m)
    return [results[i] for i in range(len(jobs))]


def write_metrics(rows: list[RunMetrics], out) -> dict:
    """metrics.json, metrics.csv, states.svg and times.svg under ``out``."""
    from .plots import plot_states, plot_times

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "metrics.json",
        "csv": out / "metrics.csv",
        "states": out / "states.svg",
        "times": out / "times.svg",
    }
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump([r.to_json() for r in rows], fh, indent=2)
        fh.write("\n")
    with open(paths["csv"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow(r.cells())
    plot_states(rows, paths["states"])
    plot_times(rows, paths["times"])
    return paths
