"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

import time
from contextlib import contextmanager

RESULTS: dict[int, str] = {}


@contextmanager
def criterion(number: int, title: str, budget_s: float):
    """Time a criterion; record PASS only if its body passes within ``budget_s``."""
    start = time.perf_counter()
    notes: list[str] = []
    try:
        yield notes
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        RESULTS[number] = f"criterion {number} FAIL  {title} ({elapsed:.2f}s) {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        print(RESULTS[number])
        raise
    elapsed = time.perf_counter() - start
    detail = "; ".join(notes)
    if elapsed > budget_s:
        RESULTS[number] = f"criterion {number} FAIL  {title} ({elapsed:.2f}s > {budget_s:g}s budget) {detail}"
        print(RESULTS[number])
        raise AssertionError(f"criterion {number} took {elapsed:.2f}s, budget {budget_s:g}s")
    RESULTS[number] = f"criterion {number} PASS  {title} ({elapsed:.2f}s) {detail}"
    print(RESULTS[number])
