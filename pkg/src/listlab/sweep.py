"""Exhaustive check of choosability on small complete multipartite graphs."""

from __future__ import annotations

import csv
import io
import time
from collections.abc import Iterator
from dataclasses import dataclass

from .errors import ResourceLimit
from .graph import complete_multipartite
from .solver import chi_list_exact


def partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Partitions of ``n`` as non-increasing tuples, in colexicographic order."""
    out: list[tuple[int, ...]] = []

    def rec(rest: int, cap: int, prefix: tuple[int, ...]) -> None:
        if rest == 0:
            out.append(prefix)
            return
        for s in range(min(rest, cap), 0, -1):
            rec(rest - s, s, prefix + (s,))

    rec(n, n, ())
    yield from sorted(out, key=lambda p: tuple(reversed(p)))


@dataclass
class SweepRow:
    parts: tuple[int, ...]
    n: int
    chi: int
    chi_l: int | None
    verdict: str  # "equal", "greater" or "skipped"
    seconds: float = 0.0
    note: str = ""

    def to_dict(self, *, timing: bool = True) -> dict:
        out = {"parts": list(self.parts), "n": self.n, "chi": self.chi, "chi_l": self.chi_l, "verdict": self.verdict, "note": self.note}
        if timing:
            out["seconds"] = self.seconds
        return out


def ohba_sweep(max_n: int, *, conjecture_only: bool = True, min_n: int = 1, **budget) -> list[SweepRow]:
    """Compute the list-chromatic number of every part-size vector with ``n <= max_n``.

    With ``conjecture_only`` only vectors with ``n <= 2 chi + 1`` are
    included. An entry that exhausts its budget is marked skipped.
    """
    rows = []
    for n in range(min_n, max_n + 1):
        for sizes in partitions(n):
            chi = len(sizes)
            if conjecture_only and n > 2 * chi + 1:
                continue
            g, _ = complete_multipartite(list(sizes))
            start = time.perf_counter()
            try:
                value = chi_list_exact(g, **budget)
            except ResourceLimit as exc:
                rows.append(SweepRow(sizes, n, chi, None, "skipped", time.perf_counter() - start, str(exc)))
                continue
            verdict = "equal" if value == chi else "greater"
            rows.append(SweepRow(sizes, n, chi, value, verdict, time.perf_counter() - start))
    return rows


CSV_FIELDS = ["parts", "n", "chi", "chi_l", "verdict", "seconds", "note"]


def rows_to_csv(rows: list[SweepRow], *, timing: bool = True) -> str:
    fields = CSV_FIELDS if timing else [f for f in CSV_FIELDS if f != "seconds"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        d = r.to_dict(timing=timing)
        d["parts"] = "-".join(map(str, r.parts))
        if timing:
            d["seconds"] = f"{r.seconds:.4f}"
        writer.writerow(d)
    return buf.getvalue()
