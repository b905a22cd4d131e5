import csv
import io

from listlab.graph import complete_multipartite
from listlab.solver import chi_list_exact
from listlab.sweep import ohba_sweep, partitions, rows_to_csv


def test_partition_counts():
    assert [len(list(partitions(n))) for n in range(1, 9)] == [1, 2, 3, 5, 7, 11, 15, 22]
    assert list(partitions(4)) == [(1, 1, 1, 1), (2, 1, 1), (3, 1), (2, 2), (4,)]
    assert all(list(p) == sorted(p, reverse=True) for p in partitions(7))


def test_small_sweep_is_all_equal():
    rows = ohba_sweep(5)
    assert rows and all(r.verdict == "equal" for r in rows)
    assert all(r.n <= 2 * r.chi + 1 for r in rows)


def test_known_rows():
    rows = {r.parts: r for r in ohba_sweep(6, min_n=6)}
    assert rows[(2, 2, 2)].chi_l == 3
    # two parts on six vertices lie outside the conjecture range
    assert (3, 3) not in rows
    full = {r.parts: r for r in ohba_sweep(6, min_n=6, conjecture_only=False)}
    assert full[(3, 3)].chi_l == 3 and full[(3, 3)].verdict == "greater"
    assert full[(2, 2, 2)].verdict == "equal"


def test_eight_vertex_examples():
    assert chi_list_exact(complete_multipartite([2, 2, 4])[0]) == 3
    assert chi_list_exact(complete_multipartite([4, 4])[0]) == 3


def test_budget_marks_rows_skipped():
    rows = ohba_sweep(6, min_n=6, max_assignments=5)
    assert any(r.verdict == "skipped" and r.chi_l is None and r.note for r in rows)


def test_csv():
    rows = ohba_sweep(3)
    text = rows_to_csv(rows)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert len(parsed) == len(rows)
    assert parsed[0]["parts"] == "1" and parsed[0]["verdict"] == "equal"
    assert set(parsed[0]) == {"parts", "n", "chi", "chi_l", "verdict", "seconds", "note"}


def test_csv_without_timing():
    text = rows_to_csv(ohba_sweep(2), timing=False)
    assert text.splitlines()[0] == "parts,n,chi,chi_l,verdict,note"
    assert text == rows_to_csv(ohba_sweep(2), timing=False)
