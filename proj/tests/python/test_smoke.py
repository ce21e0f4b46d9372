import math
import os
from pathlib import Path

import pytest

import qtwist

FIXTURES = Path(os.environ.get("QTWIST_FIXTURES", Path(__file__).resolve().parents[2] / "fixtures"))


@pytest.fixture(scope="module")
def curves():
    return {c.label: c for c in qtwist.load_curves(str(FIXTURES / "curves.csv"))}


def test_kronecker_small_values():
    assert qtwist.kronecker(2, 7) == 1
    assert qtwist.kronecker(3, 7) == -1
    assert qtwist.kronecker(-1, 8) == 1
    assert qtwist.kronecker(3, 8) == -1
    with pytest.raises(qtwist.DomainError):
        qtwist.kronecker(0, 0)


def test_primes_and_mellin():
    assert qtwist.primes_upto(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert abs(qtwist.mellin("triangular", 1.0) - 0.5) < 1e-15


def test_ap_values_and_central_values(curves):
    e = curves["11a1"]
    table = qtwist.build_ap_table(e, 2000)
    assert [table.ap_at(p) for p in (2, 3, 5, 7, 13)] == [-2, -1, 1, -2, 4]
    value, tail, kind = qtwist.l_value(e, table)
    assert kind == "L(1)"
    assert abs(value - 0.2538418608559107) < 1e-10
    f = curves["37a1"]
    value, _, kind = qtwist.l_value(f, qtwist.build_ap_table(f, 2000))
    assert kind == "L'(1)"
    assert abs(value - 0.3059997738340523) < 1e-9


def test_prime_sum_paths_agree(curves):
    e = curves["11a1"]
    table = qtwist.build_ap_table(e, 10_000)
    r = qtwist.prime_sum(e, table, D=100, P=10_000)
    assert math.isclose(r["S_twist"], r["S_table"], rel_tol=1e-9)


def test_family_rank_near_half(curves):
    e = curves["11a1"]
    table = qtwist.build_ap_table(e, 20_000)
    avg = qtwist.family_average_rank(e, table, D=100, P=20_000)
    assert 0.0 < avg < 1.0


def test_identities():
    assert qtwist.gauss_sum_check(101) < 1e-10
    assert qtwist.poisson_check(2, 3, 101, 1000.0, 7) < 1e-10


def test_omega_moment_exact():
    moment, _ = qtwist.omega_moment(16, 1)
    assert moment == sum(len({p for p in (2, 3, 5, 7, 11, 13) if n % p == 0}) for n in range(1, 17))


def test_errors_map_to_python_exceptions(curves):
    e = curves["11a1"]
    table = qtwist.build_ap_table(e, 100)
    with pytest.raises(qtwist.DomainError):
        qtwist.prime_sum(e, table, D=10, P=1000)
    with pytest.raises(qtwist.FixtureError):
        qtwist.EllipticCurve("bad", 0, 0, 1, 1)


def test_cli_round_trip(tmp_path):
    code, out, err = qtwist.run(["gauss-check", "p_max=30"])
    assert code == 0, err
    lines = out.strip().splitlines()
    assert lines[0] == "p,max_deviation"
    assert len(lines) == 1 + 9  # odd primes up to 29
    code, _, err = qtwist.run(["no-such-command"])
    assert code == 2
    assert "usage" in err
