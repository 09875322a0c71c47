"""Acceptance suite: one property check per criterion, with fixed sample counts.

Run under pytest (``pytest tests/test_acceptance.py``) or directly
(``python tests/test_acceptance.py``). Each criterion prints one line
``CRITERION n: PASS|FAIL <detail>``.
"""

import io
import math
import sys
import time
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from renyilp import channels as ch  # noqa: E402
from renyilp.algebra import PositiveFunctional, functional_direct_sum, schatten_norm  # noqa: E402
from renyilp.cli import main as cli_main  # noqa: E402
from renyilp.divergences import (alt_bounds, max_relative, relative_entropy,  # noqa: E402
                                 sandwiched_renyi, standard_renyi)
from renyilp.dpi_sufficiency import d1_monotonicity_check, dpi_report, sufficiency_test  # noqa: E402
from renyilp.ensembles import (make_rng, random_channel, random_commuting_pair,  # noqa: E402
                               random_element, random_full_rank_state, random_hermitian,
                               random_state, random_unitary)
from renyilp.lp_kosaki import (KosakiElement, clarkson_sides, duality_map_T, embed_ip,  # noqa: E402
                               interpolation_path, jordan_decompose, kosaki_norm, pairing,
                               pixu_sides)
from renyilp.selftest import dominated  # noqa: E402

ALPHAS = (1.2, 1.5, 2.0, 3.0, 5.0)
SEED = 424242


def _rng(n):
    return make_rng(SEED + n)


def _dim(rng, hi=5):
    return int(rng.integers(2, hi))


def _pair(rng, d=None):
    d = d or _dim(rng)
    return random_state(rng, (d,)), random_state(rng, (d,))


def _q(r, s, a):
    return math.exp((a - 1) * float(sandwiched_renyi(r, s, a)))


# -- criteria ------------------------------------------------------------------

def criterion_1():
    rng, bad, worst = _rng(1), 0, 0.0
    t0 = time.perf_counter()
    for _ in range(200):
        d = _dim(rng, 6)
        k, s = random_element(rng, (d,)), random_state(rng, (d,))
        kd = k.dense()
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            ref = oracles.schatten(kd, p)
            err = abs(embed_ip(k, s, p).norm() - ref) / max(1.0, ref)
            worst = max(worst, err)
            bad += err > 1e-9
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 5, f"200 samples x 5 exponents, max rel err {worst:.2e}, {dt:.1f}s"


def criterion_2():
    rng, bad = _rng(2), 0
    t0 = time.perf_counter()
    for _ in range(500):
        r, s = _pair(rng)
        for a in ALPHAS:
            low = float(standard_renyi(r, s, 2 - 1 / a))
            mid = float(sandwiched_renyi(r, s, a))
            high = float(standard_renyi(r, s, a))
            bad += not (low - 1e-8 <= mid <= high + 1e-8)
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 30, f"500 pairs x 5 orders, {bad} violations, {dt:.1f}s"


def criterion_3():
    rng, worst = _rng(3), 0.0
    for _ in range(200):
        r, s, p, q = random_commuting_pair(rng, _dim(rng, 7))
        for a in ALPHAS:
            ref = oracles.classical_renyi(p, q, a)
            worst = max(worst, abs(float(sandwiched_renyi(r, s, a)) - ref),
                        abs(float(standard_renyi(r, s, a)) - ref))
    return worst <= 1e-9, f"200 commuting pairs, max abs err {worst:.2e}"


def criterion_4():
    rng, worst_inf, worst_one, non_monotone = _rng(4), 0.0, 0.0, 0
    for _ in range(50):
        d = _dim(rng)
        r, s = random_full_rank_state(rng, (d,)), random_full_rank_state(rng, (d,))
        worst_inf = max(worst_inf, abs(float(sandwiched_renyi(r, s, 2.0 ** 12))
                                       - float(max_relative(r, s))))
        vals = [float(sandwiched_renyi(r, s, 1 + 2.0 ** -k)) for k in range(1, 11)]
        non_monotone += any(b > a + 1e-12 for a, b in zip(vals, vals[1:]))
        worst_one = max(worst_one, abs(float(sandwiched_renyi(r, s, 1.001))
                                       - float(relative_entropy(r, s))))
    ok = worst_inf <= 1e-3 and worst_one <= 1e-2 and non_monotone == 0
    return ok, (f"50 pairs, |D(2^12)-Dmax| <= {worst_inf:.2e}, |D(1.001)-D1| <= "
                f"{worst_one:.2e}, {non_monotone} non-monotone")


def criterion_5():
    rng, bad = _rng(5), 0
    t0 = time.perf_counter()
    for _ in range(500):
        d = _dim(rng)
        phi = random_channel(rng, d, _dim(rng))
        r, s = _pair(rng, d)
        bad += bool(dpi_report(phi, r, s, float(rng.choice(ALPHAS))).violations())
    bad_t = 0
    for _ in range(100):
        d = _dim(rng)
        r, s = _pair(rng, d)
        a = float(rng.choice(ALPHAS))
        t = ch.transpose((d,))
        composed = ch.compose(random_channel(rng, d, _dim(rng)), t)
        for phi in (t, composed):
            bad_t += dpi_report(phi, r, s, a).gap < -1e-8
        d_in, d_out = d1_monotonicity_check(composed, r, s)
        bad_t += d_out > d_in + 1e-8
    dt = time.perf_counter() - t0
    return bad == 0 and bad_t == 0 and dt < 120, (
        f"500 CPTP instances {bad} violations, 100 transpose instances {bad_t} violations, "
        f"{dt:.1f}s")


def _sufficient_instance(rng, i):
    kind = i % 3
    if kind == 0:
        d = _dim(rng)
        r, s = _pair(rng, d)
        return ch.unitary_conjugation(random_unitary(rng, d)), r, s
    if kind == 1:
        # states diagonal in the pinching basis are left alone by the pinching
        d = _dim(rng)
        u = random_unitary(rng, d)
        r, s = (PositiveFunctional.from_array(u @ np.diag(rng.dirichlet(np.ones(d))) @ u.conj().T)
                for _ in range(2))
        return ch.pinching(u), r, s
    d1, d2 = 2, _dim(rng, 4)
    r1, s1 = _pair(rng, d1)
    tau = random_state(rng, (d2,)).element.dense()
    r = PositiveFunctional.from_array(np.kron(r1.element.dense(), tau))
    s = PositiveFunctional.from_array(np.kron(s1.element.dense(), tau))
    return ch.partial_trace((d1, d2)), r, s


def criterion_6():
    rng, bad_a, bad_b, crossovers = _rng(6), 0, 0, 0
    for i in range(50):
        phi, r, s = _sufficient_instance(rng, i)
        v = sufficiency_test(phi, r, s, alpha=2.0)
        ok = (v.evidence.gap <= 1e-8 and v.evidence.recovery_defect <= 1e-6
              and v.sigma_recovery_defect <= 1e-6)
        bad_a += not ok
        crossovers += not v.sufficient
    found = 0
    while found < 50:
        d = _dim(rng)
        phi = random_channel(rng, d, 2)
        r, s = _pair(rng, d)
        v = sufficiency_test(phi, r, s, alpha=2.0)
        if v.evidence.gap <= 1e-3:
            continue
        found += 1
        bad_b += v.evidence.recovery_defect <= 1e-4
        crossovers += v.sufficient
    ok = bad_a == 0 and bad_b == 0 and crossovers == 0
    return ok, f"50 sufficient ({bad_a} bad), 50 insufficient ({bad_b} bad), {crossovers} crossovers"


def criterion_7():
    rng = _rng(7)
    fails = dict.fromkeys(("clarkson", "pisier_xu", "jordan", "duality", "strip", "pointwise"), 0)
    for _ in range(200):
        d = _dim(rng)
        s = random_state(rng, (d,))
        h = embed_ip(random_element(rng, (d,)), s, 1).h
        k = embed_ip(random_element(rng, (d,)), s, 1).h
        for p in (1.5, 2.0, 3.0):
            fails["clarkson"] += not clarkson_sides(h, k, s, p).holds(1e-8)
            fails["pisier_xu"] += not pixu_sides(h, k, s, p).holds(1e-8)
            x = embed_ip(random_hermitian(rng, (d,)), s, p)
            plus, minus = jordan_decompose(x)
            lhs = x.norm() ** p
            fails["jordan"] += abs(lhs - plus.norm() ** p - minus.norm() ** p) > 1e-8 * max(1, lhs)
            y = embed_ip(random_element(rng, (d,)), s, p)
            t = duality_map_T(y)
            fails["duality"] += (abs(t.norm() - 1) > 1e-8
                                 or abs(pairing(t, y) - y.norm()) > 1e-8 * max(1, y.norm()))
    for _ in range(20):
        d = _dim(rng)
        s = random_state(rng, (d,))
        y = embed_ip(random_element(rng, (d,)), s, float(rng.choice((1.5, 2.0, 3.0))))
        y = y * (1 / y.norm())
        f = interpolation_path(y)
        for x in np.linspace(0, 1, 5):
            vals = [f.norm_at(complex(x, t)) for t in np.linspace(-2, 2, 5)]
            fails["strip"] += max(abs(v - 1.0) for v in vals) > 1e-7
        g = interpolation_path(duality_map_T(y))
        for x in (0.2, 0.4, 0.6, 0.8):
            lhs = duality_map_T(KosakiElement(f(x), s, 1 / x)).h
            fails["pointwise"] += (lhs - g(1 - x)).max_abs() > 1e-7
    bad = sum(fails.values())
    return bad == 0, "failures " + ", ".join(f"{k}={v}" for k, v in fails.items())


def criterion_8():
    rng, bad = _rng(8), 0
    for _ in range(200):
        r, s = _pair(rng)
        for p in (1.5, 2.0, 3.0):
            low, high = alt_bounds(r, s, p)
            v = kosaki_norm(r.element, s, p) ** p
            bad += not (low - 1e-8 * max(1, v) <= v <= high + 1e-8 * max(1, high))
    return bad == 0, f"200 pairs x 3 exponents, {bad} violations"


def criterion_9():
    rng = _rng(9)
    fails = dict.fromkeys(("scaling", "direct_sum", "convexity", "order"), 0)
    for _ in range(100):
        r, s = _pair(rng)
        a = float(rng.choice(ALPHAS))
        base = float(sandwiched_renyi(r, s, a))
        mu, lam = rng.uniform(0.1, 5.0, size=2)
        got = float(sandwiched_renyi(r.scaled(mu), s.scaled(lam), a))
        fails["scaling"] += abs(got - base - a / (a - 1) * math.log(mu) + math.log(lam)) > 1e-9

        d1, d2 = _dim(rng), _dim(rng)
        w = rng.uniform(0.1, 1.0, size=4)
        r1, s1 = (random_state(rng, (d1,)).scaled(w[i]) for i in (0, 1))
        r2, s2 = (random_state(rng, (d2,)).scaled(w[i]) for i in (2, 3))
        lhs = _q(functional_direct_sum(r1, r2), functional_direct_sum(s1, s2), a)
        rhs = _q(r1, s1, a) + _q(r2, s2, a)
        fails["direct_sum"] += abs(lhs - rhs) > 1e-8 * rhs

        d = _dim(rng)
        (r1, s1), (r2, s2) = _pair(rng, d), _pair(rng, d)
        t = float(rng.uniform())
        mix = _q(r1.scaled(t) + r2.scaled(1 - t), s1.scaled(t) + s2.scaled(1 - t), a)
        fails["convexity"] += mix > t * _q(r1, s1, a) + (1 - t) * _q(r2, s2, a) + 1e-8

        r0, s0 = dominated(rng, r), dominated(rng, s)
        fails["order"] += (float(sandwiched_renyi(r0, s, a)) > base + 1e-9
                           or float(sandwiched_renyi(r, s0, a)) < base - 1e-9)
    bad = sum(fails.values())
    return bad == 0, "100 instances each, failures " + ", ".join(
        f"{k}={v}" for k, v in fails.items())


def _selftest_bytes():
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(["selftest", "--seed", "42"])
    return code, buf.getvalue().encode()


def criterion_10():
    (c1, a), (c2, b) = _selftest_bytes(), _selftest_bytes()
    return a == b and c1 == c2 == 0, f"identical={a == b}, exit codes {c1}/{c2}, {len(a)} bytes"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10]


def _report(n, ok, detail):
    print(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")


@pytest.mark.acceptance
@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print()
        _report(n, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for i, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        _report(i, ok, detail)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
