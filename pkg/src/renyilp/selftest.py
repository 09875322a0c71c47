"""Deterministic invariant suite behind ``renyilp selftest``.

Every check draws its instances from its own PCG64 stream seeded by
``(seed, index)``, so the report depends only on the seed.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import channels as ch
from .algebra import PositiveFunctional, functional_direct_sum, mpower, schatten_norm
from .divergences import (alt_bounds, max_relative, relative_entropy, sandwiched_renyi,
                          standard_renyi)
from .dpi_sufficiency import d1_monotonicity_check, dpi_report, sufficiency_test
from .ensembles import (RNG_NAME, random_channel, random_commuting_pair, random_element,
                        random_full_rank_state, random_hermitian, random_state, random_unitary)
from .lp_kosaki import (clarkson_sides, duality_map_T, embed_ip,
                        interpolation_path, jordan_decompose, kosaki_norm, pairing, pixu_sides)

ALPHAS = (1.2, 1.5, 2.0, 3.0, 5.0)


def _dim(rng) -> int:
    return int(rng.integers(2, 5))


def _pair(rng, d=None):
    d = d or _dim(rng)
    return random_state(rng, (d,)), random_state(rng, (d,))


def check_isometry(rng, n):
    for _ in range(n):
        d = _dim(rng)
        k, s = random_element(rng, (d,)), random_state(rng, (d,))
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            if abs(embed_ip(k, s, p).norm() - schatten_norm(k, p)) > 1e-9 * max(1, schatten_norm(k, p)):
                return False
    return True


def check_clarkson(rng, n):
    for _ in range(n):
        d = _dim(rng)
        s = random_state(rng, (d,))
        h, k = embed_ip(random_element(rng, (d,)), s, 1).h, embed_ip(random_element(rng, (d,)), s, 1).h
        for p in (1.5, 2.0, 3.0):
            if not clarkson_sides(h, k, s, p).holds(1e-8):
                return False
    return True


def check_pixu(rng, n):
    for _ in range(n):
        d = _dim(rng)
        s = random_state(rng, (d,))
        h, k = embed_ip(random_element(rng, (d,)), s, 1).h, embed_ip(random_element(rng, (d,)), s, 1).h
        for p in (1.5, 2.0, 3.0):
            if not pixu_sides(h, k, s, p).holds(1e-8):
                return False
    return True


def check_jordan(rng, n):
    for _ in range(n):
        d = _dim(rng)
        s = random_state(rng, (d,))
        for p in (1.5, 2.0, 3.0):
            h = embed_ip(random_hermitian(rng, (d,)), s, p)
            plus, minus = jordan_decompose(h)
            lhs = h.norm() ** p
            if abs(lhs - plus.norm() ** p - minus.norm() ** p) > 1e-8 * max(1, lhs):
                return False
    return True


def check_duality(rng, n):
    for _ in range(n):
        d = _dim(rng)
        s = random_state(rng, (d,))
        for p in (1.5, 2.0, 3.0):
            h = embed_ip(random_element(rng, (d,)), s, p)
            t = duality_map_T(h)
            if abs(t.norm() - 1) > 1e-8 or abs(pairing(t, h) - h.norm()) > 1e-8 * max(1, h.norm()):
                return False
    return True


def check_strip_lines(rng, n):
    for _ in range(n):
        d = _dim(rng)
        s = random_state(rng, (d,))
        h = embed_ip(random_element(rng, (d,)), s, 2.0)
        f = interpolation_path(h)
        ref = f.norm_at(0.5)
        for x in np.linspace(0, 1, 5):
            vals = [f.norm_at(complex(x, t)) for t in np.linspace(-2, 2, 5)]
            if max(abs(v - ref) for v in vals) > 1e-7 * max(1, ref):
                return False
    return True


def check_sandwich(rng, n):
    for _ in range(n):
        r, s = _pair(rng)
        for a in ALPHAS:
            low = float(standard_renyi(r, s, 2 - 1 / a))
            mid = float(sandwiched_renyi(r, s, a))
            if not low - 1e-8 <= mid <= float(standard_renyi(r, s, a)) + 1e-8:
                return False
    return True


def check_classical(rng, n):
    for _ in range(n):
        r, s, p, q = random_commuting_pair(rng, _dim(rng))
        for a in ALPHAS:
            ref = math.log(np.sum(p ** a * q ** (1 - a))) / (a - 1)
            if abs(float(sandwiched_renyi(r, s, a)) - ref) > 1e-9:
                return False
            if abs(float(standard_renyi(r, s, a)) - ref) > 1e-9:
                return False
    return True


def check_large_alpha(rng, n):
    for _ in range(n):
        d = _dim(rng)
        r, s = random_full_rank_state(rng, (d,)), random_full_rank_state(rng, (d,))
        if abs(float(sandwiched_renyi(r, s, 2.0 ** 12)) - float(max_relative(r, s))) > 1e-3:
            return False
    return True


def check_alpha_to_one(rng, n):
    for _ in range(n):
        d = _dim(rng)
        r, s = random_full_rank_state(rng, (d,)), random_full_rank_state(rng, (d,))
        vals = [float(sandwiched_renyi(r, s, 1 + 2.0 ** -k)) for k in range(1, 11)]
        if any(b > a + 1e-9 for a, b in zip(vals, vals[1:])):
            return False
        if abs(float(sandwiched_renyi(r, s, 1.001)) - float(relative_entropy(r, s))) > 1e-2:
            return False
    return True


def check_alt(rng, n):
    for _ in range(n):
        r, s = _pair(rng)
        for p in (1.5, 2.0, 3.0):
            low, high = alt_bounds(r, s, p)
            v = kosaki_norm(r.element, s, p) ** p
            if not low - 1e-8 * max(1, v) <= v <= high + 1e-8 * max(1, high):
                return False
    return True


def check_scaling(rng, n):
    for _ in range(n):
        r, s = _pair(rng)
        a = float(rng.choice(ALPHAS))
        base = float(sandwiched_renyi(r, s, a))
        for mu in (0.5, 2.0, 5.0):
            for lam in (0.5, 2.0, 5.0):
                got = float(sandwiched_renyi(r.scaled(mu), s.scaled(lam), a))
                if abs(got - base - a / (a - 1) * math.log(mu) + math.log(lam)) > 1e-9:
                    return False
    return True


def check_direct_sum(rng, n):
    for _ in range(n):
        d1, d2 = _dim(rng), _dim(rng)
        r1, s1 = random_state(rng, (d1,)).scaled(0.4), random_state(rng, (d1,)).scaled(0.7)
        r2, s2 = random_state(rng, (d2,)).scaled(0.6), random_state(rng, (d2,)).scaled(0.3)
        a = float(rng.choice(ALPHAS))
        lhs = math.exp((a - 1) * float(sandwiched_renyi(functional_direct_sum(r1, r2),
                                                        functional_direct_sum(s1, s2), a)))
        rhs = sum(math.exp((a - 1) * float(sandwiched_renyi(x, y, a)))
                  for x, y in ((r1, s1), (r2, s2)))
        if abs(lhs - rhs) > 1e-8 * rhs:
            return False
    return True


def check_convexity(rng, n):
    for _ in range(n):
        d = _dim(rng)
        r1, s1 = _pair(rng, d)
        r2, s2 = _pair(rng, d)
        lam, a = float(rng.uniform()), float(rng.choice(ALPHAS))

        def q(x, y):
            return math.exp((a - 1) * float(sandwiched_renyi(x, y, a)))
        mix = q(r1.scaled(lam) + r2.scaled(1 - lam), s1.scaled(lam) + s2.scaled(1 - lam))
        if mix > lam * q(r1, s1) + (1 - lam) * q(r2, s2) + 1e-8:
            return False
    return True


def dominated(rng, f: PositiveFunctional) -> PositiveFunctional:
    """A functional below ``f``: ``f^{1/2} C f^{1/2}`` with a random ``0 <= C <= 1``."""
    c = random_state(rng, f.structure).element
    c = c * (float(rng.uniform(0.2, 1.0)) / max(np.linalg.eigvalsh(b).max() for b in c.blocks))
    root = mpower(f.element, 0.5)
    return PositiveFunctional((root @ c @ root).hermitian_part())


def check_order(rng, n):
    for _ in range(n):
        d = _dim(rng)
        r, s = _pair(rng, d)
        r0 = dominated(rng, r)
        s0 = dominated(rng, s)
        a = float(rng.choice(ALPHAS))
        base = float(sandwiched_renyi(r, s, a))
        if float(sandwiched_renyi(r0, s, a)) > base + 1e-9:
            return False
        if float(sandwiched_renyi(r, s0, a)) < base - 1e-9:
            return False
    return True


def _dpi_reports(rng, n, alphas):
    out = []
    for _ in range(n):
        d, m = _dim(rng), _dim(rng)
        phi = random_channel(rng, d, m)
        r, s = _pair(rng, d)
        out.extend(dpi_report(phi, r, s, a) for a in alphas)
    return out


def check_gap_lower_small(rng, n):
    reps = _dpi_reports(rng, n, (1.2, 1.5, 2.0))
    return all(r.gap >= r.lower_bound - 1e-7 and r.gap >= -1e-8 for r in reps)


def check_gap_lower_large(rng, n):
    reps = _dpi_reports(rng, n, (2.0, 3.0, 5.0))
    return all(r.gap >= r.lower_bound - 1e-7 and r.gap >= -1e-8 for r in reps)


def check_gap_upper(rng, n):
    reps = _dpi_reports(rng, n, ALPHAS)
    return all(r.upper_bound is None or r.gap <= r.upper_bound + 1e-7 for r in reps)


def check_transpose_dpi(rng, n):
    for _ in range(n):
        d = _dim(rng)
        phi = ch.compose(random_channel(rng, d, _dim(rng)), ch.transpose((d,)))
        r, s = _pair(rng, d)
        for a in ALPHAS:
            if dpi_report(phi, r, s, a).gap < -1e-8:
                return False
        d_in, d_out = d1_monotonicity_check(phi, r, s)
        if d_out > d_in + 1e-8:
            return False
    return True


def check_petz_fixed_point(rng, n):
    for _ in range(n):
        d = _dim(rng)
        phi, s = random_channel(rng, d, _dim(rng)), random_state(rng, (d,))
        rec = ch.petz_dual(phi, s)
        if schatten_norm(rec(phi(s)) - s.element, 1) > 1e-9:
            return False
    return True


def check_sufficient_instances(rng, n):
    for _ in range(n):
        d1, d2 = 2, int(rng.integers(2, 4))
        r1, s1 = _pair(rng, d1)
        tau = random_state(rng, (d2,)).element.dense()
        r = PositiveFunctional.from_array(np.kron(r1.element.dense(), tau))
        s = PositiveFunctional.from_array(np.kron(s1.element.dense(), tau))
        v = sufficiency_test(ch.partial_trace((d1, d2)), r, s)
        u = random_unitary(rng, d1)
        w = sufficiency_test(ch.unitary_conjugation(u), r1, s1)
        for verdict in (v, w):
            if not (verdict.sufficient and verdict.consistent
                    and verdict.sigma_recovery_defect <= 1e-6):
                return False
    return True


def check_generic_insufficient(rng, n):
    for _ in range(n):
        d = _dim(rng)
        phi = random_channel(rng, d, 2)
        r, s = _pair(rng, d)
        v = sufficiency_test(phi, r, s)
        if v.evidence.gap > 1e-3 and v.evidence.recovery_defect <= 1e-4:
            return False
    return True


CHECKS: list[tuple[str, Callable, int]] = [
    ("Kosaki isometry", check_isometry, 10),
    ("Clarkson inequality", check_clarkson, 10),
    ("Pisier-Xu inequality", check_pixu, 10),
    ("Jordan norm identity", check_jordan, 10),
    ("Duality map postconditions", check_duality, 10),
    ("Constant norm on strip lines", check_strip_lines, 3),
    ("Standard divergences sandwich the sandwiched one", check_sandwich, 10),
    ("Commuting pairs reduce to classical Renyi", check_classical, 10),
    ("Large alpha limit is max-relative entropy", check_large_alpha, 5),
    ("Alpha to one limit is relative entropy", check_alpha_to_one, 5),
    ("Relative modular bracket of the norm", check_alt, 10),
    ("Scaling identity", check_scaling, 5),
    ("Direct sum additivity", check_direct_sum, 10),
    ("Joint convexity", check_convexity, 10),
    ("Order relations", check_order, 10),
    ("DPI gap lower bound (alpha<=2)", check_gap_lower_small, 10),
    ("DPI gap lower bound (alpha>=2)", check_gap_lower_large, 10),
    ("DPI gap upper bound", check_gap_upper, 10),
    ("DPI for positive non-CP maps", check_transpose_dpi, 5),
    ("Petz map recovers the reference state", check_petz_fixed_point, 10),
    ("Sufficient instances are recovered", check_sufficient_instances, 5),
    ("Strict gap means no recovery", check_generic_insufficient, 10),
]


def run_selftest(seed: int = 0, scale: int = 1) -> dict:
    """Run every check; returns a report with one PASS/FAIL entry per check."""
    results = {}
    for i, (name, fn, n) in enumerate(CHECKS):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, i])))
        try:
            ok = bool(fn(rng, n * scale))
        except Exception as exc:  # a crash is a failed check, not a crashed report
            ok = False
            name = f"{name} [{type(exc).__name__}]"
        results[name] = "PASS" if ok else "FAIL"
    return {"rng": RNG_NAME, "seed": seed, "results": results,
            "passed": all(v == "PASS" for v in results.values())}
