"""Vector model: norms, duality map, projections, pairing, JSON round trip."""

from __future__ import annotations

import numpy as np
import pytest

from lplab.spaces import (
    GeometricTail,
    IndexDomain,
    IndexSet,
    PNorm,
    SpVector,
    duality_map,
    norm,
    pairing,
    project,
    vector_from_json,
    vector_to_json,
)

TOL = 1e-10
N_PAIRS = 1000


def _random_vector(rng: np.random.Generator, with_tail: bool = True) -> SpVector:
    n = int(rng.integers(0, 6))
    idx = rng.choice(40, size=n, replace=False) if n else []
    ents = {int(j): complex(rng.normal(), rng.normal()) for j in idx}
    tail = None
    if with_tail and rng.random() < 0.5:
        s = int(rng.integers(0, 30))
        c = complex(rng.normal(), rng.normal()) or 1.0
        r = 0.85 * rng.random() * np.exp(2j * np.pi * rng.random())
        tail = GeometricTail(s, c, r)
    return SpVector.make(ents, tail)


def _dense(x: SpVector, n: int = 4000) -> np.ndarray:
    return x.window(0, n)


class TestNorm:
    def test_triangle_inequality_random_pairs(self):
        rng = np.random.default_rng(20260301)
        norms = [PNorm.lp(1), PNorm.lp(1.7), PNorm.lp(2), PNorm.lp(3.5), PNorm.c0()]
        for trial in range(N_PAIRS):
            x = _random_vector(rng)
            y = _random_vector(rng)
            pn = norms[trial % len(norms)]
            try:
                z = x + y
            except ValueError:
                continue  # incompatible tail ratios
            assert norm(z, pn) <= norm(x, pn) + norm(y, pn) + TOL

    def test_norm_matches_dense_window(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            x = _random_vector(rng)
            d = _dense(x)
            assert norm(x, PNorm.lp(2)) == pytest.approx(np.linalg.norm(d), abs=1e-8)
            assert norm(x, PNorm.c0()) == pytest.approx(np.abs(d).max(), abs=1e-8)

    def test_homogeneity(self):
        rng = np.random.default_rng(11)
        x = _random_vector(rng)
        for pn in (PNorm.lp(1.5), PNorm.c0()):
            assert norm(x.scale(-2.5j), pn) == pytest.approx(2.5 * norm(x, pn), abs=TOL)


class TestDualityMap:
    @pytest.mark.parametrize("p", [1.3, 2.0, 3.0, 4.5])
    def test_identities(self, p):
        rng = np.random.default_rng(int(p * 100))
        pn = PNorm.lp(p)
        pn_dual = pn.conjugate()
        for _ in range(80):
            x = _random_vector(rng)
            if x.is_zero():
                continue
            j = duality_map(x, pn)
            nx = norm(x, pn)
            assert pairing(j, x) == pytest.approx(nx**p, abs=TOL * max(1, nx**p))
            assert norm(j, pn_dual) == pytest.approx(
                nx ** (p - 1), abs=TOL * max(1, nx ** (p - 1))
            )

    def test_rejects_nonsmooth(self):
        x = SpVector.basis(0)
        with pytest.raises(ValueError):
            duality_map(x, PNorm.lp(1))
        with pytest.raises(ValueError):
            duality_map(x, PNorm.c0())


class TestProject:
    def test_idempotent_and_nonexpansive(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            x = _random_vector(rng)
            if rng.random() < 0.5:
                sel = IndexSet.finite(rng.choice(50, size=5, replace=False).tolist())
            else:
                sel = IndexSet.complement(rng.choice(50, size=5, replace=False).tolist())
            y = project(x, sel)
            z = project(y, sel)
            for pn in (PNorm.lp(1.5), PNorm.lp(3), PNorm.c0()):
                assert norm(y, pn) <= norm(x, pn) + TOL
            np.testing.assert_allclose(_dense(z, 300), _dense(y, 300), atol=TOL)

    def test_projection_values(self):
        x = SpVector.make({0: 2.0}, GeometricTail(1, 1.0, 0.5))
        y = project(x, IndexSet.complement([2, 3]))
        d = _dense(y, 10)
        expect = np.array([2.0, 1.0, 0.0, 0.0, 0.125, 0.0625, 0.03125, 0.015625, 2**-7, 2**-8])
        np.testing.assert_allclose(d, expect, atol=TOL)

    def test_no_explicit_zeros_after_projection(self):
        x = SpVector.make({}, GeometricTail(0, 1.0, 0.5))
        y = project(x, IndexSet.complement([4]))
        assert all(v != 0 for _, v in y.entries)
        assert y.tail is not None and y.tail.start == 5


class TestPairing:
    def test_bilinear_no_conjugation(self):
        f = SpVector.make({0: 1j})
        x = SpVector.make({0: 1j})
        assert pairing(f, x) == pytest.approx(-1.0)

    def test_tail_tail_closed_form(self):
        f = SpVector.make({}, GeometricTail(0, 1.0, 0.5))
        x = SpVector.make({}, GeometricTail(0, 1.0, 0.5))
        assert pairing(f, x) == pytest.approx(4.0 / 3.0, abs=TOL)

    def test_against_dense(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            f = _random_vector(rng)
            x = _random_vector(rng)
            want = np.sum(_dense(f) * _dense(x))
            assert pairing(f, x) == pytest.approx(want, abs=1e-8)


class TestAlgebra:
    def test_add_same_ratio_tails(self):
        a = SpVector.make({}, GeometricTail(0, 1.0, 0.5))
        b = SpVector.make({}, GeometricTail(2, 3.0, 0.5))
        c = a + b
        d = _dense(a) + _dense(b)
        np.testing.assert_allclose(_dense(c), d, atol=TOL)

    def test_add_distinct_ratio_tails_raises(self):
        a = SpVector.make({}, GeometricTail(0, 1.0, 0.5))
        b = SpVector.make({}, GeometricTail(0, 1.0, 0.25))
        with pytest.raises(ValueError):
            a + b

    def test_cancellation_inside_tail_region(self):
        a = SpVector.make({}, GeometricTail(0, 1.0, 0.5))
        b = SpVector.make({3: -0.125})
        c = a + b
        assert all(v != 0 for _, v in c.entries)
        np.testing.assert_allclose(_dense(c, 10), _dense(a, 10) + _dense(b, 10), atol=TOL)


class TestJson:
    def test_round_trip(self):
        rng = np.random.default_rng(41)
        for _ in range(60):
            x = _random_vector(rng)
            y = vector_from_json(vector_to_json(x))
            np.testing.assert_allclose(_dense(y, 500), _dense(x, 500), atol=0)
            assert vector_to_json(y) == vector_to_json(x)

    def test_integers_domain_round_trip(self):
        x = SpVector.make({-3: 1.0 + 2j, 5: -1.0}, domain=IndexDomain.INTEGERS)
        y = vector_from_json(vector_to_json(x))
        assert y.domain == IndexDomain.INTEGERS
        assert y.at(-3) == 1.0 + 2j
