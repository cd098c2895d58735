import io
import json
import math

import numpy as np
import pytest

from thermocontact import (
    Chord,
    DegenerateChordError,
    DegenerateFamilyError,
    IdealGasParams,
    ReducedPoint,
    chords_to_csv,
    chords_to_json,
    constant_front,
    cw_chord,
    cw_from_barred,
    difference_front,
    find_chords,
    gas_chord,
    gas_from_barred,
    gas_front,
)
from thermocontact.models import FrontFunction


class TestGasChord:
    def test_reference_parameters(self):
        ch = gas_chord(1.0, 5.0, 2.0)
        assert -ch.q == 0.5  # initial pressure
        assert ch.p == 2.0  # volume
        assert abs(ch.length - 4 * math.log(2)) < 1e-15
        assert ch.direction == 1

    def test_endpoints_on_their_fronts(self):
        ch = gas_chord(1.0, 5.0, 2.0)
        cold = gas_front(IdealGasParams(T=1.0, P_back=0.0))
        hot = gas_front(IdealGasParams(T=5.0, P_back=2.0))
        assert abs(ch.z_start - cold.value(ch.q)) < 1e-8
        assert abs(ch.z_end - hot.value(ch.q)) < 1e-8
        assert abs(ch.p - cold.slope(ch.q)) < 1e-8
        assert abs(ch.p - hot.slope(ch.q)) < 1e-8

    def test_direction_flips_for_large_jump(self):
        # pressure jump above the temperature gap compresses below unit volume
        ch = gas_chord(1.0, 5.0, 8.0)
        assert ch.p == 0.5
        assert ch.direction == -1

    def test_degenerate_jump(self):
        with pytest.raises(DegenerateChordError):
            gas_chord(1.0, 5.0, 4.0)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            gas_chord(5.0, 1.0, 2.0)
        with pytest.raises(ValueError):
            gas_chord(1.0, 5.0, -2.0)


class TestCWChord:
    def test_reference_parameters(self):
        ch = cw_chord(2.0, 10.0 / 3.0, 1.0, 1.0)
        assert abs(ch.p - math.tanh(0.75)) < 1e-12
        assert abs(ch.q - (1.5 - math.tanh(0.75))) < 1e-12
        assert ch.direction == 1

    def test_zero_jump_with_temperature_raise(self):
        ch = cw_chord(1.0, 2.5, 0.0, 1.0)
        assert ch.p == 0.0 and ch.q == 0.0
        assert abs(ch.length - 1.5 * math.log(2)) < 1e-14

    def test_length_equals_difference_front_maximum(self):
        for t0, t1, c, b in ((2.0, 10 / 3, 1.0, 1.0), (0.8, 1.7, -0.6, 2.0)):
            ch = cw_chord(t0, t1, c, b)
            qstar = c * t0 / (t1 - t0)
            psi = difference_front("cw", t0, t1, c)
            assert abs(ch.length - psi.value(qstar)) < 1e-12

    def test_always_upward_for_temperature_raise(self):
        rng = np.random.default_rng(53)
        for _ in range(50):
            t0 = float(rng.uniform(0.2, 3.0))
            t1 = t0 + float(rng.uniform(0.1, 3.0))
            c = float(rng.uniform(-3.0, 3.0))
            b = float(rng.uniform(0.2, 3.0))
            assert cw_chord(t0, t1, c, b).direction == 1

    def test_preconditions(self):
        with pytest.raises(ValueError):
            cw_chord(2.0, 2.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            cw_chord(1.0, 2.0, 1.0, 0.0)


class TestChordRecord:
    def test_zero_length_rejected(self):
        with pytest.raises(DegenerateChordError):
            Chord(q=0.0, p=1.0, z_start=1.0, z_end=1.0)

    def test_direction_sign(self):
        assert Chord(0.0, 1.0, 0.0, 2.0).direction == 1
        assert Chord(0.0, 1.0, 2.0, 0.0).direction == -1


class TestFindChords:
    def test_parabola_vertex(self):
        f1 = FrontFunction(
            f=lambda x: 1.0 - np.asarray(x) ** 2,
            fprime=lambda x: -2.0 * np.asarray(x),
            domain=(-math.inf, math.inf),
        )
        found = find_chords(constant_front(), f1, -2.0, 2.0, grid_n=513)
        assert len(found) == 1
        ch = found[0]
        assert abs(ch.q) < 1e-12
        assert abs(ch.length - 1.0) < 1e-12
        assert ch.direction == 1 and not ch.tangential

    def test_degenerate_family(self):
        with pytest.raises(DegenerateFamilyError):
            find_chords(constant_front(0.0), constant_front(1.0), -1.0, 1.0)

    def test_empty_result_is_valid(self):
        f1 = FrontFunction(
            f=lambda x: np.asarray(x, dtype=float),
            fprime=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            domain=(-math.inf, math.inf),
        )
        assert find_chords(constant_front(), f1, -1.0, 1.0) == []

    def test_touching_fronts_are_dropped(self):
        # difference x^2 has a critical point with zero gap: an intersection
        f1 = FrontFunction(
            f=lambda x: np.asarray(x) ** 2,
            fprime=lambda x: 2.0 * np.asarray(x),
            domain=(-math.inf, math.inf),
        )
        assert find_chords(constant_front(), f1, -1.0, 1.0, grid_n=401) == []

    def test_tangential_root_is_flagged(self):
        # slope difference x^2 touches zero without a sign change
        f1 = FrontFunction(
            f=lambda x: np.asarray(x) ** 3 / 3.0 + 1.0,
            fprime=lambda x: np.asarray(x) ** 2,
            domain=(-math.inf, math.inf),
        )
        found = find_chords(constant_front(), f1, -2.0, 2.0, grid_n=4097)
        assert len(found) == 1
        assert found[0].tangential
        assert abs(found[0].q) < 1e-6
        assert abs(found[0].length - 1.0) < 1e-6

    def test_multiple_roots_ordered(self):
        f1 = FrontFunction(
            f=lambda x: np.sin(np.asarray(x)) + 2.0,
            fprime=lambda x: np.cos(np.asarray(x)),
            domain=(-math.inf, math.inf),
        )
        found = find_chords(constant_front(), f1, -4.0, 4.0, grid_n=2001)
        assert [round(ch.q, 6) for ch in found] == [
            round(-math.pi / 2, 6),
            round(math.pi / 2, 6),
        ]
        assert all(found[i].q < found[i + 1].q for i in range(len(found) - 1))

    def test_scan_window_must_sit_in_domains(self):
        f1 = difference_front("gas", 1.0, 5.0, 2.0)
        with pytest.raises(ValueError):
            find_chords(constant_front(), f1, -2.0, 1.0)

    def test_barred_gas_reproduces_closed_form(self):
        t0, t1, c = 1.0, 5.0, 2.0
        closed = gas_chord(t0, t1, c)
        f0 = constant_front(0.0, (-math.inf, 0.0))
        f1 = difference_front("gas", t0, t1, c)
        found = find_chords(f0, f1, -6.0, -0.01, grid_n=20001)
        assert len(found) == 1
        ch = found[0]
        assert abs(ch.q - closed.q) < 1e-8
        assert abs(ch.length - closed.length) < 1e-8
        # un-bar the endpoints: start on the cold family, end on the hot one
        start = gas_from_barred(ReducedPoint(ch.z_start, [ch.p], [ch.q]), t0)
        end = gas_from_barred(ReducedPoint(ch.z_end, [ch.p], [ch.q]), t0)
        assert abs(start.z - closed.z_start) < 1e-8
        assert abs(end.z - closed.z_end) < 1e-8
        assert abs(float(start.p[0]) - closed.p) < 1e-8

    def test_barred_magnet_reproduces_closed_form(self):
        t0, t1, c, b = 2.0, 10.0 / 3.0, 1.0, 1.0
        closed = cw_chord(t0, t1, c, b)
        f1 = difference_front("cw", t0, t1, c)
        found = find_chords(constant_front(), f1, -20.0, 20.0, grid_n=20001)
        assert len(found) == 1
        ch = found[0]
        start = cw_from_barred(ReducedPoint(ch.z_start, [ch.p], [ch.q]), t0, b)
        assert abs(start.z - closed.z_start) < 1e-8
        assert abs(float(start.p[0]) - closed.p) < 1e-8
        assert abs(float(start.q[0]) - closed.q) < 1e-8
        assert abs(ch.length - closed.length) < 1e-8

    def test_saturated_tails_produce_no_spurious_chords(self):
        # far from the crossing both slopes saturate and their float
        # difference degenerates into exact-zero runs and quantization
        # stairs; neither may register as chords
        f1 = difference_front("cw", 0.8432017129513965, 1.7881614099628014, -1.7489331938925883)
        found = find_chords(constant_front(), f1, -40.0, 40.0, grid_n=40001)
        assert len(found) == 1
        assert not found[0].tangential
        assert found[0].direction == 1

    def test_consistency_across_parameter_draws(self):
        rng = np.random.default_rng(59)
        for _ in range(10):
            t0 = float(rng.uniform(0.3, 2.0))
            t1 = t0 + float(rng.uniform(0.2, 2.0))
            c = float(rng.uniform(0.1, 0.9)) * (t1 - t0)
            closed = gas_chord(t0, t1, c)
            f1 = difference_front("gas", t0, t1, c)
            found = find_chords(
                constant_front(0.0, (-math.inf, 0.0)),
                f1,
                10.0 * closed.q - 1.0,
                closed.q / 10.0,
                grid_n=20001,
            )
            assert len(found) == 1
            assert abs(found[0].q - closed.q) < 1e-8
            assert abs(found[0].length - closed.length) < 1e-8


class TestSerialization:
    def test_json_keys(self):
        doc = json.loads(chords_to_json([gas_chord(1.0, 5.0, 2.0)]))
        assert len(doc) == 1
        assert set(doc[0]) == {
            "q",
            "p",
            "z_start",
            "z_end",
            "length",
            "direction",
            "tangential",
        }
        assert doc[0]["direction"] == 1

    def test_csv_shape(self):
        buf = io.StringIO()
        chords_to_csv([gas_chord(1.0, 5.0, 2.0), cw_chord(1.0, 2.0, 0.5, 1.0)], buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "q,p,z_start,z_end,length,direction,tangential"
        assert len(lines) == 3
