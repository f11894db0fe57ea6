"""Acceptance suite: every criterion prints one PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the lines; each test
asserts its stated tolerance and time budget.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from grassfire import (
    DistanceMatrix,
    GrassmannPoint,
    HyperspectralMovie,
    PatchSpec,
    SubspaceMetric,
    TargetSignature,
    ace_map,
    ace_score,
    betti_at,
    components_at,
    distance,
    distance_matrix,
    embed,
    fit_background,
    generate,
    load_movie,
    patch_series,
    read_barcode,
    read_distance_matrix,
    rips_barcode,
    rips_h0,
    rips_h1,
    save_movie,
    scenario_from_mapping,
    sliding_window_series,
    write_barcode,
    write_distance_matrix,
)
from grassfire.cli import main as cli_main
from grassfire.config import bundled_config, parse_kv
from oracles import brute_force_barcodes, random_distance_matrix


@contextmanager
def criterion(num, desc):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {num:02d} FAIL  {desc}")
        raise
    print(f"\nACCEPTANCE {num:02d} PASS  {desc}")


def h0_tuples(b):
    return sorted((iv.birth, iv.death) for iv in b.in_dim(0))


def h1_tuples(b):
    return sorted((iv.birth, iv.death, iv.open_end) for iv in b.in_dim(1))


def load_scenario(name):
    return scenario_from_mapping(parse_kv(bundled_config(name)))


def test_01_persistence_oracle_equivalence():
    with criterion(1, "dim-0/dim-1 barcodes match brute-force reduction on 100 seeded matrices"):
        t0 = time.monotonic()
        rng = np.random.default_rng(1)
        for trial in range(100):
            m = int(rng.integers(2, 13))
            d = random_distance_matrix(rng, m, ties=bool(trial % 5 == 0))
            cap = float(d.max()) * (1.0 if trial % 2 else 0.6)
            h0_oracle, _ = brute_force_barcodes(d, float(d.max()))
            _, h1_oracle = brute_force_barcodes(d, cap)
            dm = DistanceMatrix(d)
            h0 = h0_tuples(rips_h0(dm))
            h1 = h1_tuples(rips_h1(dm, cap))
            assert len(h0) == len(h0_oracle) and len(h1) == len(h1_oracle)
            for a, b in zip(h0, h0_oracle):
                assert abs(a[0] - b[0]) <= 1e-12
                assert (math.isinf(a[1]) and math.isinf(b[1])) or abs(a[1] - b[1]) <= 1e-12
            for a, b in zip(h1, h1_oracle):
                assert abs(a[0] - b[0]) <= 1e-12
                assert abs(a[1] - b[1]) <= 1e-12
                assert a[2] == b[2]
        elapsed = time.monotonic() - t0
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_02_circle_fixture():
    with criterion(2, "noisy circle yields one persistent loop and one essential component"):
        t0 = time.monotonic()
        rng = np.random.default_rng(2)
        theta = rng.uniform(0, 2 * np.pi, 100)
        pts = np.c_[np.cos(theta), np.sin(theta)] + rng.normal(0, 0.05, (100, 2))
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt((diff**2).sum(-1))
        dm = DistanceMatrix(d)
        h1 = rips_h1(dm, float(d.max()))
        big = [iv for iv in h1.intervals if iv.persistence > 0.5 * float(d.max())]
        assert len(big) == 1
        h0 = rips_h0(dm)
        essential = [iv for iv in h0.intervals if math.isinf(iv.death)]
        assert len(essential) == 1
        elapsed = time.monotonic() - t0
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_03_square_fixture(square_matrix):
    with criterion(3, "unit square dim-1 barcode is exactly {[1, sqrt2)}"):
        b = rips_h1(DistanceMatrix(square_matrix), 2.0)
        assert len(b.intervals) == 1
        iv = b.intervals[0]
        assert abs(iv.birth - 1.0) <= 1e-12
        assert abs(iv.death - math.sqrt(2.0)) <= 1e-12
        assert not iv.open_end


def test_04_grassmann_analytic_fixtures():
    with criterion(4, "analytic metric values to 1e-10 and basis invariance to 1e-9"):
        e = np.eye(4)
        y1 = GrassmannPoint(np.column_stack([e[:3, 0], e[:3, 1]])[:3])
        y2 = GrassmannPoint(
            np.column_stack([e[:3, 0], (e[:3, 1] + e[:3, 2]) / np.sqrt(2)])
        )
        expected_mixed = {
            SubspaceMetric.MIN_ANGLE: 0.0,
            SubspaceMetric.CHORDAL: 1 / np.sqrt(2),
            SubspaceMetric.GEODESIC: np.pi / 4,
            SubspaceMetric.FUBINI_STUDY: np.pi / 4,
        }
        for metric, want in expected_mixed.items():
            assert abs(distance(y1, y2, metric) - want) <= 1e-10
        z1 = GrassmannPoint(e[:, :2])
        z2 = GrassmannPoint(e[:, 2:])
        expected_orth = {
            SubspaceMetric.MIN_ANGLE: np.pi / 2,
            SubspaceMetric.CHORDAL: np.sqrt(2.0),
            SubspaceMetric.GEODESIC: np.pi / np.sqrt(2),
            SubspaceMetric.FUBINI_STUDY: np.pi / 2,
        }
        for metric, want in expected_orth.items():
            assert abs(distance(z1, z2, metric) - want) <= 1e-10

        rng = np.random.default_rng(4)
        a = embed(rng.normal(0, 1, (16, 3)))
        b = embed(rng.normal(0, 1, (16, 3)))
        base = {m: distance(a, b, m) for m in SubspaceMetric}
        for _ in range(50):
            q, _ = np.linalg.qr(rng.normal(0, 1, (3, 3)))
            bq = GrassmannPoint(b.basis @ q)
            for m in SubspaceMetric:
                assert abs(distance(a, bq, m) - base[m]) <= 1e-9


def test_05_pseudometric_divergence():
    with criterion(5, "shared-direction subspaces: min-angle 0 merge, chordal clearly apart"):
        e = np.eye(4)
        y1 = GrassmannPoint(e[:, :2])          # span{e1, e2}
        y2 = GrassmannPoint(e[:, [0, 2]])      # span{e1, e3}
        # positive smallest angle (pi/4) to both shared-direction subspaces
        far = GrassmannPoint(np.column_stack([e[:, 3], (e[:, 1] + e[:, 2]) / np.sqrt(2)]))
        assert distance(y1, y2, SubspaceMetric.MIN_ANGLE) < 1e-8
        assert distance(y1, y2, SubspaceMetric.CHORDAL) > 0.1
        d = distance_matrix([y1, y2, far], SubspaceMetric.MIN_ANGLE)
        assert d.entries[0, 1] == 0.0
        # merged from the first positive scale onward
        assert components_at(d, 0.0).n_components == 2
        h0 = rips_h0(d)
        assert betti_at(h0, 1e-12, 0) == 2
        assert h0.dropped_zero_persistence == 1


def test_06_synthetic_loop(tmp_path):
    with criterion(6, "plume-frame sliding window carries a loop >= 3x any pre-onset bar"):
        t0 = time.monotonic()
        movie, _ = generate(load_scenario("mes-loop.cfg"))

        def longest_bar(frame):
            wins = sliding_window_series(movie, frame, 4, 7, 190, 245, 8, 1, (0, 1, 2))
            pts = [embed(w) for w in wins]
            d = distance_matrix(pts, SubspaceMetric.MIN_ANGLE)
            h1 = rips_h1(d, float(d.entries.max()))
            return max((iv.persistence for iv in h1.intervals), default=0.0)

        plume = longest_bar(19)
        quiet = longest_bar(1)
        assert plume > 0
        assert quiet == 0 or plume >= 3.0 * quiet, f"ratio {plume / quiet:.2f}"
        elapsed = time.monotonic() - t0
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_07_synthetic_isolation():
    with criterion(7, "an epsilon isolates >=80% of release frames while >=95% of pre-onset share one component"):
        t0 = time.monotonic()
        sc = load_scenario("tep-onset.cfg")
        assert sc.frames == 200 and sc.onset_frame == 60 and sc.release_duration == 20
        movie, _ = generate(sc)
        spec = PatchSpec(12, 15, 28, 35, (2, 10, 17))
        pts = [embed(p) for p in patch_series(movie, spec)]
        d = distance_matrix(pts, SubspaceMetric.MIN_ANGLE)
        release = list(range(60, 81))
        pre = list(range(0, 60))
        h0 = rips_h0(d)
        deaths = sorted({iv.death for iv in h0.intervals if math.isfinite(iv.death)})
        found = None
        for eps in deaths:
            part = components_at(d, eps)
            labels = part.labels
            sizes = {}
            for lab in labels:
                sizes[lab] = sizes.get(lab, 0) + 1
            singles = sum(1 for f in release if sizes[labels[f]] == 1)
            biggest_pre = max(
                sum(1 for f in pre if labels[f] == lab) for lab in set(labels[f] for f in pre)
            )
            if singles >= 0.8 * len(release) and biggest_pre >= 0.95 * len(pre):
                found = (eps, singles, biggest_pre)
                break
        assert found is not None, "no epsilon satisfies both isolation conditions"
        elapsed = time.monotonic() - t0
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_08_ace_properties():
    with criterion(8, "ACE: exact self-score, whitening invariance 1e-8, onset detected at frame 60 +/- 1"):
        rng = np.random.default_rng(8)
        # exact self-score on a generic model
        pixels = rng.normal(0, 1, (500, 5)) @ np.diag([1, 2, 0.5, 1.5, 1]) + 4.0
        model = fit_background(pixels, 1e-3)
        s = TargetSignature(rng.normal(0, 2, 5) + 4.0)
        assert ace_score(model, s, s.spectrum) == 1.0

        # whitening invariance under 20 random invertible maps
        pix = rng.normal(0, 1, (600, 4)) + 2.0
        sig = rng.normal(0, 2, 4) + 2.0
        tests = rng.normal(0, 2, (10, 4)) + 2.0
        base_model = fit_background(pix, 0.0)
        base = [ace_score(base_model, TargetSignature(sig), x) for x in tests]
        n_checked = 0
        while n_checked < 20:
            a = rng.normal(0, 1, (4, 4))
            if abs(np.linalg.det(a)) < 1e-3:
                continue
            model_t = fit_background(pix @ a.T, 0.0)
            scores = [
                ace_score(model_t, TargetSignature(a @ sig), a @ x) for x in tests
            ]
            assert np.abs(np.array(scores) - np.array(base)).max() <= 1e-8
            n_checked += 1

        # onset detection on the bundled scenario
        sc = load_scenario("tep-onset.cfg")
        movie, _ = generate(sc)
        bg_pixels = movie.values[0:40].reshape(-1, sc.bands).astype(np.float64)
        model = fit_background(bg_pixels, 0.05)
        target = TargetSignature(sc.amplitude)
        first = None
        for f in range(movie.frames):
            scores, _ = ace_map(movie, f, model, target)
            if (scores > 0.5).any():
                first = f
                break
        assert first is not None and abs(first - sc.onset_frame) <= 1, f"first at {first}"


def test_09_performance_envelope(tmp_path):
    with criterion(9, "561-frame pipeline with H0+H1 at max scale completes in under 120 s"):
        t0 = time.monotonic()
        out = tmp_path / "perf"
        rc = cli_main(
            ["pipeline", "--config", str(bundled_config("tep-561-pipeline.cfg")), "--out", str(out)]
        )
        elapsed = time.monotonic() - t0
        assert rc == 0
        d = read_distance_matrix(out / "distmat.csv")
        assert d.entries.shape == (561, 561)
        barcode = read_barcode(out / "barcode.csv")
        assert len(barcode.in_dim(0)) >= 1 and len(barcode.in_dim(1)) >= 1
        assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_10_format_round_trips(tmp_path):
    with criterion(10, "HSCB, distance-matrix CSV, and barcode CSV round-trip bit-exactly"):
        rng = np.random.default_rng(10)
        movie = HyperspectralMovie(
            rng.normal(0, 1, (4, 6, 5, 3)).astype(np.float32), np.array([8.0, 9.0, 10.0])
        )
        p1 = tmp_path / "m1.hscb"
        p2 = tmp_path / "m2.hscb"
        save_movie(movie, p1)
        save_movie(load_movie(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

        x = rng.random((9, 9))
        d = DistanceMatrix(np.where(np.eye(9, dtype=bool), 0.0, (x + x.T) / 2))
        c1 = tmp_path / "d1.csv"
        c2 = tmp_path / "d2.csv"
        write_distance_matrix(d, c1)
        write_distance_matrix(read_distance_matrix(c1), c2)
        assert c1.read_bytes() == c2.read_bytes()
        assert np.array_equal(read_distance_matrix(c1).entries, d.entries)

        b = rips_barcode(d, float(d.entries.max()) * 0.9)
        b1 = tmp_path / "b1.csv"
        b2 = tmp_path / "b2.csv"
        write_barcode(b, b1)
        write_barcode(read_barcode(b1), b2)
        assert b1.read_bytes() == b2.read_bytes()
        assert read_barcode(b1).intervals == b.intervals
