import csv
import json
import math

import numpy as np
import pytest

from sarfourier import cli, fileio, solver
from sarfourier.forward import PhaseHistory
from sarfourier.geometry import SceneSpec, reference_geometry
from sarfourier.imaging import grid_and_fft, partial_sum_1d
from sarfourier.kernels import kernel2d_for, window_weights
from sarfourier.scene import ComplexImage

TINY = ["--n-freqs", "8", "--n-az", "4", "--radius", "0.32", "--n-pixels", "16"]


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def weird_complex(rng, shape):
    z = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    flat = z.ravel()
    flat[:4] = [complex(-0.0, 5e-324), complex(np.inf, -np.inf), 1e308 + 1e-308j, 0.1 + 0.2j]
    return z


# ---------------------------------------------------------------- file formats

def test_complex_round_trip_bit_exact(tmp_path, rng):
    z = weird_complex(rng, (5, 7, 3))
    fileio.write_complex(tmp_path / "a.c128", z, "thing", {"note": "x"})
    back, head = fileio.read_complex(tmp_path / "a.c128", "thing")
    assert back.shape == z.shape
    assert back.tobytes() == z.tobytes()
    assert head["dtype"] == "c128le" and head["format_version"] == 1 and head["note"] == "x"
    assert (tmp_path / "a.c128").stat().st_size == 16 * z.size


def test_raw_layout_is_interleaved_little_endian(tmp_path):
    fileio.write_complex(tmp_path / "a.c128", np.array([[1 + 2j, 3 - 4j]]), "thing")
    raw = np.frombuffer((tmp_path / "a.c128").read_bytes(), dtype="<f8")
    np.testing.assert_array_equal(raw, [1, 2, 3, -4])


def test_read_complex_checks(tmp_path):
    p = tmp_path / "a.c128"
    fileio.write_complex(p, np.ones(4), "image")
    with pytest.raises(ValueError, match="expected a phase_history"):
        fileio.read_complex(p, "phase_history")
    head = json.loads(p.with_suffix(".json").read_text())
    head["format_version"] = 2
    p.with_suffix(".json").write_text(json.dumps(head))
    with pytest.raises(ValueError, match="version"):
        fileio.read_complex(p)
    fileio.write_complex(p, np.ones(4), "image")
    p.write_bytes(p.read_bytes()[:-16])
    with pytest.raises(ValueError, match="does not match"):
        fileio.read_complex(p)
    with pytest.raises(FileNotFoundError):
        fileio.read_complex(tmp_path / "missing.c128")


def test_phase_history_round_trip(tmp_path, rng):
    geom = reference_geometry(6, 3)
    scene = SceneSpec(2.0, 32)
    k = 2 * math.pi * 2 * geom.freqs_hz * math.cos(geom.elevation_rad) / geom.c_mps
    ph = PhaseHistory(weird_complex(rng, (6, 3)), k, geom.azimuths_rad, scene, geom)
    fileio.save_phase_history(tmp_path / "ph.c128", ph)
    back = fileio.load_phase_history(tmp_path / "ph.c128")
    assert back.samples.tobytes() == ph.samples.tobytes()
    assert np.array_equal(back.k_radpm, ph.k_radpm)
    assert np.array_equal(back.azimuths_rad, ph.azimuths_rad)
    assert back.scene == scene
    assert np.array_equal(back.geometry.freqs_hz, geom.freqs_hz)


def test_image_and_coefficient_round_trip(tmp_path, rng):
    img = ComplexImage(weird_complex(rng, (8, 8)), 0.037)
    fileio.save_image(tmp_path / "i.c128", img)
    back = fileio.load_image(tmp_path / "i.c128")
    assert back.samples.tobytes() == img.samples.tobytes() and back.pixel_m == img.pixel_m
    coeffs = {k: complex(rng.normal(), rng.normal()) for k in range(-5, 6)}
    fileio.save_coefficients(tmp_path / "c.c128", coeffs, -0.5, 1.0)
    got, start, length = fileio.load_coefficients(tmp_path / "c.c128")
    assert got == coeffs and (start, length) == (-0.5, 1.0)


def test_pgm_round_trip_and_scaling(tmp_path):
    v = np.array([[0.0, 0.5], [1e-4, 2.0]])
    fileio.write_pgm(tmp_path / "a.pgm", v)
    pix = fileio.read_pgm(tmp_path / "a.pgm")
    assert pix.shape == (2, 2)
    np.testing.assert_array_equal(pix, np.round(np.abs(v) / 2 * 65535).astype(np.uint16))
    disp = fileio.to_display(v, db=True, floor_db=-60)
    # 1e-4 / 2 is -86 dB, clamped at the floor
    np.testing.assert_allclose(disp, [[0, (20 * math.log10(0.25) + 60) / 60], [0, 1]])
    assert (tmp_path / "a.pgm").read_bytes().startswith(b"P5\n2 2\n65535\n")
    with pytest.raises(ValueError):
        fileio.to_display(v, db=True, floor_db=3)
    assert np.all(fileio.to_display(np.zeros(3)) == 0)


def test_csv_round_trip(tmp_path):
    vals = [0.1, 1 / 3, 2.0 ** -1074, 1e300]
    fileio.write_csv(tmp_path / "a.csv", ["i", "v"], enumerate(vals))
    rows = read_rows(tmp_path / "a.csv")
    assert rows[0] == ["i", "v"]
    assert [float(r[1]) for r in rows[1:]] == vals


# ---------------------------------------------------------------- simulate

def test_simulate_delta_tiny(tmp_path, capsys):
    out = tmp_path / "d.c128"
    assert run("--out", out, "simulate", "--scene", "delta", *TINY) == 0
    ph = fileio.load_phase_history(out)
    assert ph.samples.shape == (8, 4)
    assert np.all(ph.samples == 1)
    text = capsys.readouterr().out
    assert "alias-free range_radius_m" in text and "wrote 32 samples" in text


@pytest.mark.parametrize("extra", [
    ["--scene", "points", "--points", "0,0,1;0.1,-0.1,0.5j", "--noise", "0.1"],
    ["--scene", "delta", "--random-phase", "--noise", "1"],
])
def test_simulate_is_deterministic(tmp_path, extra):
    outs = []
    for name, seed in (("a", 5), ("b", 5), ("c", 6)):
        out = tmp_path / f"{name}.c128"
        assert run("--seed", seed, "--out", out, "simulate", *extra, *TINY) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] != outs[2]


def test_simulate_warns_on_large_scene(tmp_path, capsys):
    out = tmp_path / "w.c128"
    assert run("--out", out, "simulate", "--radius", "100", "--n-pixels", "2", "--n-az", "2") == 0
    err = capsys.readouterr().err
    line = [s for s in err.splitlines() if "range_radius_m" in s][0]
    assert line.startswith("warning: scene radius 100 m exceeds")
    # 73.76 m at c = 3e8; the default c is 2.998e8
    assert float(line.split()[-2]) == pytest.approx(73.76 * 2.998e8 / 3e8, abs=0.01)


def test_simulate_1d(tmp_path):
    out = tmp_path / "r.c128"
    assert run("--out", out, "simulate", "--scene", "ramp", "--kmax", "3") == 0
    coeffs, start, length = fileio.load_coefficients(out)
    assert sorted(coeffs) == list(range(-3, 4)) and (start, length) == (-0.5, 1.0)
    assert coeffs[0] == 1.0
    assert run("--out", out, "simulate", "--scene", "step", "--kmax", "2") == 0
    coeffs, start, _ = fileio.load_coefficients(out)
    assert coeffs[0] == 0.5 and coeffs[2] == 0 and start == -math.pi
    assert coeffs[1] == pytest.approx(1 / (1j * math.pi))


# ---------------------------------------------------------------- errors

def test_exit_codes(tmp_path, capsys):
    out = tmp_path / "x.c128"
    assert run("--out", out, "form", tmp_path / "nope.c128") == 1
    assert "does not exist" in capsys.readouterr().err
    assert run("--out", out, "simulate", "--bogus") == 1
    assert run("--out", tmp_path / "no" / "x.c128", "simulate", *TINY) == 1
    assert run("--seed", "-1", "--out", out, "simulate", *TINY) == 1
    assert run("--out", out, "simulate", "--scene", "points", *TINY) == 1
    assert run("--out", out, "simulate", "--scene", "points", "--points", "9,9,1", *TINY) == 1
    assert run("simulate", *TINY) == 1
    capsys.readouterr()
    assert run("--out", out, "simulate", *TINY) == 0
    # solve needs lambda
    assert run("--out", tmp_path / "s.c128", "solve", out) == 1
    assert "--lam" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path, capsys):
    ph = tmp_path / "p.c128"
    assert run("--out", ph, "simulate", "--scene", "points", "--points", "0,0,1;0.1,0.05,1",
               *TINY) == 0
    code = run("--out", tmp_path / "s.c128", "solve", ph, "--reg", "tikhonov", "--lam", "1",
               "--cg-maxit", "1", "--cg-tol", "1e-14")
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err


def test_solve_rejects_image_input(tmp_path):
    img = tmp_path / "i.c128"
    fileio.save_image(img, ComplexImage(np.ones((4, 4)), 1.0))
    assert run("--out", tmp_path / "s.c128", "solve", img, "--lam", "1") == 1


# ---------------------------------------------------------------- form

def test_form_mf_reproduces_kernel(tmp_path):
    ph, img = tmp_path / "d.c128", tmp_path / "i.c128"
    assert run("--out", ph, "simulate", "--scene", "delta", *TINY) == 0
    assert run("--out", img, "form", ph, "--method", "mf") == 0
    got = fileio.load_image(img).samples
    geom = fileio.load_phase_history(ph).geometry
    ref = kernel2d_for(geom, SceneSpec(0.32, 16)).values
    assert np.max(np.abs(got - ref)) < 1e-9 * np.max(np.abs(ref))


def test_form_compare_and_pgm(tmp_path, capsys):
    ph, img, pgm = tmp_path / "d.c128", tmp_path / "i.c128", tmp_path / "i.pgm"
    assert run("--out", ph, "simulate", "--scene", "points", "--points", "0,0,1;0.1,-0.08,1j",
               *TINY) == 0
    capsys.readouterr()
    for method in ("bp", "grid"):
        assert run("--out", img, "form", ph, "--method", method, "--compare",
                   "--pgm", pgm, "--db") == 0
        line = [s for s in capsys.readouterr().out.splitlines() if "relative error vs mf" in s]
        assert len(line) == 1 and float(line[0].split(":")[1]) < 0.5
    assert fileio.read_pgm(pgm).shape == (16, 16)
    assert fileio.read_complex(img)[1]["method"] == "grid"


def test_form_window_fejer(tmp_path):
    ph, img = tmp_path / "d.c128", tmp_path / "i.c128"
    assert run("--out", ph, "simulate", "--scene", "delta", *TINY) == 0
    assert run("--out", img, "form", ph, "--method", "mf", "--window", "fejer") == 0
    got = fileio.load_image(img).samples
    # the delta transform is all ones, so the centre pixel is the weight total
    total = np.outer(window_weights("fejer", 4), window_weights("fejer", 8)).sum()
    assert got[8, 8] == pytest.approx(total, abs=1e-12)
    assert run("--out", img, "form", ph, "--method", "mf") == 0
    assert fileio.load_image(img).samples[8, 8] == pytest.approx(32, abs=1e-12)


def test_form_rejects_bad_options(tmp_path):
    ph, img = tmp_path / "d.c128", tmp_path / "i.c128"
    assert run("--out", ph, "simulate", *TINY) == 0
    assert run("--out", img, "form", ph, "--method", "bp", "--upsample", "0") == 1
    assert run("--out", img, "form", ph, "--method", "grid", "--oversampling", "0.5") == 1
    assert run("--out", img, "form", ph, "--method", "fft") == 1
    # bp on non-uniform wavenumbers is a method/data mismatch
    data = fileio.load_phase_history(ph)
    k = data.k_radpm.copy()
    k[-1] += 0.5 * (k[1] - k[0])
    fileio.save_phase_history(ph, PhaseHistory(data.samples, k, data.azimuths_rad, data.scene))
    assert run("--out", img, "form", ph, "--method", "bp") == 1
    assert run("--out", img, "form", ph, "--method", "mf") == 0


# ---------------------------------------------------------------- solve

def test_solve_tikhonov_zero_lambda_unitary(tmp_path):
    coeffs = {k: complex(1 / (1 + k * k), 0.1 * k) for k in range(-15, 17)}
    src = tmp_path / "c.c128"
    fileio.save_coefficients(src, coeffs, -0.5, 1.0)
    out = tmp_path / "f.c128"
    assert run("--out", out, "solve", src, "--reg", "tikhonov", "--lam", "0",
               "--n-samples", "32", "--tikhonov-identity") == 0
    f, head = fileio.read_complex(out, "signal")
    x = -0.5 + np.arange(32) / 32
    ref = partial_sum_1d(coeffs, -15, 16, 2 * np.pi * x)
    np.testing.assert_allclose(f, ref, atol=1e-8)
    assert head["start"] == -0.5 and head["length"] == 1.0
    assert read_rows(tmp_path / "f_history.csv")[0] == ["iteration", "objective"]


def test_solve_tv_removes_gibbs_on_ramp(tmp_path, capsys):
    src, out = tmp_path / "ramp.c128", tmp_path / "tv.c128"
    assert run("--out", src, "simulate", "--scene", "ramp", "--kmax", "75") == 0
    assert run("--out", out, "solve", src, "--reg", "tv", "--lam", "0.01", "--beta", "1",
               "--iters", "2000", "--n-samples", "512", "--history", tmp_path / "h.csv") == 0
    assert "residuals r_f=" in capsys.readouterr().out
    f = fileio.read_complex(out, "signal")[0]
    coeffs = fileio.load_coefficients(src)[0]
    x = -0.5 + np.arange(4096) / 4096
    plain = partial_sum_1d(coeffs, -75, 75, 2 * np.pi * x).real
    # the ramp tops out at 2 just left of the jump
    assert plain.max() / 2 > 1.08
    assert f.real.max() / 2 < 1.02
    hist = read_rows(tmp_path / "h.csv")
    assert len(hist) == 2002


def test_solve_ptv_flattens_speckle(tmp_path):
    ph_path, out = tmp_path / "sl.c128", tmp_path / "ptv.c128"
    geo = ["--n-freqs", "24", "--n-az", "24", "--radius", "2", "--n-pixels", "64"]
    assert run("--seed", 3, "--out", ph_path, "simulate", "--scene", "shepp-logan",
               "--random-phase", *geo) == 0
    assert run("--out", out, "solve", ph_path, "--reg", "ptv", "--lam", "100",
               "--iters", "200") == 0
    f = np.abs(fileio.load_image(out).samples)
    ph = fileio.load_phase_history(ph_path)
    # unit point gain: a delta forms a peak of M * P
    g = np.abs(grid_and_fft(ph).samples) / ph.samples.size

    def tv_mag(m):
        return np.abs(np.diff(m, axis=0)).sum() + np.abs(np.diff(m, axis=1)).sum()

    assert tv_mag(f) < tv_mag(g)


def test_solve_l1_and_determinism(tmp_path):
    ph = tmp_path / "p.c128"
    assert run("--out", ph, "simulate", "--scene", "points", "--points", "0,0,1;0.1,0.05,1",
               *TINY) == 0
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.c128"
        assert run("--out", out, "solve", ph, "--reg", "l1", "--lam", "0.5", "--iters", "50",
                   "--step", "spectral") == 0
        blobs.append((out.read_bytes(), out.with_suffix(".json").read_bytes(),
                      (tmp_path / f"{name}_history.csv").read_bytes()))
    assert blobs[0][0] == blobs[1][0] and blobs[0][2] == blobs[1][2]
    head = fileio.read_complex(tmp_path / "a.c128")[1]
    assert len(head["residuals"]) == 3 and head["reg"] == "l1"


# ---------------------------------------------------------------- kernel / stats / diagnose

def test_kernel_command(tmp_path, capsys):
    out = tmp_path / "k.c128"
    assert run("--out", out, "kernel", "--n-freqs", "16", "--n-az", "8", "--radius", "1",
               "--n-pixels", "20", "--pgm", tmp_path / "k.pgm") == 0
    assert "peak |K| = 128" in capsys.readouterr().out
    vals, head = fileio.read_complex(out, "kernel")
    assert vals.shape == (20, 20) and abs(vals[10, 10]) == pytest.approx(128)


@pytest.mark.slow
def test_kernel_command_reference_peak(tmp_path, capsys):
    assert run("--out", tmp_path / "k.c128", "--threads", "2", "kernel") == 0
    assert "peak |K| = 65536" in capsys.readouterr().out


def test_stats_command(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run("--seed", 1, "--out", out, "stats", "--n", "64", "--bandwidth", "10",
               "--kc", "7", "--trials", "2000") == 0
    rows = read_rows(out)
    assert len(rows) == 65
    body = np.array(rows[1:], dtype=float)
    ana = body[:, rows[0].index("analytic")]
    emp = body[:, rows[0].index("empirical")]
    assert np.linalg.norm(emp - ana) / np.linalg.norm(ana) < 0.1
    assert "relative l2 difference" in capsys.readouterr().out
    assert run("--out", out, "stats", "--n", "64", "--bandwidth", "9") == 1
    assert run("--out", out, "stats", "--n", "64", "--bandwidth", "10", "--delta", "4",
               "--trials", "200", "--signal", "ones") == 0


def test_diagnose_command(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run("--seed", 2, "--out", out, "diagnose", "--n", "100", "--iters", "400") == 0
    rows = read_rows(out)
    assert rows[0] == ["iteration", "objective", "r_f", "r_g", "r_c"]
    assert len(rows) == 402
    res = np.array(rows[1:], dtype=float)[:, 2:]
    assert np.all(res[-1] < res[0])
    text = capsys.readouterr().out
    cert = float(text.split("subgradient certificate")[1].split()[0])
    assert 0 < cert < 2


def test_solver_config_in_cli_matches_library():
    assert cli.build_parser().parse_args(["solve", "x", "--lam", "1"]).beta == solver.DEFAULT_BETA
