import numpy as np
import pytest

from tlsbath import io
from tlsbath.calibration import NoiseSweepPoint
from tlsbath.inference import SweepDataset, SweepPoint
from tlsbath.spectroscopy import SpectrumTrace


def test_fmt_round_trips_floats():
    for x in (0.1, 1 / 3, 6.02214076e23, -2.5e-300, 7.521e9):
        assert float(io.fmt(x)) == x
    assert io.fmt(3) == "3"
    assert io.fmt(True) == "true"


def test_sweep_round_trip(tmp_path):
    pts = [SweepPoint(10.0**k, d, 1e3 / 7 * k, 2e6 + k, 0.5, 3.0) for k in range(4) for d in (-1e6, 1e6)]
    ds = SweepDataset(pts, 7.521e9 + 0.123)
    path = tmp_path / "sweep.csv"
    io.write_sweep(path, ds, io.header_lines(seed=4))
    back = io.read_sweep(path)
    assert back.reference_hz == ds.reference_hz
    for name in ("n", "detuning_hz", "shift_hz", "gamma_hz", "sigma_shift_hz", "sigma_gamma_hz"):
        np.testing.assert_array_equal(getattr(back, name), getattr(ds, name))


def test_sweep_without_sigmas(tmp_path):
    ds = SweepDataset([SweepPoint(1.0, 0.0, 2.0, 3.0), SweepPoint(2.0, 1.0, 2.5, 3.5)], 1e9)
    path = tmp_path / "s.csv"
    io.write_sweep(path, ds)
    back = io.read_sweep(path)
    assert back.sigma_shift_hz is None
    assert "sigma_shift_hz" not in path.read_text()


def test_sweep_reference_argument_overrides_header(tmp_path):
    ds = SweepDataset([SweepPoint(1.0, 0.0, 2.0, 3.0)], 1e9)
    path = tmp_path / "s.csv"
    io.write_sweep(path, ds)
    assert io.read_sweep(path, reference_hz=5.0).reference_hz == 5.0


def test_sweep_without_reference_is_an_error(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("n_photons,pump_detuning_hz,shift_hz,gamma_i_hz\n1,0,2,3\n")
    with pytest.raises(io.ParseError, match="reference"):
        io.read_sweep(path)


def test_trace_round_trip(tmp_path):
    f = np.linspace(7e9, 7.01e9, 11)
    t = np.exp(1j * np.linspace(0, 3, 11)) * 0.3
    path = tmp_path / "trace.csv"
    io.write_csv(path, ("freq_hz", "re_t", "im_t"), zip(f, t.real, t.imag))
    tr = io.read_trace(path)
    assert isinstance(tr, SpectrumTrace)
    np.testing.assert_array_equal(tr.probe_frequencies, f)
    np.testing.assert_array_equal(tr.transmission, t)


def test_noise_sweep_reader(tmp_path):
    path = tmp_path / "noise.csv"
    path.write_text("# comment\ntemperature_k,psd_w_per_hz\n0.1,1e-16\n\n1.0,2e-16\n")
    sweep = io.read_noise_sweep(path)
    assert sweep == [NoiseSweepPoint(0.1, 1e-16), NoiseSweepPoint(1.0, 2e-16)]


def test_bad_number_names_line_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# header\nfreq_hz,re_t,im_t\n1,2,3\n4,x5,6\n")
    with pytest.raises(io.ParseError) as info:
        io.read_trace(path)
    err = info.value
    assert err.line == 4 and err.column == "re_t"
    assert "bad.csv, line 4, column 're_t'" in str(err)


def test_missing_column_names_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("freq_hz,re_t\n1,2\n")
    with pytest.raises(io.ParseError, match="im_t"):
        io.read_trace(path)


def test_ragged_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("freq_hz,re_t,im_t\n1,2,3\n4,5\n")
    with pytest.raises(io.ParseError, match="line 3"):
        io.read_trace(path)


@pytest.mark.parametrize("text", ["", "# only comments\n\n", "freq_hz,re_t,im_t\n"])
def test_empty_inputs(tmp_path, text):
    path = tmp_path / "empty.csv"
    path.write_text(text)
    with pytest.raises(io.ParseError):
        io.read_trace(path)


def test_negative_photon_number_is_parse_error(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("# reference_hz 1e9\nn_photons,pump_detuning_hz,shift_hz,gamma_i_hz\n-1,0,2,3\n")
    with pytest.raises(io.ParseError, match="n_photons"):
        io.read_sweep(path)


def test_keyvalue_round_trip(tmp_path):
    path = tmp_path / "kv.txt"
    io.write_keyvalue(path, {"a": 1.25, "b": "text", "c": 7}, ["# top"])
    assert io.read_keyvalue(path) == {"a": "1.25", "b": "text", "c": "7"}


def test_keyvalue_syntax_error(tmp_path):
    path = tmp_path / "kv.txt"
    path.write_text("a = 1\nnot a pair\n")
    with pytest.raises(io.ParseError, match="line 2"):
        io.read_keyvalue(path)


def test_header_records_hash_and_seed(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("abc")
    lines = io.header_lines([src], seed=9)
    assert lines[0].startswith("# tlsbath ")
    assert lines[1] == "# input in.csv sha256=ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    assert lines[2] == "# seed 9"


def test_config_sections_and_keys(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[geometry]\nperiod_a = 4e-6  # m\nn = 3\nname = x\nfile = data/t.csv\n")
    cfg = io.read_config(path, required_sections=("geometry",))
    sec = cfg["geometry"]
    assert sec.float("period_a") == 4e-6
    assert sec.int("n") == 3
    assert sec.path("file") == tmp_path / "data" / "t.csv"
    assert sec.float("eps", 11.7) == 11.7
    with pytest.raises(io.ConfigError) as info:
        sec.float("gap_s")
    assert info.value.key == "gap_s" and "gap_s" in str(info.value)
    with pytest.raises(io.ConfigError, match="not a number"):
        sec.float("name")
    with pytest.raises(io.ConfigError, match=r"\[laplace\]"):
        io.read_config(path, required_sections=("laplace",))
