"""Command-line front end: ``python -m tlsbath.cli <command> ...``.

Commands
--------
verify        closed form against quadrature and Maxwell-Bloch oracles
fit-spectrum  fit one transmission trace
fit-tls       fit a pump sweep, bootstrap, write report and model curves
calibrate     gain and added noise from a noise temperature sweep
geometry      capacitor and LC estimates from an INI description
model-eval    evaluate shift and loss on an (n, detuning) grid
pipeline      traces + calibration -> sweep -> fit-tls, from one INI file

Every file written starts with ``#`` lines giving the tool version, input
hashes and seed. Outputs are byte-identical for identical inputs.
"""

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from tlsbath import __version__, checks, constants, io
from tlsbath.calibration import CalibrationError, ChainCalibration, fit_chain, photons_from_generator
from tlsbath.geometry import (
    CapacitorGeometry,
    LumpedCircuit,
    capacitance,
    confinement_depth,
    laplace_bvp_solve,
    lc_resonance,
)
from tlsbath.inference import (
    DERIVED_NAMES,
    PARAM_NAMES,
    ParamFitError,
    SweepDataset,
    SweepPoint,
    TLSFitParams,
    bootstrap,
    derived_quantities,
    fit,
    predict,
)
from tlsbath.model import ThermalEnvironment, thermal_imbalance
from tlsbath.spectroscopy import FitError, fit_power_sweep, fit_resonance, transmission_model

TWO_PI = 2 * np.pi
DEFAULT_TEMPERATURE = 0.330
CURVE_POINTS = 64


class CommandError(RuntimeError):
    pass


# --- formatting -------------------------------------------------------------

def _table_units(params):
    """Parameters in the table layout: kHz, table P0 units, GHz."""
    return {
        "gamma_c0": params.p0 * params.g**2 / TWO_PI / 1e3,
        "g": params.g / TWO_PI / 1e3,
        "p0": params.p0 / 1e-6,
        "gamma1": params.gamma1 / TWO_PI / 1e3,
        "gamma_inf": params.gamma_inf / TWO_PI / 1e3,
        "omega_c": params.omega_c / TWO_PI / 1e9,
        "n_tls": params.p0 * params.gamma2 / TWO_PI,
    }


# conversion of internal bootstrap statistics into table units
_TABLE_FACTOR = {
    "gamma_c0": 1 / TWO_PI / 1e3,
    "g": 1 / TWO_PI / 1e3,
    "p0": 1e6,
    "gamma1": 1 / TWO_PI / 1e3,
    "gamma_inf": 1 / TWO_PI / 1e3,
    "omega_c": 1 / TWO_PI / 1e9,
    "n_tls": 1.0,
}
_TABLE_UNIT = {"gamma_c0": "kHz", "g": "kHz", "p0": "MHz^-1", "gamma1": "kHz", "gamma_inf": "kHz",
               "omega_c": "GHz", "n_tls": ""}
_TABLE_LABEL = {"gamma_c0": "Gamma_c0/2pi", "g": "g/2pi", "p0": "P0", "gamma1": "Gamma_1/2pi",
                "gamma_inf": "Gamma_inf/2pi", "omega_c": "omega_c/2pi", "n_tls": "n_TLS"}
TABLE_ORDER = ("gamma_c0", "g", "p0", "gamma1", "gamma_inf", "omega_c", "n_tls")


def _decimals(err):
    return max(0, 1 - int(np.floor(np.log10(err))))


def round_pm(value, err):
    """Value and uncertainty rounded to two significant digits of the uncertainty."""
    if not np.isfinite(err) or err <= 0:
        return f"{value:.6g}"
    d = _decimals(err)
    return f"{value:.{d}f} +- {err:.{d}f}"


# --- verify -----------------------------------------------------------------

def cmd_verify(args):
    cf = checks.check_closed_form(dense=args.grid_dense)
    mb_sigma, mb_pull = checks.check_maxwell_bloch(checks.random_mb_systems(args.n_systems, args.seed))
    ok = True
    for rep in (cf, mb_sigma, mb_pull):
        status = "ok" if rep.passed else "FAIL"
        for line in rep.lines():
            print(f"{line} [{status}]")
        ok &= rep.passed
    print("verify: " + ("all checks passed" if ok else "tolerance breached"))
    return 0 if ok else 1


# --- fit-spectrum --------------------------------------------------------------

def _outdir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _resonance_values(fit_):
    hz = fit_.as_hz()
    bg = fit_.background
    return {
        **hz,
        "coupling_phase_rad": fit_.coupling_phase,
        "circle_diameter": fit_.circle_diameter,
        "gamma_ext_pinned": fit_.gamma_ext_pinned,
        "bg_amplitude": bg.amplitude,
        "bg_amplitude_slope": bg.amplitude_slope,
        "bg_phase_offset_rad": bg.phase_offset,
        "bg_delay_s": bg.delay,
        "bg_f_ref_hz": bg.omega_ref / TWO_PI,
        "residual_norm": fit_.residual_norm,
    }


def cmd_fit_spectrum(args):
    trace = io.read_trace(args.trace)
    prior = None if args.gamma_ext_prior_hz is None else TWO_PI * args.gamma_ext_prior_hz
    res = fit_resonance(trace, gamma_ext_prior=prior)
    out = _outdir(args.out)
    stem = Path(args.trace).stem
    header = io.header_lines([args.trace])
    io.write_keyvalue(out / f"{stem}_fit.txt", _resonance_values(res), header)
    model = transmission_model(trace.omega, res)
    rows = zip(trace.probe_frequencies, trace.transmission.real, trace.transmission.imag, model.real, model.imag)
    io.write_csv(out / f"{stem}_model.csv", ("freq_hz", "re_t", "im_t", "re_model", "im_model"), rows, header)
    hz = res.as_hz()
    print(f"f_c = {hz['f_c_hz']:.9g} Hz  gamma_i/2pi = {hz['gamma_i_hz']:.6g} Hz  "
          f"gamma_ext/2pi = {hz['gamma_ext_hz']:.6g} Hz  phi = {res.coupling_phase:.4g} rad")
    return 0


# --- fit-tls -----------------------------------------------------------------

def _sigma_z(reference_hz, temperature, sigma_z_th=None):
    if sigma_z_th is not None:
        return float(sigma_z_th)
    env = ThermalEnvironment.zero() if temperature == 0 else ThermalEnvironment(temperature)
    return thermal_imbalance(TWO_PI * reference_hz, env)


def _curve_name(detuning_hz):
    return f"curves_{detuning_hz / 1e3:+.6g}kHz.csv"


def run_fit_tls(dataset, out, *, sigma_z_th, n_boot, seed, ci_method="normal", workers=1, inputs=(),
                stream=sys.stdout):
    """Fit + bootstrap a sweep and write ``report.txt``, ``table_row.csv``, curves and residuals."""
    if n_boot < 0:
        raise CommandError("--bootstrap must be >= 0")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        point = fit(dataset, sigma_z_th=sigma_z_th)
        result = bootstrap(dataset, n_boot, seed, sigma_z_th, point=point, ci_method=ci_method,
                           workers=workers) if n_boot > 0 else None
    notes = sorted({str(w.message) for w in caught})
    params = point.params
    out = _outdir(out)
    header = io.header_lines(inputs, seed=seed, extra={
        "bootstrap": n_boot, "ci_method": ci_method, "sigma_z_th": io.fmt(sigma_z_th),
        "reference_hz": io.fmt(dataset.reference_hz),
    })
    table = _table_units(params)

    # table row: point values, plus std and CI when bootstrapped
    cols, row = [], []
    for key in TABLE_ORDER:
        cols.append(key)
        row.append(table[key])
        if result is not None:
            f = _TABLE_FACTOR[key]
            cols += [f"{key}_std", f"{key}_ci95_low", f"{key}_ci95_high"]
            row += [result.std[key] * f, result.ci_low[key] * f, result.ci_high[key] * f]
    io.write_csv(out / "table_row.csv", cols, [row], header)

    # per-point residuals
    shift_m, gamma_m = predict(dataset, params, sigma_z_th)
    io.write_csv(out / "residuals.csv",
                 ("n_photons", "pump_detuning_hz", "shift_resid_hz", "gamma_i_resid_hz"),
                 zip(dataset.n, dataset.detuning_hz, dataset.shift_hz - shift_m, dataset.gamma_hz - gamma_m),
                 header)

    # model curves, one file per detuning, log grid covering the photon range
    positive = dataset.n[dataset.n > 0]
    n_lo = positive.min() if positive.size else 1e-2
    n_hi = max(dataset.n.max(), 10 * n_lo)
    grid = np.logspace(np.log10(n_lo), np.log10(n_hi), CURVE_POINTS)
    curve_files = []
    for det in np.unique(dataset.detuning_hz):
        probe = SweepDataset([SweepPoint(n, det, 0.0, 0.0) for n in grid], dataset.reference_hz)
        s, g = predict(probe, params, sigma_z_th)
        name = _curve_name(det)
        io.write_csv(out / name, ("n", "shift_hz_model", "gamma_i_hz_model"), zip(grid, s, g),
                     header + [f"# pump_detuning_hz {io.fmt(det)}"])
        curve_files.append(name)

    # report: human-readable block followed by full-precision key = value lines
    lines = list(header)
    lines.append("# Table-style row (+- is the bootstrap standard deviation; CI is the 95% interval)")
    for key in TABLE_ORDER:
        label = f"{_TABLE_LABEL[key]} [{_TABLE_UNIT[key]}]" if _TABLE_UNIT[key] else _TABLE_LABEL[key]
        if result is None:
            lines.append(f"# {label:22s} {table[key]:.6g}")
        else:
            f = _TABLE_FACTOR[key]
            err = result.std[key] * f
            d = _decimals(err) if err > 0 else 6
            lines.append(f"# {label:22s} {round_pm(table[key], err)}"
                         f"   CI [{result.ci_low[key] * f:.{d}f}, {result.ci_high[key] * f:.{d}f}]")
    for msg in notes:
        lines.append(f"# warning: {msg}")
    kv = {"n_points": len(dataset), "cost": point.cost, "residual_norm": point.residual_norm,
          "iterations": point.iterations, "degenerate": point.degenerate, "condition_number": point.condition}
    for name in PARAM_NAMES:
        kv[name] = getattr(params, name)
    gamma_c0_hz, n_tls = derived_quantities(params)
    kv["gamma_c0_hz"] = gamma_c0_hz
    kv["n_tls"] = n_tls
    if result is not None:
        kv.update({"bootstrap_resamples": result.n_resamples, "bootstrap_failed": result.n_failed,
                   "bootstrap_unreliable": result.unreliable})
        for name in PARAM_NAMES + DERIVED_NAMES:
            for stat in ("mean", "std", "ci_low", "ci_high"):
                kv[f"{name}_{stat}"] = getattr(result, stat)[name]
    kv["curve_files"] = " ".join(curve_files)
    io.write_keyvalue(out / "report.txt", kv, lines)

    for line in lines[len(header):]:
        print(line[2:], file=stream)
    return point, result


def cmd_fit_tls(args):
    dataset = io.read_sweep(args.sweep, args.reference_hz)
    sz = _sigma_z(dataset.reference_hz, args.temperature, args.sigma_z_th)
    try:
        run_fit_tls(dataset, args.out, sigma_z_th=sz, n_boot=args.bootstrap, seed=args.seed,
                    ci_method=args.ci, workers=args.workers, inputs=[args.sweep])
    except ParamFitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in exc.trace:
            print(f"  {line}", file=sys.stderr)
        return 3
    return 0


# --- calibrate ---------------------------------------------------------------

def cmd_calibrate(args):
    sweep = io.read_noise_sweep(args.sweep)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cal = fit_chain(sweep, TWO_PI * args.f_c_hz, attenuation_db=args.attenuation_db)
    values = {"gain_db": cal.gain_db, "added_noise_k": cal.added_noise_kelvin, "s_amp_w_per_hz": cal.s_amp,
              "attenuation_db": cal.attenuation_db, "f_c_hz": args.f_c_hz}
    header = io.header_lines([args.sweep]) + [f"# warning: {w.message}" for w in caught]
    if args.out:
        io.write_keyvalue(args.out, values, header)
    print(f"G = {cal.gain_db:.4f} dB  S_amp/k_B = {cal.added_noise_kelvin:.4f} K")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return 0


def read_calibration(path):
    kv = io.read_keyvalue(path)
    for key in ("gain_db", "added_noise_k"):
        if key not in kv:
            raise io.ConfigError(f"{path}: missing key '{key}'", key)
    return ChainCalibration(float(kv["gain_db"]), float(kv["added_noise_k"]), float(kv.get("attenuation_db", 0.0)))


# --- geometry ----------------------------------------------------------------

def cmd_geometry(args):
    cfg = io.read_config(args.config, required_sections=("geometry",))
    sec = cfg["geometry"]
    eps = sec.float("eps_substrate", 11.7)
    area = sec.float("area_S") if "area_S" in sec else None
    if "period_a" in sec:
        geom = CapacitorGeometry.from_period(sec.float("period_a"), eps, area,
                                             metallization=sec.float("metallization", 0.5))
    else:
        geom = CapacitorGeometry(sec.float("finger_width_w"), sec.float("gap_s"),
                                 sec.float("finger_length_p", 1.0), sec.int("n_pairs", 1), eps, area)
    c = capacitance(geom)
    values = {"period_a_m": geom.period_a, "area_S_m2": geom.area_S, "capacitance_F": c,
              "confinement_depth_m": confinement_depth(geom)}
    if "circuit" in cfg:
        circ_sec = cfg["circuit"]
        if "inductance_L" in circ_sec:
            circ = LumpedCircuit(circ_sec.float("inductance_L"), c)
        else:
            circ = LumpedCircuit.from_meander(circ_sec.float("meander_length_l"), c)
        values["inductance_H"] = circ.inductance_L
        values["f_lc_hz"] = lc_resonance(circ)
    if "laplace" in cfg:
        lap = cfg["laplace"]
        sol = laplace_bvp_solve(geom, grid_resolution=lap.int("grid_resolution", 64))
        values["laplace_energy_fraction_first_harmonic"] = sol.energy_fraction_first_harmonic
        values["laplace_capacitance_F"] = sol.capacitance_numeric
    if args.out:
        io.write_keyvalue(args.out, values, io.header_lines([args.config]))
    for k, v in values.items():
        print(f"{k} = {v:.6g}")
    return 0


# --- model-eval ----------------------------------------------------------------

def _params_from_section(sec):
    return TLSFitParams.from_table(sec.float("p0_table"), sec.float("g_khz"), sec.float("gamma1_khz"),
                                   sec.float("gamma_inf_khz"), sec.float("f_c_ghz"))


def cmd_model_eval(args):
    cfg = io.read_config(args.config, required_sections=("params", "grid"))
    params = _params_from_section(cfg["params"])
    grid = cfg["grid"]
    n = np.logspace(np.log10(grid.float("n_min")), np.log10(grid.float("n_max")), grid.int("n_points", 64))
    try:
        detunings = [float(x) for x in grid.get("detunings_hz").split(",")]
    except ValueError:
        raise io.ConfigError(f"{args.config}: detunings_hz must be a comma-separated list", "detunings_hz") from None
    f_c = params.omega_c / TWO_PI
    temperature = cfg["params"].float("temperature_k", DEFAULT_TEMPERATURE)
    sz = _sigma_z(f_c, temperature)
    nn, dd = np.meshgrid(n, detunings)
    probe = SweepDataset([SweepPoint(a, b, 0.0, 0.0) for a, b in zip(nn.ravel(), dd.ravel())], f_c)
    s, g = predict(probe, params, sz)
    header = io.header_lines([args.config], extra={"sigma_z_th": io.fmt(sz)})
    io.write_csv(args.out, ("n_photons", "pump_detuning_hz", "shift_hz", "gamma_i_hz"),
                 zip(nn.ravel(), dd.ravel(), s, g), header)
    print(f"wrote {nn.size} rows to {args.out}")
    return 0


# --- pipeline ----------------------------------------------------------------

def cmd_pipeline(args):
    """Traces (one per pump setting) -> resonance fits -> photon numbers -> sweep -> fit-tls.

    The manifest CSV has columns ``trace,generator_dbm,pump_detuning_hz``;
    trace paths are relative to the manifest.
    """
    cfg = io.read_config(args.config, required_sections=("pipeline",))
    sec = cfg["pipeline"]
    manifest = sec.path("manifest")
    cal_path = sec.path("calibration")
    out = sec.path("output_dir", "out")
    if "constants" in sec:
        for k, v in constants.load_overrides(sec.path("constants")).items():
            setattr(constants, k, v)
    for p in (manifest, cal_path):
        if not p.exists():
            raise CommandError(f"file not found: {p}")
    cal = read_calibration(cal_path)
    n_boot = sec.int("bootstrap", 1000)
    if n_boot < 1:
        raise io.ConfigError(f"{args.config}: bootstrap must be >= 1", "bootstrap")
    seed = sec.int("seed", 0)
    temperature = sec.float("temperature_k", DEFAULT_TEMPERATURE)

    rows = _read_manifest(manifest)
    traces = [io.read_trace(r[0]) for r in rows]
    if "gamma_ext_prior_hz" in sec:
        gext = TWO_PI * sec.float("gamma_ext_prior_hz")
        fits = [fit_resonance(t, gamma_ext_prior=gext) for t in traces]
    else:
        fits = fit_power_sweep(traces)
    reference_hz = sec.float("reference_hz") if "reference_hz" in sec else fits[0].omega_c / TWO_PI
    points = []
    for (_, dbm, det), res in zip(rows, fits):
        omega_p = TWO_PI * (reference_hz + det)
        n = photons_from_generator(dbm, cal, res, omega_p)
        points.append(SweepPoint(n, det, res.omega_c / TWO_PI - reference_hz, res.gamma_i / TWO_PI))
    dataset = SweepDataset(points, reference_hz)
    outdir = _outdir(out)
    inputs = [args.config, manifest, cal_path] + [r[0] for r in rows]
    io.write_sweep(outdir / "sweep.csv", dataset, io.header_lines(inputs))
    sz = _sigma_z(reference_hz, temperature)
    run_fit_tls(dataset, outdir, sigma_z_th=sz, n_boot=n_boot, seed=seed, inputs=inputs)
    return 0


def _read_manifest(path):
    import csv

    text = [(i, ln) for i, ln in enumerate(Path(path).read_text().splitlines(), start=1)
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not text:
        raise io.ParseError("manifest is empty", path=path)
    names = [c.strip() for c in next(csv.reader([text[0][1]]))]
    for col in ("trace", "generator_dbm", "pump_detuning_hz"):
        if col not in names:
            raise io.ParseError("missing required column", path=path, line=text[0][0], column=col)
    rows = []
    for lineno, ln in text[1:]:
        cells = dict(zip(names, (c.strip() for c in next(csv.reader([ln])))))
        trace = Path(cells["trace"])
        if not trace.is_absolute():
            trace = Path(path).parent / trace
        if not trace.exists():
            raise CommandError(f"{path}: line {lineno}: trace file not found: {trace}")
        try:
            rows.append((trace, float(cells["generator_dbm"]), float(cells["pump_detuning_hz"])))
        except (KeyError, ValueError):
            raise io.ParseError("bad numeric field", path=path, line=lineno) from None
    return rows


# --- entry point -----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="tlsbath", description="TLS bath model, oracles and analysis pipeline")
    p.add_argument("--version", action="version", version=f"tlsbath {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="closed form vs numerical oracles")
    v.add_argument("--grid-dense", action="store_true", help="4x more detuning points")
    v.add_argument("--n-systems", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("fit-spectrum", help="fit a transmission trace CSV")
    s.add_argument("trace")
    s.add_argument("--gamma-ext-prior-hz", type=float)
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_fit_spectrum)

    t = sub.add_parser("fit-tls", help="fit a pump-sweep CSV with bootstrap errors")
    t.add_argument("sweep")
    t.add_argument("--reference-hz", type=float, help="overrides the '# reference_hz' header")
    t.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE, help="K, sets sigma_z_th")
    t.add_argument("--sigma-z-th", type=float, help="overrides the thermal value")
    t.add_argument("--bootstrap", type=int, default=1000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--ci", choices=("normal", "percentile"), default="normal")
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--out", default=".")
    t.set_defaults(func=cmd_fit_tls)

    c = sub.add_parser("calibrate", help="fit gain and added noise from a noise sweep CSV")
    c.add_argument("sweep")
    c.add_argument("--f-c-hz", type=float, required=True)
    c.add_argument("--attenuation-db", type=float, default=0.0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_calibrate)

    g = sub.add_parser("geometry", help="capacitor / LC estimates from an INI file")
    g.add_argument("config")
    g.add_argument("--out")
    g.set_defaults(func=cmd_geometry)

    m = sub.add_parser("model-eval", help="evaluate the bath model on an (n, detuning) grid")
    m.add_argument("config")
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_model_eval)

    pl = sub.add_parser("pipeline", help="traces -> calibration -> sweep -> fit")
    pl.add_argument("config")
    pl.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (io.ParseError, io.ConfigError, CommandError, FitError, CalibrationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
