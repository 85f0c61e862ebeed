"""CSV and INI readers/writers for traces, noise sweeps, pump sweeps and reports.

Machine-readable numbers are written with 17 significant digits so that a
float survives a write/read cycle unchanged. Every file starts with ``#``
header lines recording the tool version, the sha256 of each input and the
seed; no timestamps, so identical runs give identical bytes.
"""

import configparser
import csv
import hashlib
import io as _io
from pathlib import Path

import numpy as np

from tlsbath import __version__
from tlsbath.calibration import NoiseSweepPoint
from tlsbath.inference import SweepDataset, SweepPoint
from tlsbath.spectroscopy import SpectrumTrace

__all__ = [
    "ParseError",
    "ConfigError",
    "fmt",
    "sha256_file",
    "header_lines",
    "read_table",
    "read_trace",
    "read_noise_sweep",
    "read_sweep",
    "write_sweep",
    "write_csv",
    "write_keyvalue",
    "read_keyvalue",
    "read_config",
]

TRACE_COLUMNS = ("freq_hz", "re_t", "im_t")
NOISE_COLUMNS = ("temperature_k", "psd_w_per_hz")
SWEEP_COLUMNS = ("n_photons", "pump_detuning_hz", "shift_hz", "gamma_i_hz")
SWEEP_SIGMAS = ("sigma_shift_hz", "sigma_gamma_hz")


class ParseError(ValueError):
    def __init__(self, message, path=None, line=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column '{column}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.path, self.line, self.column = path, line, column


class ConfigError(KeyError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key

    def __str__(self):
        return self.args[0]


def fmt(x):
    """17-significant-digit representation; integers stay integral."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def header_lines(inputs=(), seed=None, extra=None):
    lines = [f"# tlsbath {__version__}"]
    for p in inputs:
        lines.append(f"# input {Path(p).name} sha256={sha256_file(p)}")
    if seed is not None:
        lines.append(f"# seed {seed}")
    for k, v in (extra or {}).items():
        lines.append(f"# {k} {v}")
    return lines


def _comments_and_rows(path):
    path = Path(path)
    text = path.read_text()
    comments, rows = {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            parts = s[1:].strip().split(None, 1)
            if len(parts) == 2:
                comments[parts[0]] = parts[1].strip()
            continue
        rows.append((lineno, raw))
    return comments, rows


def read_table(path, required, optional=()):
    """Parse a headed numeric CSV; returns ``(columns, comments)``.

    ``columns`` maps each present column name to a float array. Errors name
    the file, the line number and, where relevant, the column.
    """
    comments, rows = _comments_and_rows(path)
    if not rows:
        raise ParseError("file is empty", path=path)
    head_line, head = rows[0]
    names = [c.strip() for c in next(csv.reader([head]))]
    for col in required:
        if col not in names:
            raise ParseError("missing required column", path=path, line=head_line, column=col)
    keep = [c for c in list(required) + list(optional) if c in names]
    data = {c: [] for c in keep}
    for lineno, raw in rows[1:]:
        cells = next(csv.reader([raw]))
        if len(cells) != len(names):
            raise ParseError(f"expected {len(names)} fields, found {len(cells)}", path=path, line=lineno)
        for c in keep:
            cell = cells[names.index(c)].strip()
            try:
                data[c].append(float(cell))
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", path=path, line=lineno, column=c) from None
    if not data[keep[0]]:
        raise ParseError("no data rows", path=path)
    return {c: np.array(v) for c, v in data.items()}, comments


def read_trace(path):
    cols, _ = read_table(path, TRACE_COLUMNS, ("sigma",))
    try:
        return SpectrumTrace(cols["freq_hz"], cols["re_t"] + 1j * cols["im_t"], cols.get("sigma"))
    except ValueError as exc:
        raise ParseError(str(exc), path=path) from None


def read_noise_sweep(path):
    cols, _ = read_table(path, NOISE_COLUMNS)
    try:
        return [NoiseSweepPoint(t, s) for t, s in zip(cols["temperature_k"], cols["psd_w_per_hz"])]
    except ValueError as exc:
        raise ParseError(str(exc), path=path) from None


def read_sweep(path, reference_hz=None):
    """Read a pump-sweep CSV.

    The reference frequency comes from the argument or, failing that, a
    ``# reference_hz <value>`` header line.
    """
    cols, comments = read_table(path, SWEEP_COLUMNS, SWEEP_SIGMAS)
    if reference_hz is None:
        if "reference_hz" not in comments:
            raise ParseError("no reference frequency: pass one or add '# reference_hz <Hz>'", path=path)
        try:
            reference_hz = float(comments["reference_hz"])
        except ValueError:
            raise ParseError("bad reference_hz header", path=path) from None
    ss = cols.get("sigma_shift_hz")
    sg = cols.get("sigma_gamma_hz")
    points = []
    for i in range(cols["n_photons"].size):
        try:
            points.append(SweepPoint(
                cols["n_photons"][i], cols["pump_detuning_hz"][i], cols["shift_hz"][i], cols["gamma_i_hz"][i],
                None if ss is None else ss[i], None if sg is None else sg[i],
            ))
        except ValueError as exc:
            raise ParseError(str(exc), path=path, column="n_photons") from None
    return SweepDataset(points, reference_hz)


def write_csv(path, columns, rows, header=()):
    buf = _io.StringIO()
    for line in header:
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue())


def write_sweep(path, dataset, header=()):
    sig = dataset.sigma_shift_hz is not None and dataset.sigma_gamma_hz is not None
    cols = SWEEP_COLUMNS + (SWEEP_SIGMAS if sig else ())
    rows = []
    for p in dataset.points:
        row = [p.n_photons, p.detuning, p.measured_shift, p.measured_gamma_i]
        if sig:
            row += [p.sigma_shift, p.sigma_gamma]
        rows.append(row)
    write_csv(path, cols, rows, list(header) + [f"# reference_hz {fmt(dataset.reference_hz)}"])


def write_keyvalue(path, values, header=()):
    lines = list(header) + [f"{k} = {fmt(v)}" for k, v in values.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_keyvalue(path):
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ParseError("expected 'key = value'", path=path, line=lineno)
        k, v = (t.strip() for t in s.split("=", 1))
        out[k] = v
    return out


class Section:
    """Typed, key-checked access to one INI section."""

    def __init__(self, name, mapping, path):
        self.name, self._m, self._path = name, mapping, path

    def __contains__(self, key):
        return key in self._m

    def get(self, key, default=None):
        if key not in self._m:
            if default is None:
                raise ConfigError(f"{self._path}: missing key '{key}' in section [{self.name}]", key)
            return default
        return self._m[key]

    def float(self, key, default=None):
        v = self.get(key, default)
        try:
            return float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{self._path}: key '{key}' in [{self.name}] is not a number: {v!r}", key) from None

    def int(self, key, default=None):
        v = self.float(key, default)
        if v != int(v):
            raise ConfigError(f"{self._path}: key '{key}' in [{self.name}] must be an integer", key)
        return int(v)

    def path(self, key, default=None):
        v = self.get(key, default)
        p = Path(v)
        if not p.is_absolute():
            p = Path(self._path).parent / p
        return p


def read_config(path, required_sections=()):
    """Parse an INI file into ``{section: Section}``; missing sections raise ConfigError."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    for sec in required_sections:
        if not parser.has_section(sec):
            raise ConfigError(f"{path}: missing section [{sec}]", sec)
    return {s: Section(s, dict(parser[s]), path) for s in parser.sections()}
