"""Scenario orchestration: nested key-value scenario files in, deterministic
CSV/metadata artifacts out.

A scenario file is YAML with sections ``geometry``, ``material``, ``wave``,
``outputs`` plus per-mode sections (``scan``, ``scaling``, ``spectrum``,
``compare``) and a top-level ``mode``.  Two parameter rules are expanded
before dispatch and the resolved numbers recorded in the metadata:

* ``wave.omega: cbrt(delta)`` (or ``delta^(1/3)``) — frequency from the tube
  radius;
* ``material.eps_c: -1+i*omega^4`` (or ``figure``) — the near-critical
  permittivity tied to that frequency.

Environment variables with the ``RODBEM_`` prefix override file values for
CI (``RODBEM_WAVE__OMEGA=0.02`` targets ``wave.omega``; values are parsed as
YAML scalars).  All artifacts use shortest round-trip float formatting, LF
line endings and fixed ordering, so a rerun of the same scenario is
byte-identical.

Exit-code contract (enforced by the CLI): invalid configuration raises
:class:`ConfigError` (exit 2, diagnostics carry the offending key and, when
known, the line); solver breakdowns raise :class:`NumericalError` with the
condition estimate (exit 3).
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from . import asymptotics as asym
from . import geometry as geo
from . import solver as sol
from . import spectral
from .kernels import Wavenumbers, wavenumbers

MODES = (
    "solve",
    "spectrum",
    "scan",
    "scaling",
    "figure1",
    "figure2",
    "asymptotic-compare",
    "mesh",
)
SCAN_AXES = ("omega", "rho", "delta", "eps_c-real")
ENV_PREFIX = "RODBEM_"

# scenario modes each CLI command accepts; the first entry is the default
# when the file does not name one ("mesh" ignores the file's mode entirely)
COMMAND_MODES = {
    "mesh": ("mesh",),
    "spectrum": ("spectrum",),
    "solve": ("solve", "asymptotic-compare"),
    "scan": ("scan",),
    "scaling": ("scaling",),
    "figure": ("figure1", "figure2"),
}

# mesh/grid defaults per --resolution level; the desk level realizes the
# default 201x201 slice grid over 1.5x the bounding rectangle
RESOLUTION_LEVELS = {
    "coarse": dict(n_axial=16, n_circum=8, cap_refine=3, sphere_refine=2, grid_n=101),
    "desk": dict(n_axial=24, n_circum=12, cap_refine=4, sphere_refine=3, grid_n=201),
    "fine": dict(n_axial=48, n_circum=16, cap_refine=5, sphere_refine=4, grid_n=301),
}

_OMEGA_RULES = ("cbrt(delta)", "delta^(1/3)")
_EPS_RULES = ("-1+i*omega^4", "figure")


class ConfigError(ValueError):
    """Scenario file cannot be used; carries a key path and line when known."""

    def __init__(self, message: str, path=None, key: str = "", line: Optional[int] = None):
        where = str(path) if path else "scenario"
        if line is not None:
            where += f":{line}"
        if key:
            where += f": {key}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.key = key
        self.line = line


class NumericalError(RuntimeError):
    """A solve or postprocessing step broke down numerically."""

    def __init__(self, message: str, cond: Optional[float] = None):
        if cond is not None:
            message += f" (condition estimate {cond:.3e})"
        super().__init__(message)
        self.cond = cond


@dataclass(frozen=True)
class Scenario:
    """A fully resolved run description (all parameter rules expanded)."""

    mode: str
    # geometry
    kind: str = "straight"
    length: float = 4.0
    delta: float = 0.25
    n_axial: int = 24
    n_circum: int = 12
    cap_refine: int = 4
    sphere_refine: int = 3
    sphere_radius: float = 1.0
    # material (None = not required by this mode)
    eps_c: Optional[complex] = None
    eps_m: float = 1.0
    mu_c: float = 1.0
    mu_m: float = 1.0
    eps_c_rule: Optional[str] = None
    # incident wave
    direction: tuple = (0.0, 0.0, 1.0)
    amplitude: float = 1e3
    omega: Optional[float] = None
    omega_rule: Optional[str] = None
    # outputs
    out_dir: str = "out"
    grid_n: int = 201
    grid_scale: float = 1.5
    box: Optional[tuple] = None
    h: Optional[float] = None
    collar: Optional[float] = None
    # spectrum / compare
    n_modes: int = 30
    eta0: Optional[float] = None
    compare_modes: Optional[tuple] = None
    # scan
    scan_axis: Optional[str] = None
    scan_values: tuple = ()
    mode_index: Optional[int] = None
    # scaling
    scaling_omegas: tuple = (0.04, 0.02, 0.01)
    scaling_exponent: float = 2.0
    # provenance for diagnostics
    source: Optional[str] = None


@dataclass(frozen=True)
class SweepRow:
    """One parameter point of a sweep; ``status`` is ``ok`` or an error tag."""

    value: float
    E_o: float
    E_i: float
    electric: float
    theta_max: float
    min_abs_tau: float
    cond: float
    status: str = "ok"


@dataclass(frozen=True)
class RunResult:
    mode: str
    out_dir: Path
    artifacts: tuple
    metadata: dict


# ---------------------------------------------------------------------------
# scenario loading


def _deep_update(base: dict, extra: dict) -> dict:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def env_overrides(environ=None) -> dict:
    """Nested override dict from ``RODBEM_SECTION__KEY`` environment variables."""
    environ = os.environ if environ is None else environ
    out: dict = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        parts = [p.lower() for p in name[len(ENV_PREFIX):].split("__") if p]
        if not parts:
            continue
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return out


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    # best effort: first line whose stripped content starts with the last
    # key segment — good enough to anchor diagnostics in hand-written files
    if not text:
        return None
    leaf = key.split(".")[-1]
    for i, line in enumerate(text.splitlines(), start=1):
        if line.strip().startswith(f"{leaf}:"):
            return i
    return None


class _Reader:
    """Typed access into the raw config dict with anchored diagnostics."""

    def __init__(self, data: dict, path, text: Optional[str]):
        self.data = data
        self.path = path
        self.text = text

    def fail(self, key: str, message: str):
        raise ConfigError(message, self.path, key, _line_of(self.text, key))

    def get(self, dotted: str, default=None):
        node = self.data
        for part in dotted.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def number(self, dotted: str, default=None, positive: bool = False):
        raw = self.get(dotted, default)
        if raw is None:
            return None
        try:
            value = float(raw)
        except (TypeError, ValueError):
            self.fail(dotted, f"expected a number, got {raw!r}")
        if not np.isfinite(value) or (positive and value <= 0.0):
            self.fail(dotted, f"expected a {'positive ' if positive else ''}finite number, got {raw!r}")
        return value

    def integer(self, dotted: str, default=None, minimum: Optional[int] = None):
        raw = self.get(dotted, default)
        if raw is None:
            return None
        if not isinstance(raw, int) or isinstance(raw, bool):
            self.fail(dotted, f"expected an integer, got {raw!r}")
        if minimum is not None and raw < minimum:
            self.fail(dotted, f"must be >= {minimum}, got {raw}")
        return raw

    def complex_number(self, dotted: str):
        """Number, two-element [re, im] list, or a complex literal string."""
        raw = self.get(dotted)
        if raw is None:
            return None
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return complex(float(raw), 0.0)
        if isinstance(raw, (list, tuple)) and len(raw) == 2:
            try:
                return complex(float(raw[0]), float(raw[1]))
            except (TypeError, ValueError):
                self.fail(dotted, f"expected [re, im] numbers, got {raw!r}")
        if isinstance(raw, str):
            try:
                return complex(raw.replace(" ", ""))
            except ValueError:
                self.fail(dotted, f"not a complex literal: {raw!r}")
        self.fail(dotted, f"expected a number, [re, im], or literal, got {raw!r}")

    def vector3(self, dotted: str, default=None):
        raw = self.get(dotted, default)
        if raw is None:
            return None
        if not isinstance(raw, (list, tuple)) or len(raw) != 3:
            self.fail(dotted, f"expected a 3-vector, got {raw!r}")
        try:
            return tuple(float(v) for v in raw)
        except (TypeError, ValueError):
            self.fail(dotted, f"expected a 3-vector of numbers, got {raw!r}")


def load_scenario(
    path,
    command: Optional[str] = None,
    resolution: Optional[str] = None,
    overrides: Optional[dict] = None,
    environ=None,
) -> Scenario:
    """Parse, override, rule-expand and validate a scenario file.

    Precedence (lowest to highest): resolution-level defaults, file values,
    ``RODBEM_*`` environment overrides, explicit ``overrides``.  ``command``
    names the CLI subcommand: the file's ``mode`` must be one the command
    accepts (see :data:`COMMAND_MODES`) and defaults to the command's first
    mode when absent.  Parameter rules are expanded last, once every input
    they depend on is settled.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}", path)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"not valid YAML: {exc}", path, line=line)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", path)

    _deep_update(data, env_overrides(environ))
    if overrides:
        _deep_update(data, overrides)
    r = _Reader(data, path, text)

    file_mode = r.get("mode")
    if command is not None:
        if command not in COMMAND_MODES:
            raise ConfigError(f"unknown command {command!r}", path)
        allowed = COMMAND_MODES[command]
        if command == "mesh":
            run_mode = "mesh"
        else:
            run_mode = file_mode or allowed[0]
            if run_mode not in allowed:
                r.fail(
                    "mode",
                    f"scenario says {file_mode!r} but `{command}` runs {allowed}",
                )
    else:
        run_mode = file_mode
        if run_mode is None:
            r.fail("mode", "missing run mode")
    if run_mode not in MODES:
        r.fail("mode", f"unknown mode {run_mode!r}; expected one of {MODES}")

    level = resolution or r.get("outputs.resolution") or "desk"
    if level not in RESOLUTION_LEVELS:
        r.fail("outputs.resolution", f"unknown resolution level {level!r}")
    res = RESOLUTION_LEVELS[level]

    kind = r.get("geometry.kind")
    if run_mode == "figure1":
        kind = kind or "straight"
        if kind != "straight":
            r.fail("geometry.kind", "figure1 is the straight-rod scenario")
    elif run_mode == "figure2":
        kind = kind or "bent"
        if kind != "bent":
            r.fail("geometry.kind", "figure2 is the curved-rod scenario")
    kind = kind or "straight"
    if kind not in ("straight", "bent", "sphere"):
        r.fail("geometry.kind", f"unknown geometry kind {kind!r}")

    delta = r.number("geometry.delta", 0.25, positive=True)

    # frequency: number or rule string
    raw_omega = r.get("wave.omega")
    omega = None
    omega_rule = None
    if isinstance(raw_omega, str):
        rule = raw_omega.strip().lower()
        if rule not in _OMEGA_RULES:
            r.fail("wave.omega", f"unknown rule {raw_omega!r}; expected one of {_OMEGA_RULES}")
        omega_rule = rule
        omega = float(delta ** (1.0 / 3.0))
    elif raw_omega is not None:
        omega = r.number("wave.omega", positive=True)
    elif run_mode in ("figure1", "figure2"):
        omega_rule = _OMEGA_RULES[0]
        omega = float(delta ** (1.0 / 3.0))

    # permittivity: number/list/literal or rule string
    raw_eps = r.get("material.eps_c")
    eps_c = None
    eps_c_rule = None
    if isinstance(raw_eps, str) and raw_eps.strip().lower() in _EPS_RULES:
        eps_c_rule = raw_eps.strip().lower()
    elif raw_eps is None and run_mode in ("figure1", "figure2"):
        eps_c_rule = _EPS_RULES[0]
    elif raw_eps is not None:
        eps_c = r.complex_number("material.eps_c")
    if eps_c_rule is not None:
        if omega is None:
            r.fail("material.eps_c", "the eps_c rule needs wave.omega (or its rule)")
        eps_c = complex(-1.0, omega**4)

    scan_axis = r.get("scan.axis")
    scan_values: tuple = ()
    if run_mode == "scan":
        if scan_axis not in SCAN_AXES:
            r.fail("scan.axis", f"expected one of {SCAN_AXES}, got {scan_axis!r}")
        raw_values = r.get("scan.values")
        if not isinstance(raw_values, (list, tuple)) or not raw_values:
            r.fail("scan.values", "expected a non-empty list of numbers")
        try:
            scan_values = tuple(float(v) for v in raw_values)
        except (TypeError, ValueError):
            r.fail("scan.values", f"expected numbers, got {raw_values!r}")
        if scan_axis in ("omega", "rho", "delta") and any(v <= 0 for v in scan_values):
            r.fail("scan.values", f"{scan_axis} values must be positive "
                   "(rho values quote the loss magnitude)")

    compare_modes = None
    raw_compare = r.get("compare.modes")
    if raw_compare is not None:
        if not isinstance(raw_compare, (list, tuple)) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in raw_compare
        ):
            r.fail("compare.modes", f"expected a list of mode indices, got {raw_compare!r}")
        compare_modes = tuple(int(v) for v in raw_compare)

    raw_box = r.get("outputs.box")
    box = None
    if raw_box is not None:
        try:
            lo = tuple(float(v) for v in raw_box[0])
            hi = tuple(float(v) for v in raw_box[1])
            if len(raw_box) != 2 or len(lo) != 3 or len(hi) != 3:
                raise ValueError
        except (TypeError, ValueError, IndexError, KeyError):
            r.fail("outputs.box", f"expected [[x,y,z],[x,y,z]], got {raw_box!r}")
        box = (lo, hi)

    collar = r.number("outputs.collar", None)
    if collar is not None and collar < 0.0:
        r.fail("outputs.collar", f"must be >= 0, got {collar}")

    scaling_omegas = (0.04, 0.02, 0.01)
    raw_so = r.get("scaling.omegas")
    if raw_so is not None:
        if not isinstance(raw_so, (list, tuple)) or not raw_so:
            r.fail("scaling.omegas", "expected a non-empty list of frequencies")
        try:
            scaling_omegas = tuple(float(v) for v in raw_so)
        except (TypeError, ValueError):
            r.fail("scaling.omegas", f"expected numbers, got {raw_so!r}")
        if any(v <= 0 for v in scaling_omegas):
            r.fail("scaling.omegas", "frequencies must be positive")

    sc = Scenario(
        mode=run_mode,
        kind=kind,
        length=r.number("geometry.length", 4.0, positive=True),
        delta=delta,
        n_axial=r.integer("geometry.n_axial", res["n_axial"], minimum=4),
        n_circum=r.integer("geometry.n_circum", res["n_circum"], minimum=6),
        cap_refine=r.integer("geometry.cap_refine", res["cap_refine"], minimum=2),
        sphere_refine=r.integer("geometry.refine", res["sphere_refine"], minimum=0),
        sphere_radius=r.number("geometry.radius", 1.0, positive=True),
        eps_c=eps_c,
        eps_m=r.number("material.eps_m", 1.0, positive=True),
        mu_c=r.number("material.mu_c", 1.0, positive=True),
        mu_m=r.number("material.mu_m", 1.0, positive=True),
        eps_c_rule=eps_c_rule,
        direction=r.vector3("wave.direction", (0.0, 0.0, 1.0)),
        amplitude=r.number("wave.amplitude", 1e3, positive=True),
        omega=omega,
        omega_rule=omega_rule,
        out_dir=str(r.get("outputs.dir", "out")),
        grid_n=r.integer("outputs.grid_n", res["grid_n"], minimum=2),
        grid_scale=r.number("outputs.grid_scale", 1.5, positive=True),
        box=box,
        h=r.number("outputs.h", None, positive=True),
        collar=collar,
        n_modes=r.integer("spectrum.modes", 30, minimum=2),
        eta0=r.number("spectrum.eta0", None, positive=True),
        compare_modes=compare_modes,
        scan_axis=scan_axis if run_mode == "scan" else None,
        scan_values=scan_values,
        mode_index=r.integer("scan.mode_index", r.integer("scaling.mode_index", None, minimum=1), minimum=1),
        scaling_omegas=scaling_omegas,
        scaling_exponent=r.number("scaling.exponent", 2.0, positive=True),
        source=str(path),
    )
    _check_required(sc, r)
    return sc


def _check_required(sc: Scenario, r: _Reader) -> None:
    needs_eps = sc.mode in ("solve", "spectrum", "asymptotic-compare") or (
        sc.mode == "scan" and sc.scan_axis in ("omega", "delta", "eps_c-real")
    )
    if needs_eps and sc.eps_c is None:
        r.fail("material.eps_c", "this mode needs a permittivity (or a rule)")
    needs_omega = sc.mode in ("solve", "asymptotic-compare") or (
        sc.mode == "scan" and sc.scan_axis in ("rho", "delta", "eps_c-real")
    )
    if needs_omega and sc.omega is None:
        r.fail("wave.omega", "this mode needs a frequency (or a rule)")
    if sc.mode == "scaling" or (sc.mode == "scan" and sc.scan_axis == "rho"):
        if sc.mode_index is None:
            r.fail("scan.mode_index", "resonance pinning needs the driven mode index")
    if sc.mode in ("figure1", "figure2", "asymptotic-compare", "scan", "scaling") and sc.kind == "sphere":
        r.fail("geometry.kind", f"{sc.mode} needs a rod geometry")


# ---------------------------------------------------------------------------
# building blocks


def build_scenario_mesh(sc: Scenario) -> geo.SurfaceMesh:
    try:
        if sc.kind == "sphere":
            return geo.build_sphere_mesh(refine=sc.sphere_refine, radius=sc.sphere_radius)
        curve = geo.build_centerline(sc.kind, length=sc.length)
        spec = geo.RodSpec(
            curve=curve,
            delta=sc.delta,
            n_axial=sc.n_axial,
            n_circum=sc.n_circum,
            cap_refine=sc.cap_refine,
        )
        return geo.build_rod_mesh(spec)
    except ValueError as exc:
        raise ConfigError(f"geometry rejected: {exc}", sc.source, "geometry") from exc


def slice_grid(mesh: geo.SurfaceMesh, n: int = 201, scale: float = 1.5) -> np.ndarray:
    """Points of the default field slice: the (x2, x3)-plane at x1 = 0,
    covering ``scale`` times the surface's bounding rectangle, ``n`` per axis.
    Row order is x2-major (x3 varies fastest)."""
    verts = mesh.vertices.reshape(-1, 3)
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    center = 0.5 * (lo + hi)
    half = 0.5 * scale * (hi - lo)
    ys = np.linspace(center[1] - half[1], center[1] + half[1], int(n))
    zs = np.linspace(center[2] - half[2], center[2] + half[2], int(n))
    Y, Z = np.meshgrid(ys, zs, indexing="ij")
    return np.column_stack([np.zeros(Y.size), Y.ravel(), Z.ravel()])


def _material(sc: Scenario, omega: Optional[float] = None, eps_c: Optional[complex] = None) -> Wavenumbers:
    om = sc.omega if omega is None else omega
    if eps_c is None:
        eps = sc.eps_c
        # sweeps that move omega re-expand the permittivity rule per value
        if sc.eps_c_rule is not None and omega is not None:
            eps = complex(-1.0, om**4)
    else:
        eps = eps_c
    try:
        return wavenumbers(om, eps, eps_m=sc.eps_m, mu_c=sc.mu_c, mu_m=sc.mu_m)
    except ValueError as exc:
        raise ConfigError(f"material rejected: {exc}", sc.source, "material") from exc


def _wave(sc: Scenario, material: Wavenumbers, direction=None) -> sol.IncidentWave:
    return sol.plane_wave(direction or sc.direction, material, amplitude=sc.amplitude)


def _solve(mesh: geo.SurfaceMesh, material: Wavenumbers, wave: sol.IncidentWave) -> sol.DensityPair:
    try:
        densities = sol.solve_transmission(mesh, material, wave)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"transmission solve failed: {exc}") from exc
    except ValueError as exc:
        # the solver's own rejection (near-singular system); its message
        # already carries the condition estimate
        raise NumericalError(f"transmission solve rejected: {exc}") from exc
    if not np.isfinite(densities.cond):
        raise NumericalError("system condition estimate is not finite", cond=densities.cond)
    if not (np.all(np.isfinite(densities.psi)) and np.all(np.isfinite(densities.phi))):
        raise NumericalError("solution densities are not finite", cond=densities.cond)
    return densities


def _energies(densities, material, wave, sc: Scenario) -> sol.EnergyReport:
    try:
        return sol.energies(densities, material, wave, box=sc.box, h=sc.h, collar=sc.collar)
    except ValueError as exc:
        raise ConfigError(f"energy grid rejected: {exc}", sc.source, "outputs.box") from exc


def _theta_max(grid: sol.FieldGrid) -> float:
    valid = grid.valid
    return float(grid.theta[valid].max()) if valid.any() else float("nan")


def _tau(sc: Scenario, spectrum, eps_c: complex):
    if sc.eta0 is not None:
        return spectral.tau_values(spectrum, eps_c, sc.eps_m, eta0=sc.eta0)
    return spectral.tau_values(spectrum, eps_c, sc.eps_m)


# ---------------------------------------------------------------------------
# sweeps


def _pinned_lambda(mesh: geo.SurfaceMesh, mode_index: int) -> float:
    # raw assembled-operator eigenvalue: resonance pinning must match the
    # operator the solver actually inverts, not the symmetrized spectrum
    return float(spectral.raw_adjoint_lambdas(mesh, mode_index + 1)[mode_index])


def sweep(
    sc: Scenario,
    axis: str,
    values: Sequence[float],
    threads: int = 1,
) -> list:
    """One solve per value along ``axis``; failures are recorded per row.

    Row contents: box energies, the slice-grid strength maximum, the distance
    to resonance min_j |tau_j| over nontrivial modes, and the system condition
    estimate.  ``rho`` values quote the loss magnitude |Im(1/eps_c)| and pin
    Re(1/eps_c) to the resonance of ``scenario.mode_index`` (raw-operator
    eigenvalue); ``eps_c-real`` keeps the scenario's Im(eps_c).
    """
    if axis not in SCAN_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SCAN_AXES}", sc.source, "scan.axis")
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("empty sweep", sc.source, "scan.values")

    shared_mesh = None
    shared_spectrum = None
    pinned = None
    if axis != "delta":
        shared_mesh = build_scenario_mesh(sc)
        shared_spectrum = spectral.np_spectrum(shared_mesh, min(sc.n_modes, shared_mesh.n_panels))
        if axis == "rho":
            pinned = _pinned_lambda(shared_mesh, sc.mode_index)

    def one(value: float) -> SweepRow:
        try:
            if axis == "delta":
                run_sc = replace(sc, delta=value)
                mesh = build_scenario_mesh(run_sc)
                spec = spectral.np_spectrum(mesh, min(sc.n_modes, mesh.n_panels))
            else:
                run_sc, mesh, spec = sc, shared_mesh, shared_spectrum
            omega = value if axis == "omega" else sc.omega
            if axis == "rho":
                eps_c = spectral.resonant_permittivity_from_lambda(pinned, sc.eps_m, -value)
            elif axis == "eps_c-real":
                eps_c = complex(value, sc.eps_c.imag)
            else:
                eps_c = None
            material = _material(run_sc, omega=omega, eps_c=eps_c)
            wave = _wave(run_sc, material)
            params = _tau(sc, spec, material.eps_c)
            densities = _solve(mesh, material, wave)
            report = _energies(densities, material, wave, run_sc)
            grid = sol.eval_field(
                densities, material, wave,
                slice_grid(mesh, n=sc.grid_n, scale=sc.grid_scale),
                collar=sc.collar,
            )
            return SweepRow(
                value=value,
                E_o=report.E_o,
                E_i=report.E_i,
                electric=report.electric,
                theta_max=_theta_max(grid),
                min_abs_tau=float(np.min(np.abs(params.tau[1:]))),
                cond=float(densities.cond),
                status="ok",
            )
        except (ConfigError, NumericalError, ValueError, np.linalg.LinAlgError) as exc:
            nan = float("nan")
            return SweepRow(value, nan, nan, nan, nan, nan, nan, f"error:{type(exc).__name__}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            return list(pool.map(one, values))
    return [one(v) for v in values]


def write_sweep_csv(rows: Sequence[SweepRow], axis: str, path) -> None:
    """Schema: <axis>,E_o,E_i,electric,theta_max,min_abs_tau,cond,status."""
    name = axis.replace("-", "_")
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{name},E_o,E_i,electric,theta_max,min_abs_tau,cond,status\n")
        for row in rows:
            fh.write(
                f"{row.value!r},{row.E_o!r},{row.E_i!r},{row.electric!r},"
                f"{row.theta_max!r},{row.min_abs_tau!r},{row.cond!r},{row.status}\n"
            )


# ---------------------------------------------------------------------------
# mode runners


def _run_solve(sc: Scenario, out: Path):
    mesh = build_scenario_mesh(sc)
    material = _material(sc)
    wave = _wave(sc, material)
    densities = _solve(mesh, material, wave)
    grid = sol.eval_field(
        densities, material, wave, slice_grid(mesh, sc.grid_n, sc.grid_scale), collar=sc.collar
    )
    report = _energies(densities, material, wave, sc)
    asym.write_field_csv(grid, out / "field.csv", source="full")
    sol.write_energies_csv(report, out / "energies.csv")
    meta = {
        "panels": int(mesh.n_panels),
        "cond": float(densities.cond),
        "residual": float(densities.residual),
        "E_o": report.E_o,
        "E_i": report.E_i,
        "electric": report.electric,
        "theta_max": _theta_max(grid),
    }
    return ["field.csv", "energies.csv"], meta


def _run_spectrum(sc: Scenario, out: Path):
    mesh = build_scenario_mesh(sc)
    spectrum = spectral.np_spectrum(mesh, min(sc.n_modes, mesh.n_panels))
    params = _tau(sc, spectrum, sc.eps_c)
    spectral.write_spectrum_csv(out / "spectrum.csv", spectrum, params)
    (out / "spectrum.txt").write_text(spectral.spectrum_report(spectrum, params), newline="\n")
    meta = {
        "panels": int(mesh.n_panels),
        "modes": int(spectrum.n_modes),
        "lambda_head": [float(v) for v in spectrum.lambdas[: min(8, spectrum.n_modes)]],
        "index_set": sorted(int(j) for j in params.index_set),
    }
    return ["spectrum.csv", "spectrum.txt"], meta


def _run_scan(sc: Scenario, out: Path, threads: int):
    rows = sweep(sc, sc.scan_axis, sc.scan_values, threads=threads)
    write_sweep_csv(rows, sc.scan_axis, out / "scan.csv")
    meta = {
        "axis": sc.scan_axis,
        "values": list(sc.scan_values),
        "failures": [row.value for row in rows if row.status != "ok"],
    }
    return ["scan.csv"], meta


def _run_scaling(sc: Scenario, out: Path):
    mesh = build_scenario_mesh(sc)
    pinned = _pinned_lambda(mesh, sc.mode_index)
    rows = []
    for omega in sc.scaling_omegas:
        rho = -(omega**sc.scaling_exponent)
        eps_c = spectral.resonant_permittivity_from_lambda(pinned, sc.eps_m, rho)
        material = _material(sc, omega=omega, eps_c=eps_c)
        wave = _wave(sc, material)
        densities = _solve(mesh, material, wave)
        report = _energies(densities, material, wave, sc)
        pred = asym.blowup_scaling_prediction(omega, rho, sc.delta)
        rows.append(
            asym.ScalingRow(
                omega=omega, rho=rho, delta=sc.delta, e_full=report.E_o, e_pred=pred.dominant
            )
        )
    asym.write_scaling_csv(rows, out / "scaling.csv")
    meta = {
        "panels": int(mesh.n_panels),
        "mode_index": sc.mode_index,
        "pinned_lambda": pinned,
        "exponent": sc.scaling_exponent,
        "E_full": [row.e_full for row in rows],
    }
    return ["scaling.csv"], meta


def _run_figure(sc: Scenario, out: Path):
    mesh = build_scenario_mesh(sc)
    material = _material(sc)
    pts = slice_grid(mesh, sc.grid_n, sc.grid_scale)
    artifacts = []
    meta: dict = {"panels": int(mesh.n_panels), "directions": {}}
    for tag, direction in (("d100", (1.0, 0.0, 0.0)), ("d001", (0.0, 0.0, 1.0))):
        wave = _wave(sc, material, direction=direction)
        densities = _solve(mesh, material, wave)
        grid = sol.eval_field(densities, material, wave, pts, collar=sc.collar)
        report = _energies(densities, material, wave, sc)
        asym.write_field_csv(grid, out / f"field_{tag}.csv", source="full")
        sol.write_energies_csv(report, out / f"energies_{tag}.csv")
        artifacts += [f"field_{tag}.csv", f"energies_{tag}.csv"]
        meta["directions"][tag] = {
            "E_o": report.E_o,
            "E_i": report.E_i,
            "electric": report.electric,
            "cond": float(densities.cond),
            "theta_max": _theta_max(grid),
        }
    return artifacts, meta


def _run_compare(sc: Scenario, out: Path):
    mesh = build_scenario_mesh(sc)
    material = _material(sc)
    wave = _wave(sc, material)
    densities = _solve(mesh, material, wave)
    pts = slice_grid(mesh, sc.grid_n, sc.grid_scale)
    collar = sc.collar if sc.collar is not None else mesh.max_diameter()
    grid_full = sol.eval_field(densities, material, wave, pts, collar=collar)

    spectrum = spectral.np_spectrum(mesh, min(sc.n_modes, mesh.n_panels))
    params = _tau(sc, spectrum, sc.eps_c)
    model = asym.build_quasistatic_model(spectrum, params, sc.direction, mu_m=sc.mu_m)
    J = sc.compare_modes if sc.compare_modes is not None else tuple(range(1, spectrum.n_modes))
    grid_asym = asym.eval_asymptotic_field(
        model, wave, sc.omega, sc.delta, J, pts, collar=collar
    )
    asym.write_field_csv(grid_full, out / "field_full.csv", source="full")
    asym.write_field_csv(grid_asym, out / "field_asym.csv", source="asymptotic")

    mask = (grid_full.labels == geo.OUTSIDE) & (grid_asym.labels == geo.OUTSIDE)
    denom = float(np.linalg.norm(grid_full.us[mask]))
    rel = float(np.linalg.norm(grid_asym.us[mask] - grid_full.us[mask]) / denom) if denom > 0 else float("nan")
    with open(out / "compare.csv", "w", newline="\n") as fh:
        fh.write("n_points,rel_err_us,theta_max_full,theta_max_asym\n")
        fh.write(
            f"{int(mask.sum())},{rel!r},{_theta_max(grid_full)!r},{_theta_max(grid_asym)!r}\n"
        )
    meta = {
        "panels": int(mesh.n_panels),
        "modes": [int(j) for j in J],
        "rel_err_us": rel,
        "cond": float(densities.cond),
    }
    return ["field_full.csv", "field_asym.csv", "compare.csv"], meta


def _run_mesh(sc: Scenario, out: Path):
    mesh = build_scenario_mesh(sc)
    geo.export_mesh(mesh, out / "mesh.txt")
    meta = {"panels": int(mesh.n_panels), "max_diameter": float(mesh.max_diameter())}
    return ["mesh.txt"], meta


def scenario_metadata(sc: Scenario) -> dict:
    """JSON-safe dump of every resolved parameter."""
    out: dict = {}
    for name, value in vars(sc).items():
        if isinstance(value, complex):
            out[name] = [value.real, value.imag]
        elif isinstance(value, tuple):
            out[name] = [list(v) if isinstance(v, tuple) else v for v in value]
        else:
            out[name] = value
    return out


def run(sc: Scenario, out_dir=None, threads: int = 1) -> RunResult:
    """Dispatch a scenario and write its artifacts plus ``metadata.json``.

    Deterministic by construction: fixed artifact names and row ordering,
    shortest round-trip floats, no wall-clock content.
    """
    out = Path(out_dir) if out_dir is not None else Path(sc.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}", sc.source, "outputs.dir")

    runners = {
        "solve": lambda: _run_solve(sc, out),
        "spectrum": lambda: _run_spectrum(sc, out),
        "scan": lambda: _run_scan(sc, out, threads),
        "scaling": lambda: _run_scaling(sc, out),
        "figure1": lambda: _run_figure(sc, out),
        "figure2": lambda: _run_figure(sc, out),
        "asymptotic-compare": lambda: _run_compare(sc, out),
        "mesh": lambda: _run_mesh(sc, out),
    }
    artifacts, extra = runners[sc.mode]()

    import rodbem
    import scipy

    metadata = {
        "mode": sc.mode,
        "scenario": scenario_metadata(sc),
        "artifacts": list(artifacts),
        "results": extra,
        "versions": {
            "rodbem": rodbem.__version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    with open(out / "metadata.json", "w", newline="\n") as fh:
        json.dump(metadata, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return RunResult(
        mode=sc.mode,
        out_dir=out,
        artifacts=tuple(list(artifacts) + ["metadata.json"]),
        metadata=metadata,
    )
