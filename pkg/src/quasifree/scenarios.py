"""Experiment harness: slippage demonstration, separable control, CP sweeps, scans.

Configs are plain JSON documents::

    {
      "params": {"omega1": 0, "omega2": 0, "eta": 1, "sigma": 0, "lam": [0.8, 0]},
      "initial_state": {"kind": "critical",
                        "g1": {"beta": 2, "alpha": [0, 0]},
                        "g2": {"beta": 2, "alpha": [0, 0]}},
      "horizon": 3.0, "dt": 0.01, "seed": 0
    }

Params with ``omega1``/``omega2`` keys are two-mode, otherwise single-mode
(``omega``). Initial-state kinds: ``vacuum``, ``thermal`` (``beta``),
``boundary`` (``beta``; single-mode only), ``critical`` and ``product``
(``g1``, ``g2``), ``explicit`` (``state`` in the JSON state schema).
Sweeps additionally read ``n_params``, ``n_states`` and the optional
``zero_dissipation`` flag; without ``horizon`` each parameter set runs to
``5 / max(eta + sigma, 1)``.

Random draws use numpy's Philox counter-based generator; each parameter set
gets its own child stream spawned from ``SeedSequence(seed)``.
"""
import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .errors import NotApplicable, StructureError
from .semigroup import (
    SingleModeParams,
    TwoModeParams,
    drift_for,
    drift_single,
    drift_two,
    first_negativity_time,
    flow_closed,
    is_completely_positive,
    negative_eigvec_B,
    quadratic_form_rate,
    time_grid,
    worst_boundary_state,
)
from .states import (
    SingleModeState,
    TwoModeState,
    build_critical_state,
    null_eigenvector,
    ppt_witness,
    state_from_json,
    state_from_matrix,
)

STATE_KINDS = ("vacuum", "thermal", "boundary", "critical", "product", "explicit")


def _complex(value, name):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise StructureError(f"{name} must be a number or a [re, im] pair")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    raise StructureError(f"{name} must be a number or a [re, im] pair")


def params_from_dict(doc):
    if not isinstance(doc, dict):
        raise StructureError("'params' must be a JSON object")
    lam = _complex(doc.get("lam", 0.0), "lam")
    common = dict(eta=float(doc.get("eta", 0.0)), sigma=float(doc.get("sigma", 0.0)), lam=lam)
    if "omega1" in doc or "omega2" in doc:
        unknown = set(doc) - {"omega1", "omega2", "eta", "sigma", "lam"}
        if unknown:
            raise StructureError(f"unknown params fields: {sorted(unknown)}")
        return TwoModeParams(omega1=float(doc.get("omega1", 0.0)),
                             omega2=float(doc.get("omega2", 0.0)), **common)
    unknown = set(doc) - {"omega", "eta", "sigma", "lam"}
    if unknown:
        raise StructureError(f"unknown params fields: {sorted(unknown)}")
    return SingleModeParams(omega=float(doc.get("omega", 0.0)), **common)


def params_to_dict(params):
    lam = [params.lam.real, params.lam.imag]
    if isinstance(params, TwoModeParams):
        return {"omega1": params.omega1, "omega2": params.omega2,
                "eta": params.eta, "sigma": params.sigma, "lam": lam}
    return {"omega": params.omega, "eta": params.eta, "sigma": params.sigma, "lam": lam}


def _single_from_dict(doc, name):
    if not isinstance(doc, dict) or "beta" not in doc:
        raise StructureError(f"'{name}' must be an object with 'beta' (and optional 'alpha')")
    return SingleModeState.from_moments(float(doc["beta"]), _complex(doc.get("alpha", 0.0), "alpha"))


@dataclass(frozen=True)
class ScenarioConfig:
    params: object
    initial_state: dict
    horizon: Optional[float] = None
    dt: float = 0.01
    seed: int = 0
    n_params: int = 20
    n_states: int = 200
    zero_dissipation: bool = False

    def __post_init__(self):
        if self.horizon is not None and not self.horizon > 0:
            raise StructureError("horizon must be positive")
        if not self.dt > 0:
            raise StructureError("dt must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise StructureError("seed must be a 64-bit unsigned integer")
        if self.n_params <= 0 or self.n_states <= 0:
            raise StructureError("n_params and n_states must be positive")
        kind = self.initial_state.get("kind")
        if kind not in STATE_KINDS:
            raise StructureError(f"initial_state.kind must be one of {STATE_KINDS}, got {kind!r}")

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise StructureError("config must be a JSON object")
        known = {"params", "initial_state", "horizon", "dt", "seed",
                 "n_params", "n_states", "zero_dissipation"}
        unknown = set(doc) - known
        if unknown:
            raise StructureError(f"unknown config fields: {sorted(unknown)}")
        horizon = doc.get("horizon")
        return cls(
            params=params_from_dict(doc.get("params", {})),
            initial_state=doc.get("initial_state", {"kind": "vacuum"}),
            horizon=None if horizon is None else float(horizon),
            dt=float(doc.get("dt", 0.01)),
            seed=int(doc.get("seed", 0)),
            n_params=int(doc.get("n_params", 20)),
            n_states=int(doc.get("n_states", 200)),
            zero_dissipation=bool(doc.get("zero_dissipation", False)),
        )

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def build_state(self):
        """Expand the initial-state description into a state object."""
        desc = self.initial_state
        kind = desc["kind"]
        two = isinstance(self.params, TwoModeParams)
        if kind == "vacuum":
            return TwoModeState.vacuum() if two else SingleModeState.vacuum()
        if kind == "thermal":
            g = SingleModeState.thermal(float(desc["beta"]))
            return TwoModeState.product(g, g) if two else g
        if kind == "boundary":
            if two:
                raise StructureError("'boundary' initial state is single-mode only")
            return worst_boundary_state(self.params, float(desc["beta"]))
        if kind == "explicit":
            return state_from_json(desc.get("state"))
        g1 = _single_from_dict(desc.get("g1"), "g1")
        g2 = _single_from_dict(desc.get("g2"), "g2")
        if kind == "critical":
            return build_critical_state(g1, g2)
        return TwoModeState.product(g1, g2)

    def marginal_inputs(self):
        desc = self.initial_state
        return _single_from_dict(desc.get("g1"), "g1"), _single_from_dict(desc.get("g2"), "g2")


# -- sampling laws ---------------------------------------------------------

def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed, n):
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def sample_single_mode_state(rng):
    beta = 1.0 + 9.0 * rng.uniform()
    mag = math.sqrt(beta * (beta - 1.0) * rng.uniform())
    phase = rng.uniform(0.0, 2.0 * math.pi)
    return SingleModeState.from_moments(beta, mag * np.exp(1j * phase))


def _sample_params(rng, w_low, w_high, two_mode):
    eta, sigma = rng.uniform(0.0, 2.0, size=2)
    w = rng.uniform(w_low, w_high)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    omega = rng.uniform(0.0, 2.0)
    lam = math.sqrt(eta * sigma * w) * np.exp(1j * theta)
    if two_mode:
        return TwoModeParams(omega1=omega, omega2=rng.uniform(0.0, 2.0), eta=eta, sigma=sigma, lam=lam)
    return SingleModeParams(omega=omega, eta=eta, sigma=sigma, lam=lam)


def sample_cp_params(rng, two_mode=False):
    """eta, sigma ~ U[0, 2]; lam = sqrt(eta sigma w) e^{i theta}, w ~ U[0, 1]."""
    return _sample_params(rng, 0.0, 1.0, two_mode)


def sample_noncp_params(rng, two_mode=False):
    """As ``sample_cp_params`` but with w ~ U(1, 4], so eta sigma < |lam|^2."""
    while True:
        params = _sample_params(rng, np.nextafter(1.0, 2.0), 4.0, two_mode)
        if not is_completely_positive(params):
            return params


# -- slippage ----------------------------------------------------------------

@dataclass(frozen=True)
class SlippageReport:
    cp_verdict: bool
    entangled_at_t0: bool
    min_eig_pt_t0: float
    psi_block_rate: Optional[float]
    rate_compound: Optional[float]
    t_neg_compound: Optional[float]
    t_neg_marginal1: Optional[float]
    t_neg_marginal2: Optional[float]
    min_eig_marginal1_at_t_neg: Optional[float]
    min_eig_marginal2_at_t_neg: Optional[float]
    verdict: str

    def to_dict(self):
        return dict(self.__dict__)


def _precedes(t_first, t_other):
    return t_other is None or t_first < t_other - 1e-9


def _onset_report(state, params, horizon, dt, rate_info=(None, None)):
    drift = drift_two(params)
    t_c = first_negativity_time(state.G, drift, horizon, dt)
    t_1 = first_negativity_time(state.G1, drift.restrict(1), horizon, dt)
    t_2 = first_negativity_time(state.G2, drift.restrict(2), horizon, dt)
    m1 = m2 = None
    if t_c is not None:
        Gt = flow_closed(state.G, drift, [t_c])[0]
        m1 = float(linalg.min_eigenvalue(Gt[:2, :2]))
        m2 = float(linalg.min_eigenvalue(Gt[2:, 2:]))
    fails = t_c is not None and _precedes(t_c, t_1) and _precedes(t_c, t_2)
    pt = ppt_witness(state)
    return SlippageReport(
        cp_verdict=is_completely_positive(params),
        entangled_at_t0=pt.entangled,
        min_eig_pt_t0=pt.min_eig_pt,
        psi_block_rate=rate_info[0],
        rate_compound=rate_info[1],
        t_neg_compound=t_c,
        t_neg_marginal1=t_1,
        t_neg_marginal2=t_2,
        min_eig_marginal1_at_t_neg=m1,
        min_eig_marginal2_at_t_neg=m2,
        verdict="slippage_fails" if fails else "consistent",
    )


def _two_mode(params):
    if isinstance(params, TwoModeParams):
        return params
    return TwoModeParams(omega1=params.omega, eta=params.eta, sigma=params.sigma, lam=params.lam)


def _horizon(config):
    return config.horizon if config.horizon is not None else 5.0


def run_slippage_demo(config):
    """Evolve the critical entangled state and compare onset times with its marginals."""
    params = _two_mode(config.params)
    if is_completely_positive(params):
        raise NotApplicable("parameters are completely positive; the slippage demo is vacuous")
    g1, g2 = config.marginal_inputs()
    state = build_critical_state(g1, g2)
    drift = drift_two(params)
    eig, psi = negative_eigvec_B(drift)
    Psi = null_eigenvector(state, psi)
    rate = quadratic_form_rate(state, drift, Psi)
    return _onset_report(state, params, _horizon(config), config.dt, (eig, rate))


def run_separable_control(config):
    """Same dynamics, but starting from the uncorrelated product of the marginals."""
    params = _two_mode(config.params)
    g1, g2 = config.marginal_inputs()
    return _onset_report(TwoModeState.product(g1, g2), params, _horizon(config), config.dt)


# -- CP sweep ----------------------------------------------------------------

def _sweep_one(rng, config):
    if config.zero_dissipation:
        params = SingleModeParams(omega=rng.uniform(0.0, 2.0))
    else:
        params = sample_cp_params(rng)
    G0 = np.stack([sample_single_mode_state(rng).G for _ in range(config.n_states)])
    horizon = config.horizon
    if horizon is None:
        horizon = 5.0 / max(params.eta + params.sigma, 1.0)
    Gt = flow_closed(G0, drift_single(params), time_grid(horizon, config.dt))
    return float(np.min(linalg.min_eigenvalue(Gt)))


def run_cp_sweep(config):
    """Global minimum eigenvalue over random CP parameter sets and random states."""
    results = [_sweep_one(rng, config) for rng in spawn_rngs(config.seed, config.n_params)]
    return {"n_states": config.n_states, "n_params": config.n_params,
            "min_min_eig": min(results)}


# -- trajectories ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: list
    min_eig_G: np.ndarray
    min_eig_G1: Optional[np.ndarray] = None
    min_eig_G2: Optional[np.ndarray] = None
    modes: int = field(init=False)

    def __post_init__(self):
        n = len(self.times)
        if n == 0:
            raise ValueError("trajectory must be nonempty")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        cols = [self.states, self.min_eig_G] + [c for c in (self.min_eig_G1, self.min_eig_G2) if c is not None]
        if any(len(c) != n for c in cols):
            raise ValueError("trajectory columns must have equal length")
        object.__setattr__(self, "modes", self.states[0].modes)

    @property
    def matrices(self):
        return np.stack([s.G for s in self.states])


def scan(state, drift, horizon, dt):
    """Closed-form evolution on the uniform grid ``0, dt, ..., horizon``."""
    times = time_grid(horizon, dt)
    Gt = flow_closed(state.G, drift, times)
    states = [state_from_matrix(G) for G in Gt]
    if state.modes == 1:
        return Trajectory(times, states, linalg.min_eigenvalue(Gt))
    return Trajectory(times, states, linalg.min_eigenvalue(Gt),
                      linalg.min_eigenvalue(Gt[:, :2, :2]), linalg.min_eigenvalue(Gt[:, 2:, 2:]))


def run_single_mode_scan(config):
    if not isinstance(config.params, SingleModeParams):
        raise StructureError("single-mode scan needs single-mode params")
    state = config.build_state()
    if state.modes != 1:
        raise StructureError("single-mode scan needs a single-mode initial state")
    return scan(state, drift_single(config.params), _horizon(config), config.dt)


def run_scan(config):
    state = config.build_state()
    params = config.params
    if state.modes == 2:
        params = _two_mode(params)
    elif isinstance(params, TwoModeParams):
        params = params.mode1()
    return scan(state, drift_for(params), _horizon(config), config.dt)


def _fmt(x):
    return format(float(x), ".17g")


def csv_header(modes):
    n = 2 * modes
    cols = ["t", "min_eig_G", "min_eig_G1", "min_eig_G2"]
    for i in range(n):
        for j in range(i, n):
            cols += [f"re_G{i}{j}", f"im_G{i}{j}"]
    return cols


def _csv_text(traj):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(traj.modes))
    n = 2 * traj.modes
    upper = np.triu_indices(n)
    for k, t in enumerate(traj.times):
        row = [_fmt(t), _fmt(traj.min_eig_G[k])]
        for col in (traj.min_eig_G1, traj.min_eig_G2):
            row.append("" if col is None else _fmt(col[k]))
        for z in traj.states[k].G[upper]:
            row += [_fmt(z.real), _fmt(z.imag)]
        writer.writerow(row)
    return buf.getvalue()


def _column(values):
    return None if values is None else [float(_fmt(v)) for v in values]


def trajectory_to_json(traj):
    return {
        "modes": traj.modes,
        "times": _column(traj.times),
        "matrices": [[[[float(_fmt(z.real)), float(_fmt(z.imag))] for z in row] for row in s.G]
                     for s in traj.states],
        "min_eig_G": _column(traj.min_eig_G),
        "min_eig_G1": _column(traj.min_eig_G1),
        "min_eig_G2": _column(traj.min_eig_G2),
    }


def trajectory_from_json(doc):
    mats = np.array(doc["matrices"], dtype=float)
    Gs = mats[..., 0] + 1j * mats[..., 1]

    def col(name):
        return None if doc.get(name) is None else np.array(doc[name], dtype=float)

    return Trajectory(np.array(doc["times"], dtype=float), [state_from_matrix(G) for G in Gs],
                      col("min_eig_G"), col("min_eig_G1"), col("min_eig_G2"))


def emit_timeseries(traj, format, sink):
    """Write ``traj`` as CSV or JSON to a path or a text stream."""
    if format == "csv":
        text = _csv_text(traj)
    elif format == "json":
        text = json.dumps(trajectory_to_json(traj)) + "\n"
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w") as fh:
            fh.write(text)
