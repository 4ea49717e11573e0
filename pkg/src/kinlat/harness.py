"""Run orchestration: pipelines, sweeps, manifests, determinism.

``run`` executes one configured pipeline into an output directory and
returns a :class:`RunManifest` listing every produced file with its
checksum.  Reruns with the same config and seed are byte-identical: seeds
are explicit, replica streams are keyed ``[seed, replica]``, reductions
are fixed-order, and worker count only changes scheduling — replica work
is cut into fixed-size chunks whose shapes never depend on how many
workers drain them.  Wall-clock timestamps appear in the manifest only,
and the manifest is not part of its own file list.

``sweep`` reruns a base config along one numeric axis (same seed — the
children share random numbers, which is what makes trend comparisons
across the axis meaningful), aggregates each child's headline metric, and
issues a monotone-trend verdict.
"""

from __future__ import annotations

import concurrent.futures
import copy
import datetime
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _reference as ref
from ._backend import default_backend
from .chain import (
    ChainGeometry,
    FractionalParams,
    GaussianLaw,
    chain_energy,
    sample_ensemble,
    site_coordinates,
    total_momentum,
    verlet_evolve,
)
from .config import (
    RunConfig,
    build_law,
    build_profile,
    config_hash,
    parse_config,
)
from .errors import CheckFailure, ConfigError, NumericalBlowupError
from .io import (
    sha256_file,
    write_amplitude_snapshot,
    write_chain_snapshot_csv,
    write_csv,
    write_json,
    write_moments_csv,
    write_phase_density,
    write_spectrum_csv,
)
from .kinetic import (
    CollisionDiagnostics,
    ResonanceRule,
    Spectrum,
    TorusGrid,
    collision,
    compare_spectra,
    energy_moment,
    evolve,
    nodes,
)
from .lattice import LatticeSpec, dft, inverse_dft, weighted_inner
from .vlasov import (
    PhaseGrid,
    cell_moments_of_density,
    cell_moments_of_ensemble,
    density_from_law,
    meanfield_distance,
    sigma_field,
    vlasov_evolve,
    x_centers,
)
from .waves import (
    EnsembleSpec,
    ModelParams,
    _integrate_array,
    empirical_spectrum,
    sample_initial,
    stack_ensemble,
)

__all__ = [
    "RunManifest",
    "CheckResult",
    "run",
    "sweep",
    "default_workers",
    "REPLICA_CHUNK",
    "PIPELINE_METRIC",
]

ENV_WORKERS = "KINLAT_WORKERS"

# chunk size is a function of nothing: array shapes entering the kernels must
# not depend on worker count, or bit-identity across pools would be luck
REPLICA_CHUNK = 8

PIPELINE_METRIC = {
    "wt-sim": "reality_defect",
    "wt-kinetic": "stationarity_l1",
    "wt-compare": "distance_l2",
    "chain-sim": "energy_drift_rel",
    "vlasov": "mass_drift_rel",
    "mf-compare": "distance_l2",
    "oracle-suite": "n_failed",
}


def default_workers() -> int:
    raw = os.environ.get(ENV_WORKERS, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class RunManifest:
    pipeline: str
    config_hash: str
    seed: int
    backend: str
    out_dir: str
    status: str = "ok"
    started: str = ""
    finished: str = ""
    versions: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    snapshot: str | None = None

    def to_dict(self) -> dict:
        d = {
            "pipeline": self.pipeline,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "backend": self.backend,
            "out_dir": self.out_dir,
            "status": self.status,
            "started": self.started,
            "finished": self.finished,
            "versions": self.versions,
            "files": self.files,
            "metrics": self.metrics,
            "checks": [vars(c) for c in self.checks],
        }
        if self.snapshot is not None:
            d["snapshot"] = self.snapshot
        return d


def _versions() -> dict:
    from . import __version__

    out = {"kinlat": __version__, "numpy": np.__version__}
    try:
        import numba

        out["numba"] = numba.__version__
    except ImportError:
        out["numba"] = None
    return out


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _chunks(n: int, size: int = REPLICA_CHUNK) -> list[tuple[int, int]]:
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def _map_ordered(fn, items, workers: int):
    """Apply ``fn`` over items on a thread pool, results in submission order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _file_entries(files, out_dir: Path) -> list[dict]:
    entries = []
    for p in sorted({str(f) for f in files}):
        entries.append(
            {
                "path": str(Path(p).relative_to(out_dir)),
                "sha256": sha256_file(p),
                "bytes": Path(p).stat().st_size,
            }
        )
    return entries


# ---------------------------------------------------------------------------
# pipeline drivers — each returns (files, metrics, checks)
# ---------------------------------------------------------------------------


def _integrate_ensemble(a, params, dt, n_steps, scheme, backend, workers):
    """Advance replica-stacked amplitudes chunk by chunk (fixed chunk size)."""

    def one(span):
        i0, i1 = span
        return _integrate_array(a[i0:i1].copy(), params, dt, n_steps, scheme, backend)

    parts = _map_ordered(one, _chunks(a.shape[0]), workers)
    return np.concatenate(parts, axis=0)


def _drive_wave(cfg: RunConfig, out: Path, backend, workers):
    w = cfg.wave
    spec = LatticeSpec(w.d, w.half_width)
    params = ModelParams(spec, w.lam)
    ens = EnsembleSpec(w.replicas, cfg.seed, build_profile(w.profile))
    a, _ = stack_ensemble(sample_initial(ens, spec))
    mod0 = np.abs(a[:, 0])
    files = [write_spectrum_csv(out / "spectrum_initial.csv", empirical_spectrum(a, spec, 0.0))]

    segments = []
    if w.save_every > 0:
        done = 0
        while done < w.n_steps:
            seg = min(w.save_every, w.n_steps - done)
            segments.append(seg)
            done += seg
    elif w.n_steps > 0:
        segments = [w.n_steps]

    t = 0.0
    rows = []
    try:
        for seg in segments:
            a = _integrate_ensemble(a, params, w.dt, seg, w.scheme, backend, workers)
            t += w.dt * seg
            sp = empirical_spectrum(a, spec, t)
            rows.append((t, float(sp.f.sum() * sp.grid.cell_measure), energy_moment(sp, sp.grid)))
    except NumericalBlowupError as e:
        snap, _ = write_amplitude_snapshot(
            out / "last_good",
            a[0],
            spec,
            {"t": t, "lam": w.lam, "seed": cfg.seed, "d": w.d, "half_width": w.half_width},
        )
        e.snapshot = str(snap)
        raise
    if rows:
        files.append(
            write_csv(
                out / "series.csv",
                ["t", "mass", "energy"],
                rows,
                comments=["ensemble spectrum moments along the run; t microscopic"],
            )
        )
    final = empirical_spectrum(a, spec, t)
    files.append(write_spectrum_csv(out / "spectrum_final.csv", final))
    csv_p, json_p = write_amplitude_snapshot(
        out / "amplitudes_final_r0",
        a[0],
        spec,
        {"t": t, "lam": w.lam, "seed": cfg.seed, "d": w.d, "half_width": w.half_width, "replica": 0},
    )
    files += [csv_p, json_p]

    defect = float(np.max(np.abs(a[:, 1] - np.conj(a[:, 0]))))
    metrics = {"t_final": t, "reality_defect": defect}
    checks = [CheckResult("reality-pair-preserved", defect < 1e-9, f"defect {defect:.3e}")]
    if w.lam == 0.0:
        drift = float(np.max(np.abs(np.abs(a[:, 0]) - mod0)))
        metrics["modulus_drift"] = drift
        checks.append(
            CheckResult("free-flow-moduli-frozen", drift < 1e-12, f"drift {drift:.3e}")
        )
    return files, metrics, checks


def _make_rule(k) -> ResonanceRule:
    if k.omega_floor is None:
        return ResonanceRule(k.epsilon, k.shape)
    return ResonanceRule(k.epsilon, k.shape, k.omega_floor)


def _drive_kinetic(cfg: RunConfig, out: Path, backend, workers):
    k = cfg.kinetic
    grid = TorusGrid(k.d, k.m)
    rule = _make_rule(k)
    f0 = np.asarray(build_profile(k.initial)(nodes(grid)), dtype=np.float64)
    sp = Spectrum(grid, f0, 0.0)
    files = [write_spectrum_csv(out / "spectrum_initial.csv", sp)]
    rows = [(0.0, float(sp.f.sum() * grid.cell_measure), energy_moment(sp, grid))]

    def on_step(i, s):
        rows.append((s.tau, float(s.f.sum() * grid.cell_measure), energy_moment(s, grid)))

    diag = CollisionDiagnostics()
    sp = evolve(sp, grid, rule, k.dtau, k.n_steps, k.scheme, backend, diag, on_step)
    files.append(write_spectrum_csv(out / "spectrum_final.csv", sp))
    files.append(
        write_csv(
            out / "series.csv",
            ["tau", "mass", "energy"],
            rows,
            comments=["kinetic moments; tau dimensionless"],
        )
    )
    rate = collision(sp, grid, rule, backend)
    stat = float(np.sum(np.abs(rate)) * grid.cell_measure)
    metrics = {
        "tau_final": sp.tau,
        "stationarity_l1": stat,
        "clipped_mass": diag.clipped_mass,
        "clip_events": diag.clip_events,
        "energy_initial": rows[0][2],
        "energy_final": rows[-1][2],
    }
    files.append(write_json(out / "summary.json", metrics))
    checks = [
        CheckResult(
            "spectrum-nonnegative", bool(np.all(sp.f >= 0.0)), f"min {float(sp.f.min()):.3e}"
        ),
        CheckResult(
            "clip-mass-small", diag.clipped_mass < 1e-6, f"clipped {diag.clipped_mass:.3e}"
        ),
    ]
    return files, metrics, checks


def _drive_wt_compare(cfg: RunConfig, out: Path, backend, workers):
    w, k, c = cfg.wave, cfg.kinetic, cfg.compare
    if w.lam <= 0.0:
        raise ConfigError("the kinetic comparison needs lam > 0", field="wave.lam")
    spec = LatticeSpec(w.d, w.half_width)
    params = ModelParams(spec, w.lam)
    t_final = c.tau_final / w.lam**2
    n_steps = max(1, round(t_final / w.dt))
    ens = EnsembleSpec(w.replicas, cfg.seed, build_profile(w.profile))
    a, _ = stack_ensemble(sample_initial(ens, spec))
    micro0 = empirical_spectrum(a, spec, 0.0)
    a = _integrate_ensemble(a, params, w.dt, n_steps, w.scheme, backend, workers)
    micro = empirical_spectrum(a, spec, n_steps * w.dt)
    micro.tau = w.lam**2 * micro.tau  # report on the slow clock

    grid = TorusGrid(k.d, k.m)
    rule = _make_rule(k)
    # both sides must leave from the same curve, so the wave profile seeds
    # the kinetic run too (kinetic.initial is not consulted here)
    f0 = np.asarray(build_profile(w.profile)(nodes(grid)), dtype=np.float64)
    kin0 = Spectrum(grid, f0, 0.0)
    n_tau = max(1, round(c.tau_final / k.dtau))
    kin = evolve(kin0, grid, rule, k.dtau, n_tau, k.scheme, backend)

    dist = compare_spectra(kin, micro)
    dist0 = compare_spectra(kin0, micro0)
    files = [
        write_spectrum_csv(out / "micro_initial.csv", micro0),
        write_spectrum_csv(out / "micro_final.csv", micro),
        write_spectrum_csv(out / "kinetic_initial.csv", kin0),
        write_spectrum_csv(out / "kinetic_final.csv", kin),
    ]
    metrics = {
        "lam": w.lam,
        "tau_final": c.tau_final,
        "micro_steps": n_steps,
        "distance_l1": dist.l1,
        "distance_l2": dist.l2,
        "distance_linf": dist.linf,
        "distance_l2_initial": dist0.l2,
    }
    files.append(write_json(out / "compare.json", metrics))
    gap_nodes = nodes(dist.grid).reshape(-1, dist.grid.d)
    gap_vals = dist.per_mode.reshape(-1)
    files.append(
        write_csv(
            out / "per_mode.csv",
            [f"kappa_{i}" for i in range(dist.grid.d)] + ["gap"],
            [tuple(gap_nodes[i]) + (gap_vals[i],) for i in range(gap_vals.size)],
            comments=["pointwise spectrum gap on the comparison grid"],
        )
    )
    checks = [
        CheckResult(
            "distances-finite",
            all(math.isfinite(x) for x in (dist.l1, dist.l2, dist.linf)),
            f"l2 {dist.l2:.3e}",
        )
    ]
    return files, metrics, checks


def _drive_chain(cfg: RunConfig, out: Path, backend, workers):
    c = cfg.chain
    geom = ChainGeometry(c.d, c.n)
    fp = FractionalParams(c.alpha, c.d)
    ens = sample_ensemble(build_law(c.law), geom, c.replicas, cfg.seed)
    e0 = np.atleast_1d(chain_energy(ens, geom, fp, backend=backend))
    p0 = np.atleast_1d(total_momentum(ens))
    rows = [(0.0, float(np.mean(e0)), float(np.mean(p0)))]
    sample_every = c.save_every if c.save_every > 0 else max(1, c.n_steps)

    track = {"emax": 0.0, "pmax": 0.0, "last": (ens.r.copy(), ens.v.copy(), 0.0)}

    def on_step(i, r, v, f):
        if (i + 1) % sample_every == 0 or i + 1 == c.n_steps:
            kin = 0.5 * np.sum(v * v, axis=-1)
            pot = -0.5 * np.sum(r * f, axis=-1)
            e = kin + pot
            p = np.sum(v, axis=-1)
            scale = np.maximum(np.abs(e0), 1e-300)
            track["emax"] = max(track["emax"], float(np.max(np.abs(e - e0) / scale)))
            track["pmax"] = max(track["pmax"], float(np.max(np.abs(p - p0))))
            track["last"] = (r.copy(), v.copy(), (i + 1) * c.dt)
            rows.append(((i + 1) * c.dt, float(np.mean(e)), float(np.mean(p))))

    try:
        ens = verlet_evolve(ens, geom, fp, c.dt, c.n_steps, c.force_method, backend, on_step)
    except NumericalBlowupError as e:
        r_last, v_last, t_last = track["last"]
        snap = write_chain_snapshot_csv(
            out / "last_good.csv",
            site_coordinates(geom),
            np.atleast_2d(r_last)[0],
            np.atleast_2d(v_last)[0],
            t_last,
        )
        e.snapshot = str(snap)
        raise
    files = [
        write_csv(
            out / "series.csv",
            ["t", "energy_mean", "momentum_mean"],
            rows,
            comments=["replica-averaged invariants; t in chain units"],
        ),
        write_chain_snapshot_csv(
            out / "snapshot_final_r0.csv", site_coordinates(geom), ens.r[0], ens.v[0], ens.t
        ),
    ]
    metrics = {
        "t_final": ens.t,
        "energy_drift_rel": track["emax"],
        "momentum_drift": track["pmax"],
        "replicas": ens.m,
    }
    files.append(write_json(out / "summary.json", metrics))
    p_scale = max(1.0, float(np.max(np.abs(p0))))
    checks = [
        CheckResult(
            "momentum-conserved",
            track["pmax"] < 1e-9 * p_scale + 1e-10,
            f"drift {track['pmax']:.3e}",
        ),
        CheckResult(
            "energy-bounded-drift", track["emax"] < 1e-4, f"rel drift {track['emax']:.3e}"
        ),
    ]
    return files, metrics, checks


def _drive_vlasov(cfg: RunConfig, out: Path, backend, workers):
    v = cfg.vlasov
    grid = PhaseGrid(v.mx, v.mr, v.mv, v.r_max, v.v_max)
    fp = FractionalParams(v.alpha, 1)
    g0 = density_from_law(build_law(v.law), grid)
    b0, j0 = write_phase_density(out / "density_initial", g0, v.alpha)
    g, diag = vlasov_evolve(g0, fp, v.dt, v.n_steps, v.interp, v.cfl_fraction)
    b1, j1 = write_phase_density(out / "density_final", g, v.alpha)
    mom = cell_moments_of_density(g)
    files = [
        b0,
        j0,
        b1,
        j1,
        write_moments_csv(out / "moments_final.csv", x_centers(grid), mom),
    ]
    drift = abs(diag.mass_final - diag.mass_initial) / max(diag.mass_initial, 1e-300)
    metrics = {
        "t_final": g.t,
        "mass_initial": diag.mass_initial,
        "mass_final": diag.mass_final,
        "mass_drift_rel": drift,
        "boundary_mass_max": diag.boundary_mass_max,
        "escaped_mass": diag.escaped_mass,
        "cfl_r": diag.cfl_r,
        "cfl_v": diag.cfl_v,
        "notes": diag.notes,
    }
    files.append(write_json(out / "summary.json", metrics))
    per100 = drift * (100.0 / max(1, v.n_steps))
    touched_boundary = diag.boundary_mass_max > 1e-12
    checks = [
        CheckResult(
            "density-nonnegative", bool(np.all(g.g >= 0.0)), f"min {float(g.g.min()):.3e}"
        ),
        CheckResult(
            "mass-conserved",
            per100 < 1e-8 or touched_boundary,
            f"rel drift per 100 steps {per100:.3e}"
            + ("; support touched the window edge" if touched_boundary else ""),
        ),
    ]
    return files, metrics, checks


def _paired_laws(cfg: RunConfig, grid: PhaseGrid):
    """Chain law plus its PDE twin; a degenerate r-width is grid-resolved."""
    c, cmp_ = cfg.chain, cfg.compare
    law_chain = build_law(c.law)
    default_sigma = 0.0 if c.law.kind == "cosine-gaussian" else 1.0
    sigma_cfg = float(c.law.params.get("sigma_r", default_sigma))
    if cmp_.pde_sigma_r == "auto":
        sigma_pde = max(sigma_cfg, 2.0 * grid.dr)
    else:
        sigma_pde = float(cmp_.pde_sigma_r)
    law_pde = build_law(c.law, sigma_r_override=sigma_pde)
    if not isinstance(law_pde, GaussianLaw):
        raise ConfigError(
            "mean-field comparison needs a law with a density (gaussian kinds)",
            field="chain.law.kind",
        )
    return law_chain, law_pde, sigma_pde


def _drive_mf_compare(cfg: RunConfig, out: Path, backend, workers):
    c, v, cmp_ = cfg.chain, cfg.vlasov, cfg.compare
    if c.alpha != v.alpha:
        raise ConfigError("chain and transport blocks must share alpha", field="vlasov.alpha")
    geom = ChainGeometry(c.d, c.n)
    fp = FractionalParams(c.alpha, c.d)
    grid = PhaseGrid(v.mx, v.mr, v.mv, v.r_max, v.v_max)
    t_final = cmp_.t_final
    n_chain = max(1, round(t_final / c.dt))
    n_pde = max(1, round(t_final / v.dt))
    if abs(n_chain * c.dt - n_pde * v.dt) > 1e-9:
        raise ConfigError(
            "chain.dt and vlasov.dt must both divide compare.t_final",
            field="compare.t_final",
        )
    law_chain, law_pde, sigma_pde = _paired_laws(cfg, grid)
    ens = sample_ensemble(law_chain, geom, c.replicas, cfg.seed)
    ens = verlet_evolve(ens, geom, fp, c.dt, n_chain, c.force_method, backend)
    g0 = density_from_law(law_pde, grid)
    g, diag = vlasov_evolve(g0, fp, v.dt, n_pde, v.interp, v.cfl_fraction)
    # the two clocks agree to round-off; stamp them equal for the comparison
    g.t = ens.t
    dist = meanfield_distance(g, ens, geom)
    files = [
        write_moments_csv(out / "moments_pde.csv", x_centers(grid), cell_moments_of_density(g)),
        write_moments_csv(
            out / "moments_ensemble.csv",
            x_centers(grid),
            cell_moments_of_ensemble(ens, geom, grid),
        ),
    ]
    metrics = {
        "t_final": ens.t,
        "n": c.n,
        "replicas": c.replicas,
        "sigma_r_pde": sigma_pde,
        "distance_l2": dist.total_l2,
        "distance_sup": dist.total_sup,
        "per_observable_l2": dist.l2,
        "pde_mass_drift": diag.mass_initial - diag.mass_final,
    }
    files.append(write_json(out / "compare.json", dist.to_dict() | {"n": c.n}))
    files.append(write_json(out / "summary.json", metrics))
    checks = [
        CheckResult(
            "distances-finite",
            math.isfinite(dist.total_l2) and math.isfinite(dist.total_sup),
            f"l2 {dist.total_l2:.3e}",
        )
    ]
    return files, metrics, checks


def _oracle_cases(seed: int):
    """Cross-checks of the fast paths against the literal reference sums."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xFACE]))
    cases = []

    spec = LatticeSpec(1, 4)
    f = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
    cases.append(
        (
            "transform-vs-direct-sum",
            float(np.max(np.abs(dft(spec, f) - ref.dft_direct(spec, f)))),
            1e-12,
        )
    )
    cases.append(
        ("roundtrip", float(np.max(np.abs(inverse_dft(spec, dft(spec, f)) - f))), 1e-12)
    )
    fh = dft(spec, f)
    cases.append(
        (
            "plancherel",
            abs(complex(weighted_inner(spec, f, f)) - complex(np.sum(np.conj(fh) * fh))),
            1e-12,
        )
    )

    from .waves import AmplitudeState, hamiltonian, rhs

    spec2 = LatticeSpec(1, 2)
    a = rng.standard_normal((2,) + spec2.shape) + 1j * rng.standard_normal(
        (2,) + spec2.shape
    )
    a[1] = np.conj(a[0])
    got = rhs(AmplitudeState(a, 0.0), ModelParams(spec2, 0.3))
    want = ref.wave_rhs_direct(a, spec2, 0.3)
    cases.append(("wave-rhs-vs-loop", float(np.max(np.abs(got - want))), 1e-12))

    hgot = hamiltonian(AmplitudeState(a, 0.0), ModelParams(spec2, 0.3))
    hwant = ref.hamiltonian_direct(a, spec2, 0.3)
    cases.append(("hamiltonian-vs-loop", float(abs(hgot - hwant)), 1e-12))

    grid = TorusGrid(1, 8)
    rule = ResonanceRule(0.4)
    fpos = rng.random(grid.shape) + 0.1
    spf = Spectrum(grid, fpos, 0.0)
    got = collision(spf, grid, rule)
    want = ref.collision_direct(fpos, grid, rule)
    cases.append(("collision-vs-loop", float(np.max(np.abs(got - want))), 1e-12))

    from .chain import ChainState, force_array

    geom = ChainGeometry(1, 16)
    fpar = FractionalParams(0.5, 1)
    r = rng.standard_normal(geom.n_sites)
    got = force_array(r, geom, fpar)
    want = ref.chain_force_pairs(r, geom, fpar)
    cases.append(("chain-force-vs-pairs", float(np.max(np.abs(got - want))), 1e-12))
    circ = force_array(r, geom, fpar, method="circulant")
    cases.append(("chain-force-circulant", float(np.max(np.abs(circ - want))), 1e-12))

    vvec = rng.standard_normal(geom.n_sites)
    e = chain_energy(ChainState(r, vvec), geom, fpar)
    e_ref = 0.5 * float(np.sum(vvec * vvec)) + ref.chain_potential_pairs(r, geom, fpar)
    cases.append(("chain-energy-vs-pairs", abs(e - e_ref), 1e-10))

    from .vlasov import PhaseDensity

    pg = PhaseGrid(8, 10, 6, 1.0, 1.0)
    gv = PhaseDensity(pg, rng.random(pg.shape), 0.0)
    got = sigma_field(gv, fpar)
    want = ref.sigma_field_unfactorized(gv, fpar)
    cases.append(("force-field-factorization", float(np.max(np.abs(got - want))), 1e-12))

    return cases


def _drive_oracles(cfg: RunConfig, out: Path, backend, workers):
    results = []
    n_failed = 0
    for name, value, tol in _oracle_cases(cfg.seed):
        ok = value <= tol
        n_failed += 0 if ok else 1
        results.append({"name": name, "value": value, "tol": tol, "passed": ok})
    files = [write_json(out / "oracles.json", {"cases": results})]
    metrics = {"n_cases": len(results), "n_failed": n_failed}
    checks = [
        CheckResult(r["name"], r["passed"], f"{r['value']:.3e} <= {r['tol']:.0e}")
        for r in results
    ]
    return files, metrics, checks


_DRIVERS = {
    "wt-sim": _drive_wave,
    "wt-kinetic": _drive_kinetic,
    "wt-compare": _drive_wt_compare,
    "chain-sim": _drive_chain,
    "vlasov": _drive_vlasov,
    "mf-compare": _drive_mf_compare,
    "oracle-suite": _drive_oracles,
}


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def run(
    cfg: RunConfig,
    out: str | Path | None = None,
    check: bool = False,
    workers: int | None = None,
) -> RunManifest:
    """Execute one pipeline (or its sweep wrapper) and write the manifest.

    With ``check=True`` the per-pipeline assertions must all pass or
    :class:`CheckFailure` is raised (after the manifest is written).
    """
    if cfg.sweep is not None:
        return sweep(cfg, out=out, check=check, workers=workers)
    out_dir = Path(out) if out is not None else Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if workers is None:
        workers = cfg.workers if cfg.workers is not None else default_workers()
    backend = cfg.backend  # None lets each kernel pick its default
    manifest = RunManifest(
        pipeline=cfg.pipeline,
        config_hash=config_hash(cfg),
        seed=cfg.seed,
        backend=backend or default_backend(),
        out_dir=str(out_dir),
        started=_utcnow(),
        versions=_versions(),
    )
    try:
        files, metrics, checks = _DRIVERS[cfg.pipeline](cfg, out_dir, backend, workers)
    except NumericalBlowupError as e:
        manifest.status = "numerical-failure"
        manifest.metrics = {"error": str(e)}
        manifest.snapshot = getattr(e, "snapshot", None)
        manifest.finished = _utcnow()
        write_json(out_dir / "manifest.json", manifest.to_dict())
        raise
    manifest.metrics = metrics
    manifest.checks = checks
    manifest.files = _file_entries(files, out_dir)
    failed = [c for c in checks if not c.passed]
    if check and failed:
        manifest.status = "checks-failed"
    manifest.finished = _utcnow()
    write_json(out_dir / "manifest.json", manifest.to_dict())
    if check and failed:
        raise CheckFailure("; ".join(f"{c.name}: {c.detail}" for c in failed))
    return manifest


def _set_axis(doc: dict, axis: str, value: float) -> dict:
    parts = axis.split(".")
    node = doc
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise ConfigError(f"sweep axis {axis!r} missing block {p!r}", field="sweep.axis")
        node = node[p]
    leaf = parts[-1]
    if leaf not in node:
        raise ConfigError(f"sweep axis {axis!r} names an absent field", field="sweep.axis")
    if isinstance(node[leaf], int) and not isinstance(node[leaf], bool):
        if float(value) != int(value):
            raise ConfigError(
                f"axis {axis!r} is integer-valued, got {value}", field="sweep.values"
            )
        node[leaf] = int(value)
    else:
        node[leaf] = float(value)
    return doc


def sweep(
    cfg: RunConfig,
    out: str | Path | None = None,
    check: bool = False,
    workers: int | None = None,
) -> RunManifest:
    """Rerun the base pipeline along the sweep axis and grade the trend.

    Children share the base seed (common random numbers).  The aggregate
    table carries the pipeline's headline metric per axis value; the
    verdict is ``non-increasing`` when every successive difference is
    non-positive up to a relative slack of 1e-9, ``violated`` otherwise,
    and ``partial`` when any child failed.
    """
    if cfg.sweep is None:
        raise ConfigError("sweep invoked without a sweep block", field="sweep")
    out_dir = Path(out) if out is not None else Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if workers is None:
        workers = cfg.workers if cfg.workers is not None else default_workers()
    metric = PIPELINE_METRIC[cfg.pipeline]
    axis, values = cfg.sweep.axis, list(cfg.sweep.values)

    base_doc = {k: v for k, v in cfg.raw.items() if k != "sweep"}

    def one(value):
        child_doc = _set_axis(copy.deepcopy(base_doc), axis, value)
        child = parse_config(child_doc)
        child_out = out_dir / f"{axis.replace('.', '-')}={value:g}"
        try:
            man = run(child, out=child_out, check=False, workers=1)
            return {
                "value": value,
                "dir": child_out.name,
                "status": man.status,
                "metric": man.metrics.get(metric),
                "hash": man.config_hash,
            }
        except NumericalBlowupError as e:
            return {
                "value": value,
                "dir": child_out.name,
                "status": "numerical-failure",
                "metric": None,
                "error": str(e),
            }

    results = _map_ordered(one, values, workers)

    series = [r["metric"] for r in results]
    partial = any(x is None for x in series)
    verdict = "partial"
    if not partial:
        ok = all(
            series[i + 1] <= series[i] * (1.0 + 1e-9) + 1e-15
            for i in range(len(series) - 1)
        )
        verdict = "non-increasing" if ok else "violated"
    rows = [
        (r["value"], "" if r["metric"] is None else r["metric"], r["status"])
        for r in results
    ]
    files = [
        write_csv(
            out_dir / "sweep.csv",
            ["value", metric, "status"],
            rows,
            comments=[f"axis {axis}; children share the base seed"],
        ),
        write_json(
            out_dir / "sweep.json",
            {
                "axis": axis,
                "values": values,
                "metric": metric,
                "results": results,
                "verdict": verdict,
            },
        ),
    ]
    manifest = RunManifest(
        pipeline=cfg.pipeline,
        config_hash=config_hash(cfg),
        seed=cfg.seed,
        backend=cfg.backend or default_backend(),
        out_dir=str(out_dir),
        started=_utcnow(),
        versions=_versions(),
        status="ok" if not partial else "partial",
    )
    manifest.metrics = {"axis": axis, "verdict": verdict, metric: series}
    manifest.files = _file_entries(files, out_dir)
    done = sum(x is not None for x in series)
    manifest.checks = [
        CheckResult("sweep-complete", not partial, f"{done}/{len(results)} children")
    ]
    manifest.finished = _utcnow()
    write_json(out_dir / "manifest.json", manifest.to_dict())
    if check and partial:
        raise CheckFailure("sweep incomplete: a child failed")
    return manifest
