"""Execute manifests and assemble JSON reports."""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import asdict
import json
import logging
import math
from pathlib import Path
import time
from typing import Dict, List, Optional

import numpy as np

from ..asymfit import FitBasisSpec, SampleGrid, fit_expansion, read_samples_csv, write_samples_csv
from ..kernels import DiskBundleModel, ReinhardtProfile, fourier_mode_check, kernel_diagonal
from ..kernels.diskbundle import fiber_polynomial, minus_rho_derivative, poly_equal
from ..volumes import (
    ConfigResult, LReport, VolumeExperiment, catlin_exact, log_invariant, run_experiment,
    tube_singular_coefficients,
)
from .manifest import Manifest

logger = logging.getLogger("crlab")

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2

# acceptance thresholds
BALL_TOL = 1e-6
TUBE_TOL = 1e-8
L_BOUND = 1e-2
DISCRIMINATION = 1e-3


@contextmanager
def stage(name: str):
    t0 = time.perf_counter()
    logger.info("stage %s: start", name)
    yield
    logger.info("stage %s: done in %.3f s", name, time.perf_counter() - t0)


def _check(name: str, ok, detail: str) -> dict:
    return {"name": name, "pass": bool(ok), "detail": detail}


def sample_count(m: Manifest, lo: float, hi: float, default: int) -> int:
    """Sample count implied by ``grid_ratio`` (consecutive ratio), else ``default``."""
    if m.grid_ratio is None:
        return default
    return max(4, int(round(math.log(hi / lo) / math.log(m.grid_ratio))) + 1)


def _experiment(m: Manifest, name: str, model) -> VolumeExperiment:
    pole = model.n if isinstance(model, DiskBundleModel) else 2
    return VolumeExperiment(
        name, model,
        eps=(m.eps_min, m.eps_max, sample_count(m, m.eps_min, m.eps_max, m.samples)),
        rho=(m.rho_min, m.rho_max, sample_count(m, m.rho_min, m.rho_max, m.rho_samples)),
        fit=FitBasisSpec(pole, m.smooth, m.highlog), A_max=m.alpha_max, quad_tol=m.quad_tol,
        boundary_nodes=m.boundary_nodes, cache_dir=m.cache_dir,
    )


def _profile(profile: str, weight: str = "", density: str = "") -> ReinhardtProfile:
    return ReinhardtProfile.from_strings(profile, weight, density)


def _dump_samples(csv_dir: Optional[str], res: ConfigResult) -> None:
    if csv_dir is None:
        return
    out = Path(csv_dir)
    out.mkdir(parents=True, exist_ok=True)
    s = res.samples
    if "volume" in s:
        write_samples_csv(out / f"{res.name}_volume.csv", SampleGrid(s["eps"], s["volume"]))
    if "szego" in s:
        vals = np.atleast_2d(s["szego"])
        for i, row in enumerate(vals):
            write_samples_csv(out / f"{res.name}_szego_{i:03d}.csv", SampleGrid(s["rho"], row))


def _base_report(m: Manifest) -> dict:
    params = {k: v for k, v in asdict(m).items() if k not in ("out", "configs")}
    if m.configs:
        params["configs"] = [asdict(c) for c in m.configs]
    return {"experiment": m.kind, "params": params, "coefficients": {"C": [], "L": None},
            "uncertainty": {}, "residual": None, "condition": None, "runtime_ms": 0, "checks": []}


def _fill_from_config(report: dict, res: ConfigResult) -> None:
    vf = res.volume_fit
    report["coefficients"] = {"C": list(res.C), "L": res.L_volume}
    report["uncertainty"] = {"C": list(res.C_uncertainty), "L": res.L_volume_uncertainty,
                             "L_szego": res.L_szego_uncertainty}
    report["coefficients"]["L_szego"] = res.L_szego
    if vf is not None:
        report["residual"] = vf.residual
        report["condition"] = vf.condition
    for f in res.flags:
        report["checks"].append(_check("fit conditioning", False, f))


def run_ball(m: Manifest) -> dict:
    report = _base_report(m)
    prof = ReinhardtProfile.ball()
    with stage("ball experiment"):
        res = run_experiment(_experiment(m, m.name, prof))
    _fill_from_config(report, res)
    _dump_samples(m.csv_dir, res)
    C = res.C
    checks = report["checks"]
    checks.append(_check("C0 = 1", abs(C[0] - 1) <= BALL_TOL, f"C0 = {C[0]:.17g}"))
    checks.append(_check("C1 = -2", abs(C[1] + 2) <= BALL_TOL, f"C1 = {C[1]:.17g}"))
    checks.append(_check("|L_volume| <= 1e-6", abs(res.L_volume) <= BALL_TOL, f"L = {res.L_volume:.3e}"))
    checks.append(_check("|L_szego| <= 1e-6", abs(res.L_szego) <= BALL_TOL, f"L = {res.L_szego:.3e}"))
    eps, vol = res.samples["eps"], res.samples["volume"]
    ref = eps**-2 - 2 / eps + 1
    err = float(np.max(np.abs(vol / ref - 1)))
    checks.append(_check("volume closed form", err <= BALL_TOL, f"max relative error {err:.3e}"))
    psi = float(np.max(np.abs(res.psi_hat)))
    checks.append(_check("pointwise psi_hat <= 1e-6", psi <= BALL_TOL, f"max |psi_hat| = {psi:.3e}"))
    with stage("szego closed form"):
        from ..kernels import cached_norms

        table = cached_norms(prof, m.alpha_max, m.quad_tol, m.cache_dir)
        worst = 0.0
        for r1, r2 in [(0.0, 0.0), (0.3, 0.2), (0.45, 0.45), (0.9, 0.0), (0.1, 0.7)]:
            val = float(kernel_diagonal(table, "szego", (r1, r2), tol=1e-12, tail_correction=True))
            worst = max(worst, abs(val * math.pi**2 * (1 - r1 - r2) ** 2 - 1))
    checks.append(_check("szego closed form", worst <= 1e-8, f"max relative error {worst:.3e}"))
    return report


def section_count_matches(model: DiskBundleModel, m: int) -> bool:
    """The FFT mode at ``rho = 0`` rounds to ``P(m)`` and sits within 1e-9 of it."""
    mode, _ = fourier_mode_check(model, m, 0.0)
    target = model.P(m)
    close = abs(mode - float(target)) <= 1e-9 * max(1.0, abs(float(target)))
    if target.denominator == 1:
        return close and round(mode) == target
    return close


def run_tube(m: Manifest) -> dict:
    report = _base_report(m)
    model = DiskBundleModel.from_string(m.hilbert)
    with stage("tube experiment"):
        res = run_experiment(_experiment(m, m.name, model))
    _fill_from_config(report, res)
    _dump_samples(m.csv_dir, res)
    checks = report["checks"]
    expected = [float(c) for c in tube_singular_coefficients(model)]
    dC = max(abs(a - b) for a, b in zip(res.C, expected))
    checks.append(_check("singular coefficients k! c_k", dC <= TUBE_TOL, f"max deviation {dC:.3e}"))
    checks.append(_check("|L| <= 1e-8", abs(res.L_volume) <= TUBE_TOL, f"L = {res.L_volume:.3e}"))
    checks.append(_check("|L_szego| <= 1e-8", abs(res.L_szego) <= TUBE_TOL, f"L = {res.L_szego:.3e}"))
    S, B = fiber_polynomial(model, "szego"), fiber_polynomial(model, "bergman")
    checks.append(_check("-dS/drho = B", poly_equal(minus_rho_derivative(S), B), "exact y-polynomials"))
    checks.append(_check("catlin identity", catlin_exact(model), "exact y-polynomials"))
    with stage("fourier modes"):
        bad = [k for k in range(51) if not section_count_matches(model, k)]
    checks.append(_check("fourier modes d_m = P(m), m <= 50", not bad, f"mismatches at {bad}" if bad else "all match"))
    return report


def run_reinhardt(m: Manifest) -> dict:
    report = _base_report(m)
    prof = _profile(m.profile, m.weight, m.density)
    with stage("reinhardt experiment"):
        res = run_experiment(_experiment(m, m.name, prof))
    _fill_from_config(report, res)
    _dump_samples(m.csv_dir, res)
    rep = LReport([res])
    checks = report["checks"]
    checks.append(_check("routes agree", rep.agree(), f"L_volume = {res.L_volume:.3e}, L_szego = {res.L_szego:.3e}"))
    checks.append(_check("|L| <= 1e-2", rep.max_abs_L() <= L_BOUND, f"max |L| = {rep.max_abs_L():.3e}"))
    return report


def run_linvariant(m: Manifest) -> dict:
    report = _base_report(m)
    exps = []
    for c in m.configs:
        model = DiskBundleModel.from_string(c.hilbert) if c.hilbert else _profile(c.profile, c.weight, c.density)
        exps.append(_experiment(m, c.name, model))
    with stage(f"log invariant over {len(exps)} configurations"):
        rep: LReport = log_invariant(exps)
    for res in rep.configs:
        _dump_samples(m.csv_dir, res)
    report["coefficients"] = {"C": {r.name: r.C for r in rep.configs},
                              "L": {r.name: {"volume": r.L_volume, "szego": r.L_szego} for r in rep.configs}}
    report["uncertainty"] = {"C": {r.name: r.C_uncertainty for r in rep.configs},
                             "L": {r.name: {"volume": r.L_volume_uncertainty, "szego": r.L_szego_uncertainty}
                                   for r in rep.configs}}
    report["residual"] = {r.name: r.volume_fit.residual for r in rep.configs if r.volume_fit}
    report["condition"] = {r.name: r.volume_fit.condition for r in rep.configs if r.volume_fit}
    checks = report["checks"]
    checks.append(_check("all L agree within uncertainty", rep.agree(), f"{len(rep.all_L())} values"))
    checks.append(_check("|L| <= 1e-2", rep.max_abs_L() <= L_BOUND, f"max |L| = {rep.max_abs_L():.3e}"))
    if len(rep.configs) >= 2:
        spread = rep.C_spread()
        best = max(spread) if spread else 0.0
        checks.append(_check("some C_j moves by > 1e-3", best > DISCRIMINATION,
                             "C spread " + ", ".join(f"{s:.3e}" for s in spread)))
    for f in rep.flags:
        checks.append(_check("fit conditioning", False, f))
    return report


def run_fit(m: Manifest) -> dict:
    report = _base_report(m)
    samples = read_samples_csv(m.data)
    with stage("fit"):
        fit = fit_expansion(samples, FitBasisSpec(m.pole_order, m.smooth, m.highlog))
    report["coefficients"] = {"C": list(fit.C), "L": fit.L, "smooth": list(fit.smooth),
                              "highlog": list(fit.highlog)}
    report["uncertainty"] = {k: v for k, v in fit.uncertainty.items()}
    report["residual"] = fit.residual
    report["condition"] = fit.condition
    report["checks"].append(_check("well conditioned", not fit.ill_conditioned, f"condition {fit.condition:.3e}"))
    for w in fit.warnings:
        report["checks"].append(_check("fit warning", False, w))
    return report


def run_symbols(m: Manifest) -> dict:
    from ..symbolcalc import selftest

    report = _base_report(m)
    with stage(f"symbol selftest ({m.count} symbols)"):
        results = selftest(m.count, m.seed)
    report["coefficients"] = {"C": [], "L": None}
    for name, ok in results.items():
        report["checks"].append(_check(name, ok, "exact"))
    return report


def run_psi2(m: Manifest) -> dict:
    from ..pseudoherm import PseudohermitianData, integrate_exact, psi_density

    report = _base_report(m)
    with open(m.input) as fh:
        data = PseudohermitianData.from_json(json.load(fh))
    with stage("psi density"):
        psi = psi_density(data)
        total = integrate_exact(psi)
    report["coefficients"] = {"C": [], "L": complex(total).real, "psi": psi.to_json(),
                              "L_exact": total.to_json()}
    checks = report["checks"]
    checks.append(_check("psi is real", psi.is_real, "conjugate-symmetric coefficients"))
    checks.append(_check("integral is real", total.im == 0, f"{total!r}"))
    if not data.A:
        checks.append(_check("torsion-free integral vanishes", not total, f"{total!r}"))
    return report


RUNNERS = {
    "ball": run_ball, "tube": run_tube, "reinhardt": run_reinhardt, "linvariant": run_linvariant,
    "fit": run_fit, "symbols": run_symbols, "psi2": run_psi2,
}


def run_manifest(m: Manifest, deterministic: bool = False):
    """Run ``m``; returns ``(exit_code, report)``."""
    t0 = time.perf_counter()
    report = RUNNERS[m.kind](m)
    report["runtime_ms"] = 0 if deterministic else int(round(1000 * (time.perf_counter() - t0)))
    code = EXIT_OK if all(c["pass"] for c in report["checks"]) else EXIT_CHECK_FAILED
    return code, report


def _json_value(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    return json.dumps(str(x))


def dumps_report(report: Dict) -> str:
    """JSON with floats at 17 significant digits and insertion-ordered keys."""
    return _json_value(report) + "\n"
