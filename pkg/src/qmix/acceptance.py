"""Executable acceptance recipes.

Each criterion function runs one end-to-end check at its stated tolerance
and returns a CriterionResult; ``run_all`` drives the full list.  The
pytest suite asserts on these results and the ``qmix repro`` subcommand
prints them, so the claims stay executable from both entry points.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import boxdim, circle, pdp
from .cli import main as cli_main
from .exponent import (
    classify_mixing,
    default_probe_set,
    lambda_q_analytic,
    lambda_q_numeric,
)
from .lindblad import (
    Fluorescence,
    SigmaXConjugation,
    Tetrahedron,
    Zeno,
    analytic_bloch_paths,
    analytic_evolve,
    build_model,
    evolve,
    generator_apply,
    stationary_state,
)
from .states import (
    IDENTITY2,
    from_bloch,
    pure_state,
    random_density,
    relative_entropy,
    to_bloch,
    trace_norm,
)


@dataclass
class CriterionResult:
    cid: int
    description: str
    passed: bool
    detail: str
    elapsed: float


def _result(cid: int, description: str, fn: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashed recipe is a failed criterion
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(cid, description, passed, detail, time.perf_counter() - start)


def criterion_1() -> CriterionResult:
    """Tetrahedron exponent (4/3) kappa alpha^2 from the decay fit, 1%."""

    def run():
        details = []
        ok = True
        for kappa, alpha in ((1.0, 1.0), (1.0, 0.5), (2.0, 0.8)):
            t0 = time.perf_counter()
            preset = Tetrahedron(kappa=kappa, alpha=alpha, omega=0.0)
            model = build_model(preset)
            expected = lambda_q_analytic(preset)
            ref = stationary_state(model)
            est = lambda_q_numeric(model, ref, default_probe_set(ref), 20.0 / expected)
            dt = time.perf_counter() - t0
            rel = abs(est.exponent - expected) / expected
            ok &= rel <= 0.01 and dt < 10.0
            details.append(f"k={kappa} a={alpha}: {est.exponent:.5f} vs {expected:.5f} "
                           f"({100 * rel:.3f}%, {dt:.1f}s)")
        return ok, "; ".join(details)

    return _result(1, "tetrahedron exponent within 1%", run)


def criterion_2() -> CriterionResult:
    """RK4 trace distance to I/2 matches exp(-(4/3)t) within 1e-6 on [0, 5]."""

    def run():
        worst = 0.0
        for omega in (0.0, 1.0):
            model = build_model(Tetrahedron(kappa=1.0, alpha=1.0, omega=omega))
            traj = evolve(model, pure_state([0.0, 0.0, 1.0]), 5.0)
            half = 0.5 * IDENTITY2
            for t, rho in zip(traj.times, traj.states):
                err = abs(trace_norm(rho - half) - math.exp(-4.0 * t / 3.0))
                worst = max(worst, err)
        return worst <= 1e-6, f"max |deviation| = {worst:.2e}"

    return _result(2, "tetrahedron decay law within 1e-6", run)


def criterion_3() -> CriterionResult:
    """Zeno exponent curve at alpha in {1/4, 1/2, 1, 2, 4}, 2% each."""

    def run():
        t0 = time.perf_counter()
        details = []
        ok = True
        for alpha in (0.25, 0.5, 1.0, 2.0, 4.0):
            preset = Zeno(kappa=4.0 * alpha, omega=1.0)
            model = build_model(preset)
            expected = lambda_q_analytic(preset)
            ref = stationary_state(model)
            est = lambda_q_numeric(model, ref, default_probe_set(ref), 120.0 / expected)
            rel = abs(est.exponent - expected) / expected
            ok &= rel <= 0.02
            details.append(f"a={alpha}: {est.exponent:.5f}/{expected:.5f} ({100 * rel:.2f}%)")
        total = time.perf_counter() - t0
        ok &= total < 60.0
        return ok, "; ".join(details) + f"; total {total:.1f}s"

    return _result(3, "measurement-frequency exponent curve within 2%", run)


def criterion_4() -> CriterionResult:
    """Driven-emitter exponent gamma/2 within 1%; stationary residual 1e-12."""

    def run():
        details = []
        ok = True
        for rabi, gamma in ((1.0, 1.0), (2.0, 1.0), (1.0, 4.0)):
            preset = Fluorescence(rabi=rabi, gamma=gamma)
            model = build_model(preset)
            expected = lambda_q_analytic(preset)
            rho0 = stationary_state(model)
            residual = trace_norm(generator_apply(model, rho0))
            est = lambda_q_numeric(model, rho0, default_probe_set(rho0), 40.0 / gamma)
            rel = abs(est.exponent - expected) / expected
            ok &= rel <= 0.01 and residual <= 1e-12
            x = to_bloch(rho0)
            d2 = 2.0 * rabi ** 2 + gamma ** 2
            d4 = 4.0 * rabi ** 2 + gamma ** 2
            printed_asis = (2.0 * rabi * gamma / d4, -gamma ** 2 / d4)
            halved = (2.0 * rabi * gamma / d2, gamma ** 2 / d2)
            match = ("2R^2+g^2 denominator with basis-adjusted signs"
                     if abs(x[1] - halved[0]) < 1e-9 and abs(x[2] - halved[1]) < 1e-9
                     else "neither closed-form reading")
            details.append(
                f"R={rabi} g={gamma}: L={est.exponent:.5f}/{expected:.5f} ({100 * rel:.2f}%) "
                f"res={residual:.1e}; kernel n=({x[1]:.6f},{x[2]:.6f}) vs "
                f"as-printed ({printed_asis[0]:.6f},{printed_asis[1]:.6f}) -> {match}")
        return ok, "; ".join(details)

    return _result(4, "driven-emitter exponent and stationary state", run)


def criterion_5() -> CriterionResult:
    """Frozen-axis counterexample: entropy limit -log cos(2 phi) at t=20."""

    def run():
        preset = SigmaXConjugation()
        model = build_model(preset)
        worst = 0.0
        for phi in (math.pi / 16, math.pi / 8, 3 * math.pi / 16):
            e1 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
            e2 = np.array([
                [math.cos(phi) ** 2, math.sin(phi) * math.cos(phi)],
                [math.sin(phi) * math.cos(phi), math.sin(phi) ** 2]], dtype=complex)
            value = relative_entropy(analytic_evolve(preset, e1, 20.0),
                                     analytic_evolve(preset, e2, 20.0))
            worst = max(worst, abs(value - (-math.log(math.cos(2 * phi)))))
        ref = from_bloch([0.0, 0.0, 0.0])
        report = classify_mixing(model, default_probe_set(ref), 20.0)
        ok = worst <= 1e-6 and not report.completely_mixing and not report.exact
        return ok, (f"max |H - limit| = {worst:.2e}; "
                    f"classified mixing={report.completely_mixing} exact={report.exact}")

    return _result(5, "non-mixing counterexample entropy limit", run)


def criterion_6() -> CriterionResult:
    """Pinsker bound H(rho|sigma) >= ||rho - sigma||_1^2 / 2 on 1e4 pairs."""

    def run():
        rng = np.random.Generator(np.random.Philox(key=np.array([6, 0], dtype=np.uint64)))
        violations = 0
        worst = 0.0
        for i in range(10_000):
            rho = random_density(rng, pure=(i % 5 == 0))
            sigma = random_density(rng, pure=(i % 7 == 0))
            h = relative_entropy(rho, sigma)
            if math.isinf(h):
                continue
            gap = h - 0.5 * trace_norm(rho - sigma) ** 2
            if gap < -1e-12:
                violations += 1
                worst = min(worst, gap)
        return violations == 0, f"violations={violations}, worst gap={worst:.2e}"

    return _result(6, "Pinsker inequality on 10^4 random pairs", run)


def criterion_7() -> CriterionResult:
    """Jump-process ensemble reproduces the master equation within 0.01."""

    def run():
        t0 = time.perf_counter()
        r0 = np.array([0.6, 0.0, 0.8])
        target = analytic_bloch_paths(
            Tetrahedron(kappa=1.0, alpha=0.8, omega=1.0), r0[None, :],
            np.array([1.0]))[0, 0]
        errs = {}
        for convention in pdp.RATE_CONVENTIONS:
            mean = pdp.ensemble_bloch_mean(
                omega=1.0, kappa=1.0, alpha=0.8, r0=r0, n_paths=100_000,
                t_end=1.0, seed=7, rate_convention=convention)
            errs[convention] = float(np.max(np.abs(mean - target)))
        elapsed = time.perf_counter() - t0
        ok = errs["eeqt"] <= 0.01 and elapsed < 120.0
        return ok, (f"eeqt max err {errs['eeqt']:.4f} (literal {errs['literal']:.4f}); "
                    f"resolved convention: eeqt; {elapsed:.1f}s")

    return _result(7, "ensemble consistency at 1e5 paths", run)


def criterion_8() -> CriterionResult:
    """Attractor dimensions 1.44 +/- 0.15 (a=0.75), 0.49 +/- 0.15 (a=0.95),
    non-increasing across the sweep, under 5 minutes."""

    def run():
        t0 = time.perf_counter()
        dims = {}
        for alpha in (0.75, 0.80, 0.85, 0.90, 0.95):
            cloud = pdp.chaos_game(alpha, 10 ** 6, seed=42)
            dims[alpha] = boxdim.estimate_dimension(boxdim.box_count(cloud))
        elapsed = time.perf_counter() - t0
        values = [dims[a] for a in (0.75, 0.80, 0.85, 0.90, 0.95)]
        monotone = all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
        ok = (abs(dims[0.75] - 1.44) <= 0.15 and abs(dims[0.95] - 0.49) <= 0.15
              and monotone and elapsed < 300.0)
        return ok, (", ".join(f"a={a}: {d:.3f}" for a, d in dims.items())
                    + f"; monotone={monotone}; {elapsed:.1f}s")

    return _result(8, "attractor box-counting dimensions", run)


def criterion_9() -> CriterionResult:
    """Transfer operator: exact 1/(2 r^n) decay, log r exponent, Fourier rule."""

    def run():
        details = []
        # exact decay of the ramp density under doubling
        f = circle.linear_ramp_density()
        one = circle.CircleDensity.uniform()
        worst = 0.0
        g = f
        for n in range(1, 11):
            g = circle.pf_apply(g, 2)
            worst = max(worst, abs(circle.l1_distance(g, one) - 1.0 / (2.0 * 2.0 ** n)))
        ok = worst <= 1e-12
        details.append(f"ramp decay err {worst:.1e}")
        # exponent log r for r = 2, 3
        for r in (2, 3):
            probes = [circle.sawtooth_density(k) for k in range(1, 6)]
            est = circle.lambda_classical(circle.CircleDensity.uniform(), probes, r)
            rel = abs(est.exponent - math.log(r)) / math.log(r)
            ok &= rel <= 0.02
            details.append(f"r={r}: {est.exponent:.5f}/{math.log(r):.5f} ({100 * rel:.2f}%)")
        # Fourier push-forward identity on trig-polynomial probes
        rng = np.random.Generator(np.random.Philox(key=np.array([9, 0], dtype=np.uint64)))
        worst_f = 0.0
        for _ in range(5):
            coeffs = 0.1 * rng.normal(size=4)
            probe = circle.trig_density(coeffs.tolist())
            for k, n in ((1, 1), (1, 2), (2, 2), (1, 3)):
                lhs, rhs = circle.fourier_check(probe, 2, k, n)
                worst_f = max(worst_f, abs(lhs - rhs))
        ok &= worst_f <= 1e-10
        details.append(f"fourier err {worst_f:.1e}")
        return ok, "; ".join(details)

    return _result(9, "circle-map transfer operator checks", run)


def criterion_10() -> CriterionResult:
    """CLI recipes rerun with the same seed are byte-identical."""

    def run():
        with tempfile.TemporaryDirectory() as tmp:
            def path(name):
                return os.path.join(tmp, name)

            recipes = [
                ["pdp", "--alpha", "0.7", "--n-points", "2000", "--seed", "42",
                 "--out", path("cloud.csv"), "--log", path("path.jsonl")],
                ["evolve", "--preset", "tetrahedron", "--kappa", "1", "--alpha", "1",
                 "--omega", "0", "--bloch0", "[0,0,1]", "--t-end", "1",
                 "--out", path("traj.csv")],
                ["exponent", "--preset", "fluorescence", "--rabi", "1", "--gamma", "2",
                 "--out", path("exp.json")],
                ["fractal", "--cloud", path("cloud.csv"), "--out", path("dim.json")],
                ["classical", "--r", "2", "--out", path("classical.json")],
                ["render", "--cloud", path("cloud.csv"), "--projection", "net",
                 "--size", "256", "--out", path("cloud.pgm")],
                ["render", "--cloud", path("cloud.csv"), "--log", path("path.jsonl"),
                 "--mode", "ppm", "--size", "256", "--out", path("cloud.ppm")],
            ]
            outputs = [path(n) for n in ("cloud.csv", "path.jsonl", "traj.csv",
                                         "exp.json", "dim.json", "classical.json",
                                         "cloud.pgm", "cloud.ppm")]
            def run_all_recipes():
                for recipe in recipes:
                    code = cli_main(recipe)
                    if code != 0:
                        raise RuntimeError(f"recipe {recipe[0]} exited {code}")
                return {p: open(p, "rb").read() for p in outputs}

            first = run_all_recipes()
            second = run_all_recipes()
            diffs = [os.path.basename(p) for p in outputs if first[p] != second[p]]
            return not diffs, ("all outputs byte-identical" if not diffs
                               else f"differing files: {diffs}")

    return _result(10, "CLI determinism", run)


_CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10,
}


def run_all(which: Optional[list[int]] = None) -> list[CriterionResult]:
    ids = sorted(_CRITERIA) if which is None else sorted(which)
    return [_CRITERIA[i]() for i in ids]
