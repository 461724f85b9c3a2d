"""Command-line front end.

Exit codes: 0 when every built-in check passes, 1 on a check failure,
2 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from sepent import tolerances
from sepent.analysis import attenuated_correlation, report
from sepent.circuits import cnot, run_protocol
from sepent.linalg import max_abs_diff, phase_aligned_diff, embed, PAULI
from sepent.product_ops import format_expr, from_expr, parse_expr, proportional_match
from sepent.pulses import (
    PREPARATION_SEQUENCES,
    Delay,
    Pulse,
    alanine,
    cnot_sequence,
    compile_sequence,
    composite_z,
    delay_unitary,
    load_system,
    parse_sequence,
    preparation_recipe,
    pulse_unitary,
    run_pulse_protocol,
    run_recipe,
)
from sepent.states import (
    basis_ket,
    final_state,
    initial_components,
    initial_state,
    post_cnot_state,
    pseudopure,
    write_state,
)
from sepent.tomography import add_noise, expectations, reconstruct, write_expectations

STAGES = ("rho0", "rho1", "rho2")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    backend: str = "ideal"
    system: Optional[str] = None
    sigma: float = 0.0
    seed: int = 0
    out: str = "out"
    tol: Optional[float] = None
    physical: bool = True
    reference: str = "stage"

    def __post_init__(self):
        if self.backend not in ("ideal", "pulse"):
            raise UsageError(f"unknown backend {self.backend!r}")
        if not self.sigma >= 0:
            raise UsageError(f"sigma must be non-negative, got {self.sigma}")
        if not 0 <= self.seed < 2**64:
            raise UsageError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError(f"tolerance must be positive, got {self.tol}")

    @property
    def compare_tol(self) -> float:
        if self.tol is not None:
            return self.tol
        return tolerances.PULSE if self.backend == "pulse" else tolerances.EXACT


def _system(path: Optional[str]):
    if path is None:
        return alanine()
    try:
        return load_system(path)
    except OSError as exc:
        raise UsageError(f"cannot read spin system {path}: {exc.strerror or exc}") from exc
    except (ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid spin system {path}: {exc}") from exc


def _trace(cfg: RunConfig):
    if cfg.backend == "pulse":
        return run_pulse_protocol(_system(cfg.system))
    if cfg.system is not None:
        _system(cfg.system)
    return run_protocol()


def _ideal_stages() -> dict:
    return {"rho0": initial_state(), "rho1": post_cnot_state(), "rho2": final_state()}


def write_bar_csv(path, matrix, part: str) -> None:
    """Bar-chart data: one row per matrix entry, basis |0...0> first."""
    m = np.asarray(matrix)
    n = m.shape[0].bit_length() - 1
    labels = [format(i, f"0{n}b") for i in range(m.shape[0])]
    values = m.real if part == "real" else m.imag
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        for i, r in enumerate(labels):
            for j, c in enumerate(labels):
                w.writerow([r, c, repr(float(values[i, j]))])


def _mkdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_run(cfg: RunConfig) -> int:
    trace = _trace(cfg)
    out = _mkdir(cfg.out)
    tol = cfg.compare_tol
    for name, rho in trace.stages().items():
        write_state(out / f"{name}.json", rho)
        write_bar_csv(out / f"{name}_real.csv", rho, "real")
        write_bar_csv(out / f"{name}_imag.csv", rho, "imag")
    rep = report(trace, exact_tol=tol)
    ideal = _ideal_stages()
    for name, rho in trace.stages().items():
        rep.checks[f"{name} matches ideal"] = max_abs_diff(rho, ideal[name]) < tol
    (out / "report.json").write_text(rep.dumps())
    for name, ok in rep.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"extraction probability: {rep.extraction_probability:.15f}")
    return 0 if rep.passed else 1


@dataclass
class Category:
    name: str
    results: list = field(default_factory=list)

    def add(self, label: str, ok: bool, detail: str = ""):
        self.results.append((label, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.results)


def _load_fixtures(path: Optional[str]) -> dict:
    try:
        if path is None:
            text = resources.files("sepent").joinpath("data/deviations.json").read_text()
        else:
            text = Path(path).read_text()
        return json.loads(text)
    except OSError as exc:
        raise UsageError(f"cannot read fixtures {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid fixture file {path}: {exc}") from exc


def verify_categories(fixtures_path: Optional[str] = None, system_path: Optional[str] = None,
                      pulse_tol: Optional[float] = None) -> list:
    """Evaluate every verification category; never stops at the first failure."""
    fixtures = _load_fixtures(fixtures_path)
    sys_ = _system(system_path)
    ideal = run_protocol()
    states = {"pseudopure": pseudopure(), **ideal.stages()}
    cats = []

    c = Category("product-operator fixtures")
    for key, fx in fixtures.items():
        try:
            expr = parse_expr(fx["expr"], 3)
            res = proportional_match(states[fx["state"]], expr)
            ok = res.matched and abs(res.scale - fx["scale"]) < tolerances.STRUCTURAL
            detail = f"scale={res.scale:.12g} residual={res.residual:.2g} {res.message}".strip()
        except (KeyError, ValueError) as exc:
            ok, detail = False, f"error: {exc}"
        c.add(key, ok, detail)
    cats.append(c)

    c = Category("ideal protocol")
    e1 = max_abs_diff(ideal.rho1, post_cnot_state())
    e2 = max_abs_diff(ideal.rho2, final_state())
    c.add("rho1 five-term mixture", e1 < tolerances.EXACT, f"err={e1:.2g}")
    c.add("rho2 separable form", e2 < tolerances.EXACT, f"err={e2:.2g}")
    cats.append(c)

    tol_prep = pulse_tol if pulse_tol is not None else tolerances.UNITARY
    tol_cnot = pulse_tol if pulse_tol is not None else tolerances.PULSE
    c = Category("preparation sequences")
    ground = basis_ket("000")
    for text, target in zip(PREPARATION_SEQUENCES, initial_components()):
        out = compile_sequence(parse_sequence(text), sys_) @ ground
        err = phase_aligned_diff(out, target)
        c.add(text, err < tol_prep, f"err={err:.2g}")
    rho0 = run_recipe(preparation_recipe(), sys_)
    err = max_abs_diff(rho0, initial_state())
    c.add("six-run average", err < tol_cnot, f"err={err:.2g}")
    cats.append(c)

    c = Category("pulse CNOT")
    for ctrl in (1, 2):
        for composite in (False, True):
            u = compile_sequence(cnot_sequence(ctrl, 3, sys_, composite), sys_)
            err = phase_aligned_diff(u, cnot(ctrl, 3, 3))
            label = f"CNOT({ctrl}->3)" + (" composite z" if composite else "")
            c.add(label, err < tol_cnot, f"err={err:.2g}")
    for axis in ("z", "-z"):
        p = Pulse((3,), axis, np.pi / 2)
        err = phase_aligned_diff(compile_sequence(composite_z(p), sys_), pulse_unitary(p, sys_.n))
        c.add(f"composite (pi/2){axis}", err < tol_prep, f"err={err:.2g}")
    cats.append(c)

    c = Category("backend equivalence")
    pulse = run_pulse_protocol(sys_)
    for name in ("rho1", "rho2"):
        err = max_abs_diff(pulse.stages()[name], ideal.stages()[name])
        c.add(f"pulse {name} = ideal {name}", err < tol_cnot, f"err={err:.2g}")
    for offsets in ((0, 0, 0), (120.0, 0, -75.0)):
        shifted = sys_.with_offsets(offsets)
        u = delay_unitary(Delay(coupling=(1, 3), refocus=(1, 3)), shifted)
        comm = max(max_abs_diff(u @ embed(PAULI[a], 2, 3), embed(PAULI[a], 2, 3) @ u) for a in "xyz")
        c.add(f"spin 2 decoupled, offsets {offsets}", comm < tol_cnot, f"commutator={comm:.2g}")
    cats.append(c)

    c = Category("entanglement report")
    rep = report(ideal)
    for name, ok in rep.checks.items():
        c.add(name, ok)
    cats.append(c)
    return cats


def cmd_verify(fixtures: Optional[str] = None, system: Optional[str] = None, tol: Optional[float] = None) -> int:
    if tol is not None and not tol > 0:
        raise UsageError(f"tolerance must be positive, got {tol}")
    cats = verify_categories(fixtures, system, tol)
    for cat in cats:
        print(f"[{'PASS' if cat.passed else 'FAIL'}] {cat.name}")
        for label, ok, detail in cat.results:
            print(f"    {'ok  ' if ok else 'FAIL'} {label}" + (f"  ({detail})" if detail else ""))
    return 0 if all(cat.passed for cat in cats) else 1


def cmd_tomo(cfg: RunConfig) -> int:
    trace = _trace(cfg)
    out = _mkdir(cfg.out)
    rng = np.random.default_rng(cfg.seed)
    refs = _ideal_stages() if cfg.reference == "stage" else {k: pseudopure() for k in STAGES}
    correlations = []
    for name, rho in trace.stages().items():
        noisy = add_noise(expectations(rho), cfg.sigma, rng)
        rec = reconstruct(noisy, physical=cfg.physical)
        write_expectations(out / f"tomo_{name}_expectations.json", noisy)
        write_state(out / f"tomo_{name}.json", rec)
        correlations.append(attenuated_correlation(rec, refs[name]))
    summary = {
        "backend": cfg.backend,
        "sigma": cfg.sigma,
        "seed": cfg.seed,
        "physical": cfg.physical,
        "reference": cfg.reference,
        "stages": list(STAGES),
        "correlations": correlations,
    }
    (out / "tomo_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    for name, value in zip(STAGES, correlations):
        print(f"C({name}) = {value:.6f}")
    return 0


def cmd_eval(text: str, n: int = 3) -> int:
    try:
        expr = parse_expr(text, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(format_expr(expr))
    m = from_expr(expr)
    with np.printoptions(precision=4, suppress=True, linewidth=160):
        print(m.real)
        if np.any(m.imag):
            print("imaginary part:")
            print(m.imag)
    dev = expr.deviation()
    if n == 3 and len(dev):
        states = {"pseudopure": pseudopure(), **run_protocol().stages()}
        for name, rho in states.items():
            res = proportional_match(rho, dev)
            verdict = f"match, scale {res.scale:.12g}" if res.matched else f"no match ({res.message})"
            print(f"{name}: {verdict}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sepent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, noise=False):
        sp.add_argument("--backend", choices=("ideal", "pulse"), default="ideal")
        sp.add_argument("--system", help="spin-system JSON (default: packaged alanine)")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--tol", type=float, help="comparison tolerance override")
        if noise:
            sp.add_argument("--sigma", type=float, default=0.0)
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--no-physical", dest="physical", action="store_false",
                            help="skip the eigenvalue-clipping projection")
            sp.add_argument("--reference", choices=("stage", "pseudopure"), default="stage",
                            help="reference state for the attenuated correlation")

    common(sub.add_parser("run", help="run the protocol and write states, report and bar data"))
    common(sub.add_parser("tomo", help="noisy tomography of the three stages"), noise=True)

    v = sub.add_parser("verify", help="check every fixture and cross-validation")
    v.add_argument("--fixtures", help="product-operator fixture JSON")
    v.add_argument("--system", help="spin-system JSON (default: packaged alanine)")
    v.add_argument("--tol", type=float, help="override the pulse-pipeline tolerances")

    e = sub.add_parser("eval", help="evaluate a product-operator expression")
    e.add_argument("--expr", required=True)
    e.add_argument("--n", type=int, default=3, help="spin count")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.fixtures, args.system, args.tol)
        if args.command == "eval":
            return cmd_eval(args.expr, args.n)
        cfg = RunConfig(
            backend=args.backend,
            system=args.system,
            out=args.out,
            tol=args.tol,
            sigma=getattr(args, "sigma", 0.0),
            seed=getattr(args, "seed", 0),
            physical=getattr(args, "physical", True),
            reference=getattr(args, "reference", "stage"),
        )
        return cmd_run(cfg) if args.command == "run" else cmd_tomo(cfg)
    except UsageError as exc:
        print(f"sepent: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
