"""Command-line batch driver producing JSON reports.

Exit status: 0 when every non-skipped check passes, 1 when any fails,
2 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from . import __version__
from .chain import ChainConfig, validate_chain_identities
from .checks import CheckReport, CorrespondenceResult
from .correspondence import (
    check_det_identity,
    check_kz_calogero,
    check_qkz_macdonald,
    check_sign_flip_map,
    degeneracy_sweep,
    random_rational,
    sample_positions,
    sweep_family,
)
from .graded import Grading, GradingError, all_gradings, all_weights, make_grading
from .omega import (
    OmegaKind,
    admissible,
    build_omega,
    check_golden,
    golden_grading,
    load_goldens,
    validate_omega,
)
from .rmatrix import RFamily, RParams, validate_r_axioms
from .scalars import Backend, SingularParameterError, get_backend, parse_rational

SUITES = ("r-axioms", "omega", "chain", "correspondence", "det-identity", "degeneracy", "sign-flip")
SEED_ENV = "SQKZ_SEED"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    suites: Tuple[str, ...]
    K: int
    grading_spec: str
    gradings: Tuple[Grading, ...]
    n: int
    weights: Optional[Tuple[int, ...]]
    twist: Tuple[Fraction, ...]
    families: Tuple[RFamily, ...]
    eta: Fraction
    hbar: Fraction
    q: Fraction
    w: Fraction
    kappa: Fraction
    positions: Optional[Tuple[Fraction, ...]]
    samples: int
    seed: int
    backend: Backend
    output: Optional[str] = None
    timing: bool = True
    echo: dict = field(default_factory=dict)
    config_cache: dict = field(default_factory=dict, repr=False)

    def rational_params(self) -> RParams:
        return RParams.rational(self.eta, self.hbar, backend=self.backend)

    def trig_params(self) -> RParams:
        return RParams.trig(self.q, self.w, backend=self.backend)

    def params(self, family: RFamily) -> RParams:
        return self.trig_params() if family.trig else self.rational_params()

    def weight_list(self) -> List[Tuple[int, ...]]:
        return [self.weights] if self.weights else all_weights(self.K, self.n)

    def rng(self, tag: str) -> random.Random:
        return random.Random(f"{self.seed}:{tag}")


# ---------------------------------------------------------------------------
# parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sqkz",
        description="Verify graded R-matrix, qKZ and spin-chain identities and write a JSON report.",
    )
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--suite", help="one of: " + ", ".join(SUITES + ("all",)) + " (comma-separated list allowed)")
    p.add_argument("--K", type=int, help="number of letters (N+M)")
    p.add_argument("--grading", help="'bosons=1,2' (other letters fermionic) or 'sweep' for all 2^K")
    p.add_argument("--n", type=int, help="number of sites")
    p.add_argument("--weights", help="letter multiplicities M_1,...,M_K; default: every weight")
    p.add_argument("--g", help="twist entries g_1,...,g_K")
    p.add_argument("--family", help="R-matrix family or 'all'")
    p.add_argument("--eta")
    p.add_argument("--hbar")
    p.add_argument("--q", help="e^eta")
    p.add_argument("--w", help="e^(eta hbar)")
    p.add_argument("--kappa")
    p.add_argument("--positions", help="fixed positions x_i (or u_i); default: seeded random draws")
    p.add_argument("--samples", type=int, help="random configurations per case")
    p.add_argument("--seed", type=int, help=f"default taken from ${SEED_ENV}, else 0")
    p.add_argument("--backend", help="exact or float")
    p.add_argument("--output", help="report path (default: stdout)")
    p.add_argument("--no-timing", action="store_true", default=None, help="omit wall-clock fields")
    return p


DEFAULTS = {
    "suite": "all",
    "K": "2",
    "grading": "sweep",
    "n": "3",
    "weights": None,
    "g": None,
    "family": "all",
    "eta": "1",
    "hbar": "1/2",
    "q": "2",
    "w": "3",
    "kappa": "1",
    "positions": None,
    "samples": "3",
    "seed": None,
    "backend": "exact",
    "output": None,
    "no_timing": False,
}


def read_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _ints(text: str, what: str) -> Tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated integers, got {text!r}") from None


def _rationals(text: str, what: str) -> Tuple[Fraction, ...]:
    try:
        return tuple(parse_rational(t) for t in text.split(",") if t.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{what} must be comma-separated rationals, got {text!r}") from None


def _rational(text, what: str) -> Fraction:
    try:
        return parse_rational(str(text))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{what} must be a rational number, got {text!r}") from None


def _int(text, what: str) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be an integer, got {text!r}") from None


def parse_gradings(spec: str, K: int) -> Tuple[Grading, ...]:
    spec = spec.strip()
    if spec == "sweep":
        return tuple(all_gradings(K))
    if not spec.startswith("bosons="):
        raise ConfigError(f"grading must be 'sweep' or 'bosons=...', got {spec!r}")
    body = spec[len("bosons="):]
    bosons = _ints(body, "bosons") if body else ()
    try:
        return (make_grading(K, bosons),)
    except GradingError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Merge defaults, the optional config file and flags; validate everything."""
    args = build_parser().parse_args(argv)
    values = dict(DEFAULTS)
    if os.environ.get(SEED_ENV):
        values["seed"] = os.environ[SEED_ENV]
    if args.config:
        values.update(read_config_file(args.config))
    for key, val in vars(args).items():
        if key != "config" and val is not None:
            values[key] = val

    suites = tuple(s.strip() for s in str(values["suite"]).split(",") if s.strip())
    if suites == ("all",):
        suites = SUITES
    for s in suites:
        if s not in SUITES:
            raise ConfigError(f"unknown suite {s!r}")

    K = _int(values["K"], "K")
    n = _int(values["n"], "n")
    if K < 1:
        raise ConfigError("K must be positive")
    if n < 1:
        raise ConfigError("n must be positive")
    gradings = parse_gradings(str(values["grading"]), K)

    weights = None
    if values["weights"]:
        weights = _ints(str(values["weights"]), "weights")
        if len(weights) != K:
            raise ConfigError(f"weights need {K} entries, got {len(weights)}")
        if any(m < 0 for m in weights):
            raise ConfigError("weights must be non-negative")
        if sum(weights) != n:
            raise ConfigError("weights must sum to n")

    if values["g"]:
        twist = _rationals(str(values["g"]), "g")
        if len(twist) != K:
            raise ConfigError(f"g needs {K} entries, got {len(twist)}")
    else:
        primes = (2, 3, 5, 7, 11, 13, 17, 19)
        twist = tuple(Fraction(primes[a % len(primes)] + a // len(primes)) for a in range(K))

    fam_text = str(values["family"])
    try:
        families = tuple(RFamily) if fam_text == "all" else (RFamily.parse(fam_text),)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    eta = _rational(values["eta"], "eta")
    hbar = _rational(values["hbar"], "hbar")
    q = _rational(values["q"], "q")
    w = _rational(values["w"], "w")
    kappa = _rational(values["kappa"], "kappa")
    if eta == 0:
        raise ConfigError("eta must be non-zero")
    if q == 0 or q in (1, -1):
        raise ConfigError("q must differ from 0 and +-1")
    if w == 0:
        raise ConfigError("w must be non-zero")

    samples = _int(values["samples"], "samples")
    if samples < 1:
        raise ConfigError("samples must be positive")
    seed = _int(values["seed"], "seed") if values["seed"] is not None else 0
    try:
        backend = get_backend(str(values["backend"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    positions = None
    if values["positions"]:
        positions = _rationals(str(values["positions"]), "positions")
        if len(positions) != n:
            raise ConfigError(f"positions need {n} entries, got {len(positions)}")

    timing = not (values["no_timing"] in (True, "true", "1", "yes"))

    cfg = RunConfig(
        suites=suites,
        K=K,
        grading_spec=str(values["grading"]),
        gradings=gradings,
        n=n,
        weights=weights,
        twist=twist,
        families=families,
        eta=eta,
        hbar=hbar,
        q=q,
        w=w,
        kappa=kappa,
        positions=positions,
        samples=samples,
        seed=seed,
        backend=backend,
        output=values["output"],
        timing=timing,
    )
    _validate_admissible(cfg)
    _validate_positions(cfg)
    cfg.echo = {
        "suites": list(suites),
        "K": K,
        "grading": cfg.grading_spec,
        "gradings": [str(g) for g in gradings],
        "n": n,
        "weights": list(weights) if weights else None,
        "g": [str(t) for t in twist],
        "families": [f.value for f in families],
        "eta": str(eta),
        "hbar": str(hbar),
        "q": str(q),
        "w": str(w),
        "kappa": str(kappa),
        "positions": [str(x) for x in positions] if positions else None,
        "samples": samples,
        "seed": seed,
        "backend": backend.name,
    }
    return cfg


def _validate_admissible(cfg: RunConfig):
    if cfg.weights is None or len(cfg.gradings) != 1:
        return
    g = cfg.gradings[0]
    if not any(admissible(kind, g, cfg.weights) for kind in OmegaKind):
        raise ConfigError(
            f"inadmissible weights {list(cfg.weights)} for grading {g}: repeated bosons and repeated fermions"
        )


def _validate_positions(cfg: RunConfig):
    if cfg.positions is None:
        return
    for family in cfg.families:
        try:
            config = ChainConfig(cfg.n, cfg.gradings[0], cfg.positions, cfg.twist, cfg.params(family), cfg.kappa)
            config.check_family(family)
        except SingularParameterError as exc:
            raise ConfigError(f"positions are singular for {family.value}: {exc}") from None


# ---------------------------------------------------------------------------
# running


Result = CheckReport | CorrespondenceResult


def _configs(cfg: RunConfig, grading: Grading, family: RFamily, tag: str) -> List[ChainConfig]:
    key = (tag, grading, family)
    if key not in cfg.config_cache:
        params = cfg.params(family)
        if cfg.positions is not None:
            found = [ChainConfig(cfg.n, grading, cfg.positions, cfg.twist, params, cfg.kappa)]
        else:
            rng = cfg.rng(f"{tag}:{grading}:{family.value}")
            found = [
                sample_positions(rng, cfg.n, grading, cfg.twist, params, family, cfg.kappa)
                for _ in range(cfg.samples)
            ]
        cfg.config_cache[key] = found
    return cfg.config_cache[key]


def _r_points(rng: random.Random, trig: bool, count: int) -> list:
    return [(random_rational(rng, positive=trig), random_rational(rng, positive=trig)) for _ in range(count)]


def suite_r_axioms(cfg: RunConfig):
    for grading in cfg.gradings:
        for family in cfg.families:
            rng = cfg.rng(f"r-axioms:{grading}:{family.value}")
            params = cfg.params(family)

            def run(grading=grading, family=family, rng=rng, params=params):
                for _ in range(100):
                    pts = _r_points(rng, family.trig, cfg.samples)
                    try:
                        return validate_r_axioms(family, grading, pts, params, cfg.twist)
                    except SingularParameterError:
                        continue
                raise SingularParameterError("no regular sample points")

            yield run


def suite_omega(cfg: RunConfig):
    grading_names = {str(g) for g in cfg.gradings}
    for data in load_goldens():
        if len(data["grading"]) == cfg.K and data["n"] == cfg.n and data["grading"] in grading_names:
            if cfg.weights is None or tuple(data["weights"]) == cfg.weights:
                yield lambda data=data: check_golden(data, cfg.q, cfg.backend)
    for grading in cfg.gradings:
        for weights in cfg.weight_list():
            for kind in OmegaKind:
                if not admissible(kind, grading, weights):
                    continue

                def run(grading=grading, weights=weights, kind=kind):
                    cov = build_omega(kind, grading, weights, cfg.n, q=cfg.q, backend=cfg.backend)
                    params = cfg.trig_params() if kind.quantum else None
                    rng = cfg.rng(f"omega:{grading}:{weights}:{kind.value}")
                    pts = [random_rational(rng, positive=True) for _ in range(cfg.samples)]
                    pts = [u for u in pts if u not in (1, cfg.q, 1 / cfg.q)]
                    return validate_omega(cov, kind, params, pts)

                yield run


def suite_chain(cfg: RunConfig):
    for grading in cfg.gradings:
        for family in cfg.families:
            for config in _configs(cfg, grading, family, "chain"):
                yield lambda config=config, family=family: validate_chain_identities(config, family)


def suite_correspondence(cfg: RunConfig):
    for grading in cfg.gradings:
        for weights in cfg.weight_list():
            for kind in (OmegaKind.SYM_PLUS, OmegaKind.SYM_MINUS):
                if admissible(kind, grading, weights):
                    for config in _configs(cfg, grading, RFamily.RATIONAL_PLUS, "calogero"):
                        yield lambda c=config, w=weights, k=kind: check_kz_calogero(w, c, k)
            for family in cfg.families:
                if not admissible(OmegaKind.for_family(family), grading, weights):
                    continue
                orders = [1] if family.trig else range(1, cfg.n + 1)
                for config in _configs(cfg, grading, family, "macdonald"):
                    for d in orders:
                        yield lambda c=config, f=family, d=d, w=weights: check_qkz_macdonald(f, d, w, c)


def suite_det_identity(cfg: RunConfig):
    for grading in cfg.gradings:
        for config in _configs(cfg, grading, RFamily.RATIONAL_PLUS, "det"):
            for weights in cfg.weight_list():
                yield lambda c=config, w=weights: check_det_identity(w, c)


def suite_degeneracy(cfg: RunConfig):
    for trig in (False, True):
        family = RFamily.TRIG_PLUS if trig else RFamily.RATIONAL_PLUS
        if not any(f.trig == trig for f in cfg.families):
            continue
        if cfg.positions is not None:
            positions = cfg.positions
        else:
            # positions must be regular for the plus and minus families of every grading
            positions = _configs(cfg, cfg.gradings[0], family, "degeneracy")[0].positions
        for weights in cfg.weight_list():
            if not any(sweep_family(g, weights, trig) for g in cfg.gradings):
                continue
            yield lambda w=weights, t=trig, pos=positions: degeneracy_sweep(
                cfg.K, w, cfg.n, cfg.twist, pos, cfg.params(RFamily.TRIG_PLUS if t else RFamily.RATIONAL_PLUS),
                trig=t, gradings=cfg.gradings,
            )


def suite_sign_flip(cfg: RunConfig):
    if not any(f.trig for f in cfg.families):
        return
    for grading in cfg.gradings:
        for config in _configs(cfg, grading, RFamily.TRIG_PLUS, "sign-flip"):
            yield lambda c=config: check_sign_flip_map(c)


RUNNERS = {
    "r-axioms": suite_r_axioms,
    "omega": suite_omega,
    "chain": suite_chain,
    "correspondence": suite_correspondence,
    "det-identity": suite_det_identity,
    "degeneracy": suite_degeneracy,
    "sign-flip": suite_sign_flip,
}


def _failure_entry(suite: str, exc: Exception) -> dict:
    return {"kind": "error", "name": suite, "error": f"{type(exc).__name__}: {exc}", "pass": False}


def run_suites(cfg: RunConfig) -> dict:
    """Execute the selected suites and assemble the report document."""
    entries = []
    for suite in cfg.suites:
        try:
            jobs: List[Callable] = list(RUNNERS[suite](cfg))
        except Exception as exc:  # a broken suite is reported, not raised
            entries.append(dict(_failure_entry(suite, exc), suite=suite))
            continue
        for job in jobs:
            start = time.perf_counter()
            try:
                out = job()
                records = [r.to_dict() for r in (out if isinstance(out, list) else [out])]
            except Exception as exc:
                records = [_failure_entry(suite, exc)]
            elapsed = time.perf_counter() - start
            for rec in records:
                rec["suite"] = suite
                if cfg.timing:
                    rec["seconds"] = round(elapsed / len(records), 6)
                entries.append(rec)
    skipped = sum(1 for e in entries if "skipped" in e)
    failed = sum(1 for e in entries if "skipped" not in e and not e.get("pass"))
    return {
        "tool": "sqkz",
        "version": __version__,
        "config": cfg.echo,
        "results": entries,
        "summary": {
            "total": len(entries),
            "passed": len(entries) - skipped - failed,
            "failed": failed,
            "skipped": skipped,
        },
    }


def write_report(report: dict, path: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"sqkz: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors
        return 2 if exc.code else 0
    report = run_suites(cfg)
    write_report(report, cfg.output)
    s = report["summary"]
    print(
        f"sqkz: {s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped",
        file=sys.stderr,
    )
    return 0 if s["failed"] == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
