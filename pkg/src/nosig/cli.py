"""Command-line front end.

    nosig purify|audit|evolve|demo|unravel-check --config <path> --out <dir> [--seed <u64>]

Exit codes: 0 ok, 1 config error, 2 precondition violation, 3 signaling
detected or consistency check failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import auditor, dynamics, hilbert
from .ensemble import Ensemble, check_density, density_of
from .errors import NosigError, NotEquivalent
from .purification import expansion_residual, joint_purification

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_FAILED = 0, 1, 2, 3
DEFAULT_TIMES = (0.25, 0.5, 1.0, 2.0)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- parsing

def load_schema() -> dict:
    text = resources.files("nosig").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


def _cvec(raw) -> np.ndarray:
    return np.array([complex(re, im) for re, im in raw], dtype=complex)


def _cmat(raw, dim: int, what: str) -> np.ndarray:
    m = np.array([[complex(re, im) for re, im in row] for row in raw], dtype=complex)
    if m.shape != (dim, dim):
        raise ConfigError(f"{what} must be {dim}x{dim}, got {m.shape}")
    return m


def parse_ensemble(raw: dict, dim: int) -> Ensemble:
    rows = []
    for k, st in enumerate(raw["states"]):
        v = _cvec(st["vector"])
        if v.size != dim:
            raise ConfigError(f"state {k} has length {v.size}, expected {dim}")
        if "weight" in st:
            nrm = np.linalg.norm(v)
            if nrm == 0:
                raise ConfigError(f"state {k} is the zero vector")
            v = v / nrm * np.sqrt(st["weight"])
        rows.append(v)
    try:
        return Ensemble(np.array(rows))
    except NosigError as exc:
        raise ConfigError(f"invalid ensemble: {exc}") from exc


def parse_evolution(raw: dict, dim: int) -> dynamics.EvolutionSpec:
    kind = raw["type"]
    try:
        if kind == "unitary":
            return dynamics.Unitary(_cmat(raw["hamiltonian"], dim, "hamiltonian"))
        if kind == "weinberg":
            return dynamics.NonlinearWeinberg(float(raw.get("strength", 1.0)))
        if kind == "figure3":
            return dynamics.FigureThreeTable()
        h = _cmat(raw["hamiltonian"], dim, "hamiltonian")
        ops = [_cmat(o, dim, "jump operator") for o in raw.get("jump_operators", [])]
        ops = np.array(ops) if ops else np.zeros((0, dim, dim), dtype=complex)
        if kind == "lindblad":
            return dynamics.LindbladMaster(h, ops, float(raw.get("dt", 1e-3)))
        return dynamics.JumpUnraveling(h, ops, float(raw.get("dt", 1e-3)),
                                       int(raw.get("trajectories", 1000)))
    except NosigError as exc:
        raise ConfigError(f"invalid evolution: {exc}") from exc


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {loc}: {exc.message}") from exc
    return cfg


def _require(cfg: dict, key: str, why: str):
    if key not in cfg:
        raise ConfigError(f"'{key}' is required {why}")
    return cfg[key]


def _ensembles(cfg: dict, n_min: int, why: str) -> list[Ensemble]:
    raw = cfg.get("ensembles", [])
    if len(raw) < n_min:
        raise ConfigError(f"{why} needs at least {n_min} ensemble(s)")
    return [parse_ensemble(r, cfg["hilbert_dim"]) for r in raw]


def _density(cfg: dict) -> np.ndarray:
    dim = cfg["hilbert_dim"]
    if "density_matrix" in cfg:
        try:
            return check_density(_cmat(cfg["density_matrix"], dim, "density_matrix"))
        except NosigError as exc:
            raise ConfigError(f"invalid density_matrix: {exc}") from exc
    if cfg.get("ensembles"):
        return density_of(parse_ensemble(cfg["ensembles"][0], dim))
    raise ConfigError("either 'density_matrix' or 'ensembles' is required")


def _evolution(cfg: dict) -> dynamics.EvolutionSpec:
    return parse_evolution(_require(cfg, "evolution", "for this command"), cfg["hilbert_dim"])


# ---------------------------------------------------------------- output

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cvec_json(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).ravel()]


def cmat_json(m) -> list:
    return [cvec_json(row) for row in np.asarray(m)]


def ensemble_json(e: Ensemble) -> dict:
    return {"states": [{"vector": cvec_json(s)} for s in e.states]}


def _vector_rows(kind: str, vecs):
    for i, v in enumerate(vecs):
        for c, z in enumerate(v):
            yield (kind, i, c, z.real, z.imag)


# ---------------------------------------------------------------- commands

def cmd_purify(cfg: dict, out: Path, seed: int) -> int:
    e1, e2 = _ensembles(cfg, 2, "purify")[:2]
    p = joint_purification(e1, e2)
    res_a = expansion_residual(p, e1, p.alpha)
    res_b = expansion_residual(p, e2, p.beta)
    reduced_err = hilbert.maxabs(p.reduced_density() - density_of(e1))
    rows = list(_vector_rows("V", [p.v]))
    rows += _vector_rows("alpha", p.alpha)
    rows += _vector_rows("beta", p.beta)
    write_csv(out / "purification.csv", ["kind", "index", "component", "re", "im"], rows)
    write_json(out / "summary.json", {
        "command": "purify",
        "alice_dim": p.alice_dim,
        "bob_dim": p.bob_dim,
        "v": cvec_json(p.v),
        "alpha": cmat_json(p.alpha),
        "beta": cmat_json(p.beta),
        "residual_alpha": res_a,
        "residual_beta": res_b,
        "reduced_density_error": reduced_err,
    })
    print(f"purification in C^{p.alice_dim} (x) C^{p.bob_dim}")
    print(f"  |V> = sum psi_i (x) alpha_i   residual {res_a:.3e}")
    print(f"  |V> = sum phi_i (x) beta_i    residual {res_b:.3e}")
    print(f"  partial trace vs rho          error    {reduced_err:.3e}")
    return EXIT_OK


def cmd_audit(cfg: dict, out: Path, seed: int) -> int:
    spec = _evolution(cfg)
    rho0 = _density(cfg)
    times = cfg.get("times", list(DEFAULT_TIMES))
    acfg = cfg.get("audit", {})
    explicit = _ensembles(cfg, 2, "an explicit audit") if len(cfg.get("ensembles", [])) >= 2 else None
    report = auditor.audit_no_signaling(
        spec, rho0, n_decomp=acfg.get("n_decomp", 8), sizes=acfg.get("sizes", [2, 3, 4]),
        times=times, threshold=acfg.get("threshold"), seed=seed, ensembles=explicit)
    write_csv(out / "audit.csv", ["time", "ensemble_i", "ensemble_j", "trace_distance"],
              report.distances)

    lin_rows = []
    lcfg = cfg.get("linearity")
    if lcfg is not None:
        ea, eb = (parse_ensemble(r, cfg["hilbert_dim"]) for r in lcfg["ensembles"])
        t_lin = lcfg.get("time", 1.0)
        tol = lcfg.get("tol", 1e-8)
        for k, lam in enumerate(lcfg.get("lambdas", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])):
            lr = auditor.audit_linearity(spec, density_of(ea), density_of(eb), lam, t_lin, tol,
                                         seed=seed + k, e1=ea, e2=eb)
            lin_rows.append((lr.lam, lr.t, lr.residual, lr.tolerance, lr.passed))
        write_csv(out / "linearity.csv", ["lambda", "time", "residual", "tolerance", "pass"],
                  lin_rows)

    i, j = report.witness_pair
    write_json(out / "summary.json", {
        "command": "audit",
        "spec": report.spec,
        "times": report.times,
        "n_ensembles": len(report.ensembles),
        "max_trace_distance": report.max_trace_distance,
        "threshold": report.threshold,
        "verdict": report.verdict.value,
        "helstrom_success": report.helstrom_success,
        "witness": {"ensemble_i": i, "ensemble_j": j, "time": report.witness_time,
                    "ensemble_a": ensemble_json(report.ensembles[i]),
                    "ensemble_b": ensemble_json(report.ensembles[j])},
        "linearity": [{"lambda": r[0], "time": r[1], "residual": r[2], "tolerance": r[3],
                       "pass": bool(r[4])} for r in lin_rows],
        "note": report.note,
    })
    print(f"audit of {report.spec} over {len(report.ensembles)} equivalent ensembles, "
          f"times {report.times}")
    print(f"  max trace distance {report.max_trace_distance:.6g} "
          f"(threshold {report.threshold:.3g}) at t={report.witness_time:g}, pair ({i}, {j})")
    print(f"  Helstrom success   {report.helstrom_success:.6f}")
    for r in lin_rows:
        print(f"  linearity lambda={r[0]:g}: residual {r[2]:.3e} {'pass' if r[4] else 'FAIL'}")
    print(f"  verdict: {report.verdict.value}")
    print(f"  note: {report.note}")
    return EXIT_FAILED if report.verdict is auditor.Verdict.SIGNALING_DETECTED else EXIT_OK


def cmd_evolve(cfg: dict, out: Path, seed: int) -> int:
    (e,) = _ensembles(cfg, 1, "evolve")[:1]
    spec = _evolution(cfg)
    times = cfg.get("times", list(DEFAULT_TIMES))
    state_rows, dens_rows, evolved = [], [], []
    for ti, t in enumerate(times):
        et = dynamics.evolve_ensemble(spec, e, t, seed=seed + ti)
        rho = density_of(et)
        for i, s in enumerate(et.states):
            for c, z in enumerate(s):
                state_rows.append((t, i, c, z.real, z.imag))
        for a in range(rho.shape[0]):
            for b in range(rho.shape[1]):
                dens_rows.append((t, a, b, rho[a, b].real, rho[a, b].imag))
        evolved.append({"time": t, "ensemble": ensemble_json(et), "density": cmat_json(rho)})
        print(f"t={t:g}: {len(et)} states, density")
        for row in rho:
            print("   " + "  ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row))
    write_csv(out / "evolve.csv", ["time", "state", "component", "re", "im"], state_rows)
    write_csv(out / "density.csv", ["time", "row", "col", "re", "im"], dens_rows)
    write_json(out / "summary.json", {"command": "evolve", "spec": dynamics.describe(spec),
                                      "initial": ensemble_json(e), "evolved": evolved})
    return EXIT_OK


def cmd_demo(cfg: dict, out: Path, seed: int) -> int:
    e1, e2 = _ensembles(cfg, 2, "demo")[:2]
    spec = _evolution(cfg)
    dcfg = cfg.get("demo", {})
    tr = auditor.demo_signaling_protocol(e1, e2, spec, dcfg.get("time", 1.0),
                                         dcfg.get("trials", 10000), seed=seed)
    rows = [(k, *map(int, r), int(r[0] == r[3])) for k, r in enumerate(tr.trials)]
    write_csv(out / "demo_trials.csv",
              ["trial", "bob_bit", "bob_outcome", "alice_outcome", "guess", "correct"], rows)
    write_json(out / "summary.json", {
        "command": "demo", "spec": dynamics.describe(spec), "trials": len(tr.trials),
        "accuracy": tr.accuracy, "theoretical": tr.theoretical,
        "trace_distance": tr.trace_distance, "sigma": tr.sigma, "within_3_sigma": bool(tr.within(3.0)),
    })
    print(f"signaling demo under {dynamics.describe(spec)}: {len(tr.trials)} trials")
    print(f"  empirical accuracy {tr.accuracy:.4f}; Helstrom 1/2(1+D) = {tr.theoretical:.6f} "
          f"(D = {tr.trace_distance:.6g}, sigma = {tr.sigma:.4f})")
    return EXIT_OK


def cmd_unravel_check(cfg: dict, out: Path, seed: int) -> int:
    spec = _evolution(cfg)
    if not isinstance(spec, (dynamics.LindbladMaster, dynamics.JumpUnraveling)):
        raise ConfigError("unravel-check needs a 'lindblad' or 'jump_unraveling' evolution")
    rho0 = _density(cfg)
    ucfg = cfg.get("unravel", {})
    n_traj = ucfg.get("trajectories", getattr(spec, "trajectories", 10000))
    dt = ucfg.get("dt", spec.dt)
    t = ucfg.get("time", 1.0)
    rep = auditor.unraveling_consistency(spec.H, spec.ops, rho0, t, dt, n_traj, seed=seed)
    rows = []
    for a in range(rho0.shape[0]):
        for b in range(rho0.shape[1]):
            mc, me = rep.rho_trajectories[a, b], rep.rho_master[a, b]
            rows.append((a, b, mc.real, mc.imag, me.real, me.imag))
    write_csv(out / "unravel.csv",
              ["row", "col", "re_trajectories", "im_trajectories", "re_master", "im_master"], rows)
    write_json(out / "summary.json", {
        "command": "unravel-check", "time": t, "dt": dt, "trajectories": n_traj,
        "trace_distance": rep.trace_distance, "bound": rep.bound, "pass": bool(rep.passed),
        "rho_trajectories": cmat_json(rep.rho_trajectories), "rho_master": cmat_json(rep.rho_master),
    })
    print(f"unraveling check: {n_traj} trajectories, dt={dt:g}, t={t:g}")
    print(f"  trace distance {rep.trace_distance:.3e} vs bound 5/sqrt(N) = {rep.bound:.3e}: "
          f"{'pass' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_FAILED


COMMANDS = {
    "purify": cmd_purify,
    "audit": cmd_audit,
    "evolve": cmd_evolve,
    "demo": cmd_demo,
    "unravel-check": cmd_unravel_check,
}


BUNDLED = {
    "demo_fig3": "demo",
    "demo_identical": "demo",
    "demo_unitary": "demo",
    "fig1_2_evolve": "evolve",
    "fig3_audit": "audit",
    "fig3a_evolve": "evolve",
    "fig3b_evolve": "evolve",
    "fig4_inequivalent": "purify",
    "fig4_purify": "purify",
    "fig5_unravel_check": "unravel-check",
    "identity_evolve": "evolve",
    "jump_audit": "audit",
    "lindblad_audit": "audit",
    "lindblad_dephasing_evolve": "evolve",
    "unitary_audit": "audit",
    "weinberg_audit": "audit",
}


def scenario_path(name: str) -> Path:
    """Filesystem path of a bundled scenario (see ``BUNDLED`` for the matching command)."""
    return Path(str(resources.files("nosig").joinpath(f"scenarios/{name}.json")))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nosig", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotEquivalent as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NosigError as exc:
        print(f"precondition violated: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
