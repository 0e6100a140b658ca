"""``spinphonon`` command-line front end.

Every subcommand reads an optional JSON/TOML config file, applies flag
overrides on top (flags win) and writes machine-readable files into
``--out``.  Exit codes: 0 success, 1 validation failure, 2 tolerance
failure, 3 numerical failure.
"""

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, io
from .bath import DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN, FLAVORS, spectral_density_effective, spectral_density_full
from .embed import embed, embedding_to_dict, naive_cutoff, roundtrip_check
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateSpectrumError,
    EmbeddingInstabilityError,
    EmptyProjectionError,
    NumericalError,
    PhysicalValidityError,
    SchemaError,
    SpectralRangeError,
    UnsupportedOperationError,
)
from .ingest import coupling_matrix, parse_dataset, participation_norms, write_dataset
from .spin import field_vector, principal_frame, spin_operators
from .synth import synthetic_dataset

EXIT_OK, EXIT_VALIDATION, EXIT_TOLERANCE, EXIT_NUMERICAL = 0, 1, 2, 3

#: Largest spin + oscillator Hilbert space the oracle subcommand will diagonalize.
ORACLE_MAX_DIM = 4000

DEFAULTS = {
    "dataset": None,
    "temps": [300.0],
    "fields": None,
    "flavor": "quantum",
    "broadening_cm1": 16.0,
    "sv_threshold": 1e-10,
    "secular": True,
    "cross_correlations": False,
    "method": None,
    "effective_method": "exact",
    "cutoff_frac": 0.35,
    "max_rank": None,
    "drop_primary": [],
    "jobs": None,
    "seed": 42,
    "out": ".",
    "tolerance": 0.01,
    "include_naive": False,
    "n_modes": 50,
    "freq_band": [50.0, 3500.0],
    "grad_scale": 1e-3,
    "n_points": DEFAULT_GRID_POINTS,
    "trajectories": False,
    "levels": None,
    "t_max_ps": None,
    "n_times": 201,
    "max_modes": 3,
    "lifetime": False,
    "n_ensemble": 41,
}


class _Parser(argparse.ArgumentParser):
    """Usage errors are validation failures (exit 1), not exit 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


class ToleranceFailure(Exception):
    pass


def _floats(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers: {text!r}") from exc


def _ints(text):
    return [int(x) for x in _floats(text)]


def build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="JSON or TOML file; flags override its values")
    g.add_argument("--dataset", help="dataset file (spd-1 or spd-cart-1 JSON)")
    g.add_argument("--temps", type=_floats, help="temperatures in K, e.g. 10,100,300")
    g.add_argument("--fields", type=_floats, help="field magnitudes in T along the dataset field axis")
    g.add_argument("--flavor", choices=FLAVORS)
    g.add_argument("--broadening-cm1", dest="broadening_cm1", type=float)
    g.add_argument("--sv-threshold", dest="sv_threshold", type=float)
    g.add_argument("--secular", action=argparse.BooleanOptionalAction)
    g.add_argument("--cross-correlations", dest="cross_correlations", action=argparse.BooleanOptionalAction)
    g.add_argument("--method", choices=("full", "projected", "naive-cutoff"))
    g.add_argument("--effective-method", dest="effective_method", choices=("exact", "lorentzian"))
    g.add_argument("--cutoff-frac", dest="cutoff_frac", type=float)
    g.add_argument("--max-rank", dest="max_rank", type=int)
    g.add_argument("--drop-primary", dest="drop_primary", type=_ints,
                   help="indices of primary modes to zero out (ablation)")
    g.add_argument("--jobs", type=int, help="worker processes (default: available CPUs)")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output directory")

    p = _Parser(prog="spinphonon", description="Spin-phonon relaxation with SVD mode projection.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("ingest", parents=[common], argument_default=argparse.SUPPRESS, help="validate a dataset and emit participation data")

    s = sub.add_parser("synth", parents=[common], argument_default=argparse.SUPPRESS, help="write a seeded synthetic dataset")
    s.add_argument("--n-modes", dest="n_modes", type=int)
    s.add_argument("--freq-band", dest="freq_band", type=_floats)
    s.add_argument("--grad-scale", dest="grad_scale", type=float)

    sub.add_parser("embed", parents=[common], argument_default=argparse.SUPPRESS, help="SVD mode projection")

    s = sub.add_parser("spectrum", parents=[common], argument_default=argparse.SUPPRESS, help="bath spectral densities on a grid")
    s.add_argument("--n-points", dest="n_points", type=int)

    s = sub.add_parser("relax", parents=[common], argument_default=argparse.SUPPRESS, help="T1/T2 scan over temperatures and fields")
    s.add_argument("--trajectories", action=argparse.BooleanOptionalAction,
                   help="also dump a trajectory per scan point")
    s.add_argument("--t-max-ps", dest="t_max_ps", type=float)
    s.add_argument("--n-times", dest="n_times", type=int)

    s = sub.add_parser("compare", parents=[common], argument_default=argparse.SUPPRESS, help="full vs projected T1 table")
    s.add_argument("--tolerance", type=float, help="maximum allowed relative deviation")
    s.add_argument("--include-naive", dest="include_naive", action=argparse.BooleanOptionalAction)

    s = sub.add_parser("oracle", parents=[common], argument_default=argparse.SUPPRESS, help="exact spin + primary-mode dynamics")
    s.add_argument("--levels", type=_ints, help="oscillator levels per primary mode")
    s.add_argument("--max-modes", dest="max_modes", type=int)
    s.add_argument("--t-max-ps", dest="t_max_ps", type=float)
    s.add_argument("--n-times", dest="n_times", type=int)
    s.add_argument("--lifetime", action=argparse.BooleanOptionalAction,
                   help="average over Gaussian mode-frequency disorder of width --broadening-cm1")
    s.add_argument("--n-ensemble", dest="n_ensemble", type=int)
    return p


def load_config_file(path):
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise SchemaError(f"cannot read config file: {exc}", path=str(path)) from exc
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            doc = tomllib.loads(text.decode())
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError(f"{path}: {exc}", path=str(path)) from exc
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", path=str(path)) from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: config must be a table/object", path=str(path))
    doc = {k.replace("-", "_"): v for k, v in doc.items()}
    unknown = sorted(set(doc) - set(DEFAULTS))
    if unknown:
        raise SchemaError(f"{path}: unknown config keys {unknown}", field=unknown[0], path=str(path))
    return doc


def resolve_config(args):
    """Defaults, then the config file, then explicit flags."""
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config_file(args.config))
    cfg.update(flags)
    cfg["command"] = args.command
    for key in ("temps", "fields", "freq_band"):
        if cfg[key] is not None:
            cfg[key] = [float(x) for x in np.atleast_1d(cfg[key])]
    if cfg["levels"] is not None:
        cfg["levels"] = [int(x) for x in np.atleast_1d(cfg["levels"])]
    cfg["drop_primary"] = [int(x) for x in np.atleast_1d(cfg["drop_primary"])]
    _validate(cfg)
    return cfg


def _validate(cfg):
    def bad(field, msg):
        raise PhysicalValidityError(f"{field}: {msg}")

    if not cfg["temps"]:
        bad("temps", "list must be non-empty")
    if any(T < 0 for T in cfg["temps"]):
        bad("temps", "temperatures must be >= 0 K")
    if cfg["fields"] is not None and not cfg["fields"]:
        bad("fields", "list must be non-empty")
    if not cfg["broadening_cm1"] > 0:
        bad("broadening_cm1", "must be > 0")
    if not cfg["sv_threshold"] > 0:
        bad("sv_threshold", "must be > 0")
    if cfg["flavor"] not in FLAVORS:
        bad("flavor", f"must be one of {FLAVORS}")
    if not 0 < cfg["cutoff_frac"] <= 1:
        bad("cutoff_frac", "must lie in (0, 1]")
    if cfg["jobs"] is not None and cfg["jobs"] < 1:
        bad("jobs", "must be >= 1")
    if cfg["command"] != "synth" and not cfg["dataset"]:
        bad("dataset", "a dataset file is required")


def _jobs(cfg):
    return cfg["jobs"] or os.cpu_count() or 1


def _prov(cfg, schema):
    # identify the dataset by content so relocating it does not change the hash
    keyed = dict(cfg)
    if cfg["dataset"]:
        keyed["dataset"] = io.file_digest(cfg["dataset"])
    return io.provenance(schema, keyed, cfg["seed"])


def _out(cfg, name):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _tag(x):
    return format(float(x), "g")


def _fields(cfg, ds):
    if cfg["fields"] is not None:
        return cfg["fields"]
    return [float(np.linalg.norm(ds.b_field))]


def _field_vec(ds, B):
    from .dynamics.scan import field_direction

    return B * field_direction(ds.b_field)


def _scan_options(cfg):
    from .dynamics.scan import ScanOptions

    return ScanOptions(
        flavor=cfg["flavor"], broadening=cfg["broadening_cm1"], secular=cfg["secular"],
        cross_correlations=cfg["cross_correlations"], sv_threshold=cfg["sv_threshold"],
        max_rank=cfg["max_rank"], drop_primary=tuple(cfg["drop_primary"]),
        effective_method=cfg["effective_method"], cutoff_frac=cfg["cutoff_frac"],
    )


def _report(lines):
    print("\n".join(lines))


# -- subcommands --------------------------------------------------------------


def cmd_synth(cfg):
    ds = synthetic_dataset(cfg["n_modes"], cfg["seed"], tuple(cfg["freq_band"]), cfg["grad_scale"])
    path = _out(cfg, "dataset.json")
    write_dataset(ds, path)
    _report([f"wrote {path} ({ds.modes.n_modes} modes, seed {cfg['seed']})"])


def cmd_ingest(cfg):
    ds = parse_dataset(cfg["dataset"])
    B = _fields(cfg, ds)[0]
    gc = coupling_matrix(ds.gradients, _field_vec(ds, B), ds.modes)
    n9 = participation_norms(ds.gradients)
    nf = participation_norms(ds.gradients, frobenius=True)
    freqs = ds.modes.frequencies
    counts, edges = np.histogram(np.log10(nf[nf > 0]) if np.any(nf > 0) else [0.0], bins=20)
    gvals, _ = principal_frame(ds.g_tensor)
    summary = {
        "n_modes": int(ds.modes.n_modes),
        "freq_min_cm1": float(freqs.min()),
        "freq_max_cm1": float(freqs.max()),
        "field_T": float(B),
        "principal_g": gvals.tolist(),
        "coupling_norms_cm1": np.linalg.norm(gc.values, axis=1).tolist(),
        "max_coupling_cm1": float(np.abs(gc.values).max()),
        "participation_histogram": {
            "log10_frobenius_edges": edges.tolist(),
            "counts": counts.tolist(),
        },
        "meta": ds.meta,
    }
    io.write_json(_out(cfg, "ingest_summary.json"), summary, _prov(cfg, "spd-ingest-1"))
    io.write_csv(_out(cfg, "participation.csv"), ["freq_cm1", "norm_eq9", "norm_frobenius"],
                 zip(freqs, n9, nf), _prov(cfg, "spd-participation-1"))
    _report([
        f"modes: {ds.modes.n_modes}",
        f"frequency range: {freqs.min():.6g} - {freqs.max():.6g} cm^-1",
        f"principal g: {', '.join(f'{v:.6g}' for v in gvals)}",
        f"max |g_ak| at {B:.6g} T: {summary['max_coupling_cm1']:.6g} cm^-1",
    ])


def _embedding_for(cfg, ds, B):
    gc = coupling_matrix(ds.gradients, _field_vec(ds, B), ds.modes)
    emb = embed(gc, ds.modes, cfg["sv_threshold"], max_rank=cfg["max_rank"])
    if cfg["drop_primary"]:
        emb = emb.truncated([r for r in range(emb.rank) if r not in cfg["drop_primary"]])
    return gc, emb


def cmd_embed(cfg):
    ds = parse_dataset(cfg["dataset"])
    B = _fields(cfg, ds)[0]
    _, emb = _embedding_for(cfg, ds, B)
    doc = embedding_to_dict(emb, ds.modes)
    doc["field_T"] = float(B)
    io.write_json(_out(cfg, "embedding.json"), doc, _prov(cfg, "spd-emb-1"))
    rep = roundtrip_check(emb, ds.modes)
    _report([
        f"r = {emb.rank}",
        "primary frequencies (cm^-1): " + ", ".join(f"{w:.6g}" for w in emb.primary_freqs),
        "entropies: " + ", ".join(f"{s:.6g}" for s in emb.entropies()),
        f"max congruence error: {rep.max_rel_freq_error:.6g}",
        f"orthogonality defect: {rep.orthogonality_defect:.6g}",
    ])
    if not rep.ok():
        raise NumericalError(f"embedding round trip failed: {rep.max_rel_freq_error:.3e}")


def cmd_spectrum(cfg):
    ds = parse_dataset(cfg["dataset"])
    method = cfg["method"] or "full"
    window = DEFAULT_GRID_SPAN * ds.modes.frequencies.max()
    kw = dict(broadening=cfg["broadening_cm1"], flavor=cfg["flavor"], omega_max=window,
              n_points=cfg["n_points"])
    label = method if method != "projected" else f"projected-{cfg['effective_method']}"
    written = []
    for B in _fields(cfg, ds):
        gc, emb = (_embedding_for(cfg, ds, B) if method == "projected"
                   else (coupling_matrix(ds.gradients, _field_vec(ds, B), ds.modes), None))
        for T in cfg["temps"]:
            if method == "full":
                sd = spectral_density_full(gc, ds.modes, T, **kw)
            elif method == "naive-cutoff":
                sd = spectral_density_full(gc, ds.modes, T, select=naive_cutoff(gc, cfg["cutoff_frac"]), **kw)
            else:
                sd = spectral_density_effective(emb, T, method=cfg["effective_method"], **kw)
            vals = sd.values
            name = f"spectrum_T{_tag(T)}K_B{_tag(B)}T_{cfg['flavor']}_{label}.csv"
            written.append(io.write_csv(_out(cfg, name), ["omega_cm1", "S_x", "S_y", "S_z"],
                                        zip(sd.omega, *vals), _prov(cfg, "spd-spectrum-1")))
    _report([f"wrote {p}" for p in written])


def _trajectory(ds, T, B, source, opts, cfg):
    from .dynamics.redfield import excited_state, propagate
    from .dynamics.scan import build_model
    from .units import rate_to_per_second

    model = build_model(ds, T, B, source, opts)
    if cfg["t_max_ps"]:
        t_max = cfg["t_max_ps"]
    else:
        from .dynamics.redfield import analyze

        an = analyze(model)
        finite = [t for t in (an.T1, an.T2) if np.isfinite(t)]
        t_max = 5.0 * max(finite) * 1e12 if finite else 1.0
    res = propagate(model, excited_state(model), np.linspace(0.0, t_max, cfg["n_times"]))
    S = spin_operators(opts.spin)
    spin = np.stack([res.expect(op) for op in S], axis=1)
    return res.times_ps, spin, res.trace_error()


def cmd_relax(cfg):
    from .dynamics.scan import relax_scan

    ds = parse_dataset(cfg["dataset"])
    source = cfg["method"] or "full"
    opts = _scan_options(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rows = relax_scan(ds, cfg["temps"], _fields(cfg, ds), source, opts, jobs=_jobs(cfg))
    io.write_csv(_out(cfg, "relax.csv"), ["T_K", "B_T", "T1_s", "T2_s", "source", "flavor"],
                 ((r.temperature, r.field, r.T1, r.T2, r.source, r.flavor) for r in rows),
                 _prov(cfg, "spd-relax-1"))
    lines = [f"{'T_K':>10} {'B_T':>10} {'T1_s':>14} {'T2_s':>14}"]
    lines += [f"{r.temperature:10.6g} {r.field:10.6g} {r.T1:14.6g} {r.T2:14.6g}" for r in rows]
    if cfg["trajectories"]:
        for r in rows:
            t, spin, tr = _trajectory(ds, r.temperature, r.field, source, opts, cfg)
            name = f"trajectory_T{_tag(r.temperature)}K_B{_tag(r.field)}T_{source}_{cfg['flavor']}.csv"
            io.write_csv(_out(cfg, name), ["t_ps", "Sx", "Sy", "Sz", "trace_err"],
                         (row for row in zip(t, spin[:, 0], spin[:, 1], spin[:, 2], tr)),
                         _prov(cfg, "spd-trajectory-1"))
    _report(lines)


def cmd_compare(cfg):
    from .dynamics.scan import compare_t1

    ds = parse_dataset(cfg["dataset"])
    fields = _fields(cfg, ds)
    if len(fields) != 1:
        raise PhysicalValidityError("fields: compare takes a single field")
    rows = compare_t1(ds, cfg["temps"], fields[0], _scan_options(cfg),
                      include_naive=cfg["include_naive"], jobs=_jobs(cfg))
    cols = ["T_K", "T1_full_s", "T1_proj_s", "rel_dev"]
    if cfg["include_naive"]:
        cols += ["T1_naive_s", "rel_dev_naive"]

    def line(r):
        base = [r.T, r.T1_full, r.T1_proj, r.rel_dev]
        if cfg["include_naive"]:
            base += [r.T1_naive, abs(r.T1_naive - r.T1_full) / r.T1_full]
        return base

    io.write_csv(_out(cfg, "compare.csv"), cols, (line(r) for r in rows), _prov(cfg, "spd-compare-1"))
    worst = max(r.rel_dev for r in rows)
    lines = [" ".join(f"{c:>14}" for c in cols)]
    lines += [" ".join(f"{x:14.6g}" for x in line(r)) for r in rows]
    lines.append(f"max rel_dev = {worst:.6g} (tolerance {cfg['tolerance']:.6g})")
    _report(lines)
    if not worst <= cfg["tolerance"]:
        raise ToleranceFailure(f"max rel_dev {worst:.6g} exceeds tolerance {cfg['tolerance']:.6g}")


def cmd_oracle(cfg):
    from .dynamics.oracle import ReducedHamiltonian, exact_oracle, required_levels
    from .units import natural_to_ps

    ds = parse_dataset(cfg["dataset"])
    B = _fields(cfg, ds)[0]
    _, emb = _embedding_for(cfg, ds, B)
    k = min(emb.rank, cfg["max_modes"])
    freqs = emb.primary_freqs[:k]
    h = field_vector(ds.g_tensor, _field_vec(ds, B))
    t_max = cfg["t_max_ps"] or float(natural_to_ps(20.0 / np.linalg.norm(h)))
    t = np.linspace(0.0, t_max, cfg["n_times"])
    width = cfg["broadening_cm1"] if cfg["lifetime"] else None
    written = []
    for T in cfg["temps"]:
        if cfg["levels"] is not None:
            levels = list(np.broadcast_to(cfg["levels"], freqs.shape))
        else:
            low = freqs - (8.0 * width if width else 0.0)
            levels = [required_levels(max(w, 1e-12), T) for w in low]
        dim = int(2 * np.prod(levels))
        if dim > ORACLE_MAX_DIM:
            raise NumericalError(
                f"oracle Hilbert space of dimension {dim} exceeds {ORACLE_MAX_DIM}; "
                "lower --max-modes, the temperature, or --levels"
            )
        red = ReducedHamiltonian(h, freqs, emb.couplings[:, :k], levels)
        res = exact_oracle(red, T, t, broadening=width, n_ensemble=cfg["n_ensemble"])
        name = f"oracle_T{_tag(T)}K_B{_tag(B)}T.csv"
        written.append(io.write_csv(_out(cfg, name), ["t_ps", "Sx", "Sy", "Sz"],
                                    zip(res.times_ps, *res.spin.T), _prov(cfg, "spd-oracle-1")))
    _report([f"wrote {p}" for p in written])


COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "embed": cmd_embed,
    "spectrum": cmd_spectrum,
    "relax": cmd_relax,
    "compare": cmd_compare,
    "oracle": cmd_oracle,
}

_VALIDATION = (SchemaError, PhysicalValidityError, ConsistencyError, UnsupportedOperationError,
               EmptyProjectionError, DegenerateSpectrumError, FileNotFoundError, ValueError)
_NUMERICAL = (NumericalError, EmbeddingInstabilityError, ConvergenceError, SpectralRangeError,
              np.linalg.LinAlgError, FloatingPointError)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        COMMANDS[cfg["command"]](cfg)
    except ToleranceFailure as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except _NUMERICAL as exc:  # checked first: SpectralRangeError is also a ValueError
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _VALIDATION as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
