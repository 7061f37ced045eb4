"""Command-line front end.

Subcommands: simulate, eigs, periodogram, coherence, test-stationarity,
reproduce. Parameters may come from a JSON config file (--config) with
command-line flags taking precedence. Exit codes: 0 success, 2 config
error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import studies
from .eigensys import nystrom_decompose
from .errors import ConfigError, DataError, EventspecError, NumericalError
from .inference import Flavor, StationarityConfig, null_percentile, stationarity_test
from .kernels import SmoothedKernel, SmoothingWindow
from .pointproc import HawkesParams, load_csv, save_csv, simulate_hawkes, \
    simulate_piecewise, simulate_poisson
from .spectra import FieldConfig, field
from .wavelets import Wavelet

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config file must contain a JSON object")
    return cfg


def _setting(args, cfg: dict, name: str, default=None):
    """Flag wins over config file wins over default."""
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    return cfg.get(name, default)


def _make_wavelet(kind: str, alpha: float | None) -> Wavelet:
    if kind == "morlet":
        return Wavelet.morlet(alpha) if alpha else Wavelet.morlet()
    if kind == "mexhat":
        return Wavelet.mexican_hat(alpha) if alpha else Wavelet.mexican_hat()
    raise ConfigError(f"unknown wavelet {kind!r} (choose morlet or mexhat)")


def _out_dir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    kind = _setting(args, cfg, "kind")
    seed = int(_setting(args, cfg, "seed", 0))
    if kind == "poisson":
        rates = cfg.get("lambda") or cfg.get("rates")
        if rates is None:
            raise ConfigError("poisson simulation needs 'lambda' in the config")
        T = float(_setting(args, cfg, "T", 0.0) or 0.0)
        if T <= 0:
            raise ConfigError("simulation needs a positive horizon T")
        stream = simulate_poisson(rates, T, seed=seed)
        params_echo = {"kind": "poisson", "lambda": rates, "T": T}
    elif kind == "hawkes":
        params = HawkesParams.from_dict(cfg.get("params", cfg))
        T = float(_setting(args, cfg, "T", 0.0) or 0.0)
        if T <= 0:
            raise ConfigError("simulation needs a positive horizon T")
        stream = simulate_hawkes(params, T, seed=seed)
        params_echo = {"kind": "hawkes", "nu": params.nu.tolist(),
                       "alpha": params.alpha.tolist(),
                       "beta": params.beta.tolist(), "T": T}
    elif kind == "piecewise":
        seg_cfg = cfg.get("segments")
        if not seg_cfg:
            raise ConfigError("piecewise simulation needs 'segments' in the config")
        segments = [((float(s["t0"]), float(s["t1"])),
                     HawkesParams.from_dict(s["params"])) for s in seg_cfg]
        stream = simulate_piecewise(segments, seed=seed)
        params_echo = {"kind": "piecewise", "segments": seg_cfg, "T": stream.T}
    else:
        raise ConfigError("simulate needs kind in {poisson, hawkes, piecewise}")

    out = _out_dir(args)
    events_path = os.path.join(out, args.name + ".csv")
    save_csv(stream, events_path)
    sidecar = dict(params_echo, seed=seed, p=stream.p,
                   counts=stream.counts().tolist())
    with open(os.path.join(out, args.name + ".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
    print(f"wrote {events_path} ({stream.p} streams, "
          f"{int(stream.counts().sum())} events)")
    return 0


def cmd_eigs(args) -> int:
    cfg = _load_config(args.config)
    wavelet = _make_wavelet(_setting(args, cfg, "wavelet", "morlet"),
                            _setting(args, cfg, "alpha"))
    kappa = float(_setting(args, cfg, "kappa", 10.0))
    n_points = int(_setting(args, cfg, "n-points", 512))
    cutoff = float(_setting(args, cfg, "energy-cutoff", 0.999))
    kern = SmoothedKernel(wavelet, SmoothingWindow.rectangular(kappa),
                          n_points=n_points)
    system = nystrom_decompose(kern, energy_cutoff=cutoff)
    out = _out_dir(args)
    eig_path = os.path.join(out, "eigenvalues.csv")
    with open(eig_path, "w") as fh:
        fh.write("l,eta,cumulative_energy\n")
        cum = 0.0
        total = system.eigenvalues.sum()
        for l, eta in enumerate(system.retained_eigenvalues):
            cum += float(eta)
            fh.write(f"{l},{float(eta)!r},{cum / float(total)!r}\n")
    wav_path = os.path.join(out, "eigenwavelets.csv")
    with open(wav_path, "w") as fh:
        fh.write("x," + ",".join(
            f"re_{l},im_{l}" for l in range(system.n_retained)) + "\n")
        full = system.eigen_wavelets_at(system.grid)
        for i, x in enumerate(system.grid):
            row = [repr(float(x))]
            for l in range(system.n_retained):
                row.append(repr(float(np.real(full[i, l]))))
                row.append(repr(float(np.imag(full[i, l]))))
            fh.write(",".join(row) + "\n")
    meta = {"wavelet": wavelet.label, "alpha": wavelet.alpha, "kappa": kappa,
            "n_points": n_points, "energy_cutoff": cutoff,
            "n_retained": system.n_retained,
            "dof": system.degrees_of_freedom()}
    with open(os.path.join(out, "eigs.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    print(f"wrote {eig_path} and {wav_path} "
          f"(retained {system.n_retained}, dof {meta['dof']:.3f})")
    return 0


def _field_from_args(args, want_coherence: bool):
    cfg = _load_config(args.config)
    stream = load_csv(args.events)
    if want_coherence and stream.p < 2:
        raise DataError("coherence requires at least two component streams")
    wavelet = _make_wavelet(_setting(args, cfg, "wavelet", "morlet"),
                            _setting(args, cfg, "alpha"))
    kappa = float(_setting(args, cfg, "kappa", 10.0))
    fc = FieldConfig(
        wavelet=wavelet,
        window=SmoothingWindow.rectangular(kappa),
        n_a=int(_setting(args, cfg, "n-a", 32)),
        n_b=int(_setting(args, cfg, "n-b", 128)),
        a_grid=np.asarray(cfg["a-grid"], dtype=float) if "a-grid" in cfg else None,
        b_grid=np.asarray(cfg["b-grid"], dtype=float) if "b-grid" in cfg else None,
        a_min=_setting(args, cfg, "a-min"),
        energy_cutoff=float(_setting(args, cfg, "energy-cutoff", 0.999)),
        n_points=int(_setting(args, cfg, "n-points", 512)),
    )
    return stream, fc, cfg


def cmd_periodogram(args) -> int:
    stream, fc, _ = _field_from_args(args, want_coherence=False)
    result = field(stream, fc)
    out = _out_dir(args)
    path = os.path.join(out, "field.csv")
    result.to_csv(path)
    with open(os.path.join(out, "field_meta.json"), "w") as fh:
        fh.write(result.meta_json())
    print(f"wrote {path} ({result.meta['n_valid']}/{result.meta['n_grid']} "
          "grid points valid)")
    return 0


def cmd_coherence(args) -> int:
    stream, fc, cfg = _field_from_args(args, want_coherence=True)
    result = field(stream, fc)
    q = float(_setting(args, cfg, "percentile", 0.95))
    system = fc.system
    flavor = Flavor.COMPLEX if fc.wavelet.is_complex else Flavor.REAL
    result.meta["null_percentile_q"] = q
    result.meta["null_percentile"] = null_percentile(
        flavor, system.degrees_of_freedom(), q)
    out = _out_dir(args)
    path = os.path.join(out, "coherence.csv")
    result.to_csv(path)
    with open(os.path.join(out, "coherence_meta.json"), "w") as fh:
        fh.write(result.meta_json())
    print(f"wrote {path}; null {q:.0%} percentile = "
          f"{result.meta['null_percentile']:.4f}")
    return 0


def cmd_test_stationarity(args) -> int:
    cfg = _load_config(args.config)
    stream = load_csv(args.events)
    wavelet = _make_wavelet(_setting(args, cfg, "wavelet", "morlet"),
                            _setting(args, cfg, "alpha"))
    flavor_name = _setting(args, cfg, "flavor")
    flavor = Flavor(flavor_name) if flavor_name else None
    config = StationarityConfig(
        wavelet=wavelet,
        kappa=float(_setting(args, cfg, "kappa", 8.0)),
        c=float(_setting(args, cfg, "c", 0.25)),
        J=int(_setting(args, cfg, "J", 3)),
        flavor=flavor,
        n_points=int(_setting(args, cfg, "n-points", 512)),
    )
    report = stationarity_test(stream, config)
    out = _out_dir(args)
    path = os.path.join(out, "stationarity.json")
    with open(path, "w") as fh:
        fh.write(report.to_json())
    print(report)
    if report.meta["excluded_scales"]:
        print(f"warning: scales {report.meta['excluded_scales']} excluded "
              "(singular segment matrices)", file=sys.stderr)
    print(f"wrote {path}")
    return 0


def cmd_reproduce(args) -> int:
    cfg = _load_config(args.config)
    kwargs = dict(cfg.get("args", {}))
    if args.replicates is not None:
        kwargs["replicates"] = args.replicates
    if args.seed is not None:
        kwargs["seed"] = args.seed
    summary = studies.run_study(args.study, out_dir=_out_dir(args), **kwargs)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventspec",
        description="Wavelet spectral analysis for multivariate point processes")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, events=False):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default .)")
        p.add_argument("--seed", type=int, help="master seed")
        if events:
            p.add_argument("events", help="event CSV file")

    p = sub.add_parser("simulate", help="simulate Poisson/Hawkes event streams")
    common(p)
    p.add_argument("--kind", choices=["poisson", "hawkes", "piecewise"])
    p.add_argument("--T", type=float, help="horizon")
    p.add_argument("--name", default="events", help="output file stem")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eigs", help="eigenvalues and eigen-wavelets of the kernel")
    common(p)
    p.add_argument("--wavelet", choices=["morlet", "mexhat"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--n-points", type=int, dest="n_points")
    p.add_argument("--energy-cutoff", type=float, dest="energy_cutoff")
    p.set_defaults(func=cmd_eigs)

    for name, fn, help_text in [
            ("periodogram", cmd_periodogram, "smoothed wavelet periodogram field"),
            ("coherence", cmd_coherence, "wavelet coherence field with null percentile")]:
        p = sub.add_parser(name, help=help_text)
        common(p, events=True)
        p.add_argument("--wavelet", choices=["morlet", "mexhat"])
        p.add_argument("--alpha", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--n-a", type=int, dest="n_a")
        p.add_argument("--n-b", type=int, dest="n_b")
        p.add_argument("--a-min", type=float, dest="a_min")
        p.add_argument("--n-points", type=int, dest="n_points")
        p.add_argument("--energy-cutoff", type=float, dest="energy_cutoff")
        if name == "coherence":
            p.add_argument("--percentile", type=float)
        p.set_defaults(func=fn)

    p = sub.add_parser("test-stationarity", help="dyadic LRT for stationarity")
    common(p, events=True)
    p.add_argument("--wavelet", choices=["morlet", "mexhat"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--J", type=int)
    p.add_argument("--flavor", choices=["complex", "real"])
    p.add_argument("--n-points", type=int, dest="n_points")
    p.set_defaults(func=cmd_test_stationarity)

    p = sub.add_parser("reproduce", help="run a canned validation study")
    common(p)
    p.add_argument("study", choices=sorted(studies.STUDIES))
    p.add_argument("--replicates", type=int)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except EventspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
