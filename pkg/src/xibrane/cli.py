"""Command-line front end.

Usage: ``xibrane [global options] GROUP COMMAND [options]``. Results go to
stdout (or ``--output``) as CSV or JSON; a run manifest with the effective
configuration is written beside file outputs and to stderr otherwise.
Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
4 domain error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import platform
import re
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import mpmath as mp
import numpy as np

from . import airy, brane, ensemble, pq, primes, recip_gamma, theta, xi
from .errors import ConfigTypeError, DomainError, MissingFile, UnknownKey, XibraneError
from .numeric.fourier import gaussian_kernel
from .numeric.precision import MIN_DIGITS

log = logging.getLogger("xibrane")

VERSION = "0.1.0"


def default_cache_path() -> str:
    base = os.environ.get("XDG_CACHE_HOME", os.path.join(os.path.expanduser("~"), ".cache"))
    return os.path.join(base, "xibrane", "zeros.json")


@dataclass(frozen=True)
class RunConfig:
    precision_digits: int = 50
    quadrature_tol: float = 1e-30
    theta_window: float = 3.5
    theta_tail_margin: int = 20
    zero_scan_T: float = 100.0
    zero_scan_step: float = 0.05
    output_format: str = "csv"
    output_path: str | None = None
    seed: int = 0
    zero_cache: str | None = None

    def validate(self) -> "RunConfig":
        if self.precision_digits < MIN_DIGITS:
            raise ConfigTypeError(f"precision_digits must be at least {MIN_DIGITS}")
        for key in ("quadrature_tol", "theta_window", "zero_scan_T", "zero_scan_step"):
            if not getattr(self, key) > 0:
                raise ConfigTypeError(f"{key} must be positive")
        if self.theta_tail_margin < 0:
            raise ConfigTypeError("theta_tail_margin must be nonnegative")
        if self.output_format not in ("csv", "json"):
            raise ConfigTypeError("output_format must be csv or json")
        return self

    @property
    def effective_tol(self) -> float:
        """Quadrature tolerance actually used: never tighter than the working precision allows."""
        return max(self.quadrature_tol, 10.0 ** (10 - self.precision_digits))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# accepted spellings (nested JSON keys are flattened with dots)
_ALIASES = {
    "digits": "precision_digits",
    "tol": "quadrature_tol",
    "window": "theta_window",
    "tail_margin": "theta_tail_margin",
    "zero_scan.T": "zero_scan_T",
    "zero_scan.step": "zero_scan_step",
    "output.format": "output_format",
    "output.path": "output_path",
}
_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _flatten(data: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(name: str, value):
    kind = {"precision_digits": int, "theta_tail_margin": int, "seed": int, "quadrature_tol": float,
            "theta_window": float, "zero_scan_T": float, "zero_scan_step": float}.get(name, str)
    if value is None and name in ("output_path", "zero_cache"):
        return None
    try:
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError
        if kind is int and isinstance(value, str):
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigTypeError(f"config key {name!r} expects {kind.__name__}, got {value!r}", key=name) from None


def _normalize(raw: dict) -> dict:
    out = {}
    for key, value in _flatten(raw).items():
        name = _ALIASES.get(key, key)
        if name not in _FIELDS:
            raise UnknownKey(f"unknown config key {key!r}", key=key)
        out[name] = _coerce(name, value)
    return out


def read_config_file(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"config file {str(p)!r} not found", path=str(p))
    text = p.read_text()
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigTypeError(f"malformed JSON config: {exc}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigTypeError(f"line {lineno} is not key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_config(path=None, flags: dict | None = None) -> RunConfig:
    """Defaults, then the file, then explicit flags (None means not given)."""
    values = {}
    if path is not None:
        values.update(_normalize(read_config_file(path)))
    if flags:
        values.update(_normalize({k: v for k, v in flags.items() if v is not None}))
    return RunConfig(**values).validate()


# -- value parsing and output ------------------------------------------------


_COMPLEX = re.compile(r"^(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?"
                      r"(?P<im>[+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?)[jJ]$")


def parse_number(text: str):
    """Real or complex literal kept at full decimal precision (``1.5``, ``-2.5j``, ``1+2j``)."""
    text = text.strip().replace(" ", "")
    try:
        return mp.mpf(text)
    except (ValueError, TypeError):
        pass
    if text[-1:] in ("j", "J"):
        body = text[:-1]
        try:
            return mp.mpc(0, mp.mpf(body + "1" if body in ("", "+", "-") else body))
        except (ValueError, TypeError):
            pass
    m = _COMPLEX.match(text)
    if not m:
        raise ConfigTypeError(f"cannot parse number {text!r}")
    im = m["im"]
    im = im + "1" if im in ("", "+", "-") else im
    return mp.mpc(mp.mpf(m["re"] or 0), mp.mpf(im))


def parse_list(text: str) -> list:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def _fmt(v, digits: int):
    if isinstance(v, mp.mpc):
        if v.imag == 0:
            return mp.nstr(v.real, digits)
        return mp.nstr(v, digits)
    if isinstance(v, mp.mpf):
        return mp.nstr(v, digits)
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    if isinstance(v, (np.complexfloating, complex)):
        v = complex(v)
        return repr(v.real) if v.imag == 0 else repr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_fmt(x, digits) for x in v]
    if isinstance(v, dict):
        return {k: _fmt(x, digits) for k, x in v.items()}
    return v


def render(rows: list, fmt: str, digits: int) -> str:
    rows = [{k: _fmt(v, digits) for k, v in r.items()} for r in rows]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for r in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- zero cache --------------------------------------------------------------


def load_zeros(cfg: RunConfig, T=None, step=None) -> xi.ZeroList:
    """Cached zeros if precise and tall enough, else a fresh scan written back atomically."""
    T = cfg.zero_scan_T if T is None else T
    step = cfg.zero_scan_step if step is None else step
    path = Path(cfg.zero_cache or default_cache_path())
    if path.is_file():
        try:
            cached = xi.ZeroList.from_dict(json.loads(path.read_text()))
            if cached.precision_digits >= cfg.precision_digits and cached.scan_height >= T and (
                    cached.step is None or cached.step <= mp.mpf(str(step)) + mp.mpf(10) ** -12):
                return cached.up_to(T)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            log.warning("ignoring unreadable zero cache %s: %s", path, exc)
    zl = xi.find_zeros(T, step, cfg.precision_digits)
    atomic_write(path, json.dumps(zl.to_dict(), indent=1))
    return zl


# -- commands ----------------------------------------------------------------


def _grid(a, b, points):
    a, b = mp.mpf(a), mp.mpf(b)
    if points < 2:
        raise DomainError("a grid needs at least two points")
    return [a + (b - a) * k / (points - 1) for k in range(points)]


def cmd_xi(args, cfg):
    d = cfg.precision_digits
    if args.command == "eval":
        v = xi.xi_eval(parse_number(args.z), args.route, args.order, d,
                       cfg.effective_tol, cfg.theta_window, cfg.theta_tail_margin)
        return [{"z": v.z, "route": v.route, "value": v.value, "error_estimate": v.error_estimate}]
    if args.command == "grid":
        rows = []
        for z in _grid(args.start, args.stop, args.points):
            val = xi.xi_reference(z, d)
            rows.append({"z": z, "xi": mp.re(val), "abs_xi": abs(val)})
        return rows
    if args.command == "zeros":
        zl = load_zeros(cfg, args.T, args.step)
        return [{"n": i + 1, "zero": z, "bracket_lo": b[0], "bracket_hi": b[1], "residual": r}
                for i, (z, b, r) in enumerate(zip(zl.zeros, zl.brackets, zl.residuals))]
    if args.command == "coeffs":
        return [{"n": n, "a2n": xi.a2n(n, d)} for n in range(args.n + 1)]
    if args.command == "product":
        zl = load_zeros(cfg, args.T)
        z = parse_number(args.z)
        ref = xi.xi_reference(z, d)
        val = xi.product_reconstruct(z, zl, d)
        return [{"z": z, "zeros_used": len(zl), "product": val, "reference": ref,
                 "relative_error": abs(val - ref) / abs(ref)}]
    raise AssertionError(args.command)


def cmd_airy(args, cfg):
    d = cfg.precision_digits
    if args.command == "eval":
        v = airy.airy_eval(parse_number(args.z), args.route, d)
        return [{"z": v.z, "route": v.route, "value": v.value}]
    if args.command == "grid":
        return [{"z": z, "ai": airy.airy_reference(z, d), "abs_ai": abs(airy.airy_reference(z, d))}
                for z in _grid(args.start, args.stop, args.points)]
    if args.command == "zeros":
        az = airy.airy_zeros(args.count, d)
        return [{"n": i + 1, "zero": z, "residual": r} for i, (z, r) in enumerate(zip(az.zeros, az.residuals))]
    raise AssertionError(args.command)


def _kernel(name, cfg):
    if name == "airy":
        return airy.airy_kernel()
    if name == "xi":
        return theta.xi_kernel(cfg.theta_window, cfg.precision_digits, cfg.theta_tail_margin)
    if name == "gaussian":
        return gaussian_kernel()
    raise DomainError(f"unknown kernel {name!r}")


def cmd_brane(args, cfg):
    d = cfg.precision_digits
    kernel = _kernel(args.kernel, cfg)
    config = brane.BraneConfig(tuple(parse_list(args.z)), args.confluence_tol)
    if args.command == "eval":
        r = brane.brane_partition_result(kernel, config, d, cfg.effective_tol)
        return [{"kernel": kernel.id, "z": list(config.eigenvalues), "value": r.value,
                 "error_estimate": r.error_estimate, "branch": r.branch}]
    if args.command == "check":
        r = brane.brane_brute_check(kernel, config, d)
        return [{"kernel": kernel.id, "z": list(config.eigenvalues), "reduced": r.reduced, "direct": r.direct,
                 "discrepancy": r.discrepancy}]
    raise AssertionError(args.command)


def cmd_pq(args, cfg):
    d = cfg.precision_digits
    if args.command == "sk":
        cs = pq.extract_sk(args.p, d)
        return [{"k": k, "s_k": v, "derivative_variant": cs.derivative_variant[k]} for k, v in cs.s.items()] + [
            {"k": "leading", "s_k": cs.leading_coeff, "derivative_variant": ""}]
    if args.command == "xi-p":
        z = parse_number(args.z)
        v, err = pq.xi_p_eval_result(z, args.p, d, cfg.effective_tol)
        return [{"z": z, "p": args.p, "xi_p": v, "xi": xi.xi_reference(z, d), "error_estimate": err}]
    if args.command == "residual":
        r = pq.gen_airy_residual_result(parse_number(args.z), args.p, d, cfg.effective_tol)
        return [{"z": args.z, "p": args.p, "residual": r.residual, "quadrature_error": r.quadrature_error,
                 "boundary": r.boundary}]
    if args.command == "orthpoly":
        V = pq.quadratic_potential() if args.p is None else pq.build_potential(args.p, d)
        return [{"n": n, "coefficients": list(pq.orth_poly(n, V).coeffs)} for n in range(args.n + 1)]
    raise AssertionError(args.command)


def cmd_primes(args, cfg):
    if args.command == "count":
        r = primes.prime_side(parse_number(args.ell))
        return [{"ell": r.ell, "strict": r.strict, "weak": r.weak, "average": r.average}]
    if args.command == "explicit":
        zl = load_zeros(cfg, args.T)
        r = primes.explicit_check(parse_number(args.ell), zl, args.zeros)
        return [dataclasses.asdict(r)]
    if args.command == "euler":
        z = parse_number(args.z)
        r = primes.euler_log_zeta_result(z, args.pmax, cfg.precision_digits)
        ref = mp.log(xi.zeta(1j * mp.mpc(z) + mp.mpf(1) / 2, cfg.precision_digits))
        return [{"z": z, "value": r.value, "tail_bound": r.tail_bound, "reference": ref,
                 "difference": abs(r.value - ref)}]
    raise AssertionError(args.command)


def cmd_gamma(args, cfg):
    d = cfg.precision_digits
    z = parse_number(args.z)
    if args.command == "recfact":
        r = recip_gamma.recfact_eval(z, args.route, args.N, d)
        return [{"z": z, "route": r.route, "value": r.value, "tail_bound": r.tail_bound}]
    if args.command == "liouville":
        r = recip_gamma.liouville_fourier(z, d, cfg.effective_tol)
        return [{"z": z, "integral": r.value, "gamma_iz": r.reference_gamma, "gamma_gap": r.gamma_gap,
                 "recfact_mismatch": r.recfact_mismatch,
                 "note": "the real-line integral equals Gamma(iz), not 1/Pi(z)"}]
    raise AssertionError(args.command)


def _observable(text):
    kind, _, arg = text.partition(":")
    if kind == "det_shift":
        return ensemble.det_shift(complex(arg))
    if kind == "trace_power":
        return ensemble.trace_power(int(arg))
    if kind == "resolvent":
        return ensemble.resolvent(complex(arg))
    raise DomainError(f"unknown observable {text!r}")


def cmd_mc(args, cfg):
    seed = cfg.seed
    if args.command == "sample":
        s = ensemble.sample_ensemble(args.N, seed)
        return [{"i": i, "j": j, "re": s.matrix[i, j].real, "im": s.matrix[i, j].imag}
                for i in range(args.N) for j in range(args.N)]
    if args.command == "expect":
        return [ensemble.expect_observable(args.N, _observable(args.obs), args.samples, seed).as_row()]
    if args.command == "variance":
        Ns = [int(n) for n in args.Ns.split(",")]
        r = ensemble.variance_scaling(Ns, args.samples, seed)
        return [{"N": n, "variance": v, "covariance_O1_O2": c, "slope": r.slope, "ci_lo": r.ci[0], "ci_hi": r.ci[1],
                 "samples": r.samples, "seed": seed} for n, v, c in zip(r.N_list, r.variances, r.covariances)]
    if args.command == "resolvent":
        grid = np.linspace(args.start, args.stop, args.points)
        r = ensemble.empirical_resolvent_inverse(args.N, grid, args.samples, seed)
        return [{"N": args.N, "max_inversion_gap": r.max_inversion_gap, "support_lo": r.support[0],
                 "support_hi": r.support[1], "samples": args.samples, "seed": seed}]
    raise AssertionError(args.command)


def cmd_compare(args, cfg):
    rows = theta.kernel_gap(digits=cfg.precision_digits)
    worst = max(rows, key=lambda r: r[3])
    return [{"points": len(rows), "max_gap": worst[3], "at_u": worst[0],
             "phi_derived": worst[1], "phi_paper_literal": worst[2]}]


HANDLERS = {"xi": cmd_xi, "airy": cmd_airy, "brane": cmd_brane, "pq": cmd_pq, "primes": cmd_primes,
            "gamma": cmd_gamma, "mc": cmd_mc, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xibrane", description="Xi function as an FZZT brane partition function")
    p.add_argument("--config", help="JSON or key=value config file")
    p.add_argument("--digits", type=int, dest="precision_digits")
    p.add_argument("--tol", type=float, dest="quadrature_tol")
    p.add_argument("--window", type=float, dest="theta_window")
    p.add_argument("--tail-margin", type=int, dest="theta_tail_margin")
    p.add_argument("--scan-T", type=float, dest="zero_scan_T")
    p.add_argument("--scan-step", type=float, dest="zero_scan_step")
    p.add_argument("--format", choices=("csv", "json"), dest="output_format")
    p.add_argument("--output", dest="output_path")
    p.add_argument("--seed", type=int)
    p.add_argument("--zero-cache", dest="zero_cache")
    p.add_argument("-v", "--verbose", action="store_true")
    groups = p.add_subparsers(dest="group", required=True)

    def sub(group, name, **kw):
        return group.add_parser(name, **kw)

    def grid_args(sp, lo, hi, n):
        sp.add_argument("--from", dest="start", type=float, default=lo)
        sp.add_argument("--to", dest="stop", type=float, default=hi)
        sp.add_argument("--points", type=int, default=n)

    g = groups.add_parser("xi").add_subparsers(dest="command", required=True)
    sp = sub(g, "eval")
    sp.add_argument("--z", required=True)
    sp.add_argument("--route", choices=xi.ROUTES, default="reference")
    sp.add_argument("--order", type=int)
    grid_args(sub(g, "grid"), -30, 30, 601)
    sp = sub(g, "zeros")
    sp.add_argument("--T", type=float)
    sp.add_argument("--step", type=float)
    sp = sub(g, "coeffs")
    sp.add_argument("--n", type=int, default=12)
    sp = sub(g, "product")
    sp.add_argument("--z", required=True)
    sp.add_argument("--T", type=float)

    g = groups.add_parser("airy").add_subparsers(dest="command", required=True)
    sp = sub(g, "eval")
    sp.add_argument("--z", required=True)
    sp.add_argument("--route", choices=("reference", "kontsevich"), default="reference")
    grid_args(sub(g, "grid"), -15, 5, 401)
    sp = sub(g, "zeros")
    sp.add_argument("--count", type=int, default=10)

    g = groups.add_parser("brane").add_subparsers(dest="command", required=True)
    for name in ("eval", "check"):
        sp = sub(g, name)
        sp.add_argument("--kernel", choices=("airy", "xi", "gaussian"), default="airy")
        sp.add_argument("--z", required=True, help="comma-separated eigenvalues")
        sp.add_argument("--confluence-tol", type=float, default=1e-6)

    g = groups.add_parser("pq").add_subparsers(dest="command", required=True)
    sp = sub(g, "sk")
    sp.add_argument("--p", type=int, default=7)
    for name in ("xi-p", "residual"):
        sp = sub(g, name)
        sp.add_argument("--z", required=True)
        sp.add_argument("--p", type=int, default=7)
    sp = sub(g, "orthpoly")
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--p", type=int, help="admissible p for the truncated potential (default: quadratic test)")

    g = groups.add_parser("primes").add_subparsers(dest="command", required=True)
    sp = sub(g, "count")
    sp.add_argument("--ell", required=True)
    sp = sub(g, "explicit")
    sp.add_argument("--ell", default="30")
    sp.add_argument("--zeros", type=int, default=100)
    sp.add_argument("--T", type=float, default=240.0)
    sp = sub(g, "euler")
    sp.add_argument("--z", required=True)
    sp.add_argument("--pmax", type=int, default=1000)

    g = groups.add_parser("gamma").add_subparsers(dest="command", required=True)
    sp = sub(g, "recfact")
    sp.add_argument("--z", required=True)
    sp.add_argument("--route", choices=("product", "reference"), default="product")
    sp.add_argument("--N", type=int, default=recip_gamma.DEFAULT_N)
    sp = sub(g, "liouville")
    sp.add_argument("--z", required=True)

    g = groups.add_parser("mc").add_subparsers(dest="command", required=True)
    sp = sub(g, "sample")
    sp.add_argument("--N", type=int, default=4)
    sp = sub(g, "expect")
    sp.add_argument("--N", type=int, default=2)
    sp.add_argument("--obs", default="det_shift:1.0", help="det_shift:Z, trace_power:K or resolvent:Z")
    sp.add_argument("--samples", type=int, default=10_000)
    sp = sub(g, "variance")
    sp.add_argument("--Ns", default="4,8,16,32")
    sp.add_argument("--samples", type=int, default=10_000)
    sp = sub(g, "resolvent")
    sp.add_argument("--N", type=int, default=32)
    sp.add_argument("--samples", type=int, default=10_000)
    grid_args(sp, 2.5, 6.0, 36)

    g = groups.add_parser("compare").add_subparsers(dest="command", required=True)
    sub(g, "kernels")
    return p


_CONFIG_FLAGS = ("precision_digits", "quadrature_tol", "theta_window", "theta_tail_margin", "zero_scan_T",
                 "zero_scan_step", "output_format", "output_path", "seed", "zero_cache")


def dispatch(args, cfg: RunConfig) -> tuple[str, dict]:
    start = time.perf_counter()
    with mp.workdps(cfg.precision_digits + 5):
        rows = HANDLERS[args.group](args, cfg)
    text = render(rows, cfg.output_format, cfg.precision_digits)
    manifest = {
        "command": f"{args.group} {args.command}",
        "config": cfg.to_dict(),
        "effective": {"precision_digits": cfg.precision_digits, "quadrature_tol": cfg.effective_tol},
        "versions": {"xibrane": VERSION, "python": platform.python_version(), "mpmath": mp.__version__,
                     "numpy": np.__version__},
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    return text, manifest


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        cfg = parse_config(args.config, {k: getattr(args, k) for k in _CONFIG_FLAGS})
        text, manifest = dispatch(args, cfg)
    except XibraneError as exc:
        sys.stderr.write(json.dumps({"error": exc.record(), "exit_code": exc.exit_code}) + "\n")
        return exc.exit_code
    if cfg.output_path:
        atomic_write(cfg.output_path, text)
        atomic_write(cfg.output_path + ".manifest.json", json.dumps(manifest, indent=2) + "\n")
    else:
        sys.stdout.write(text)
        sys.stderr.write(json.dumps({"manifest": manifest}) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
