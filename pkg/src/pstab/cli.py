"""Batch command-line surface: every experiment as a subcommand that writes
CSV or JSON artifacts and prints a one-line summary.

Exit codes: 0 success (all internal identity checks passed), 2 usage error,
3 numeric or identity failure inside a module, 4 resource exhaustion.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import euler, forms, reference, stabilization
from .errors import PstabError

OUTPUT_DIR_ENV = "PSTAB_OUTPUT_DIR"

COMMANDS = ("coeffs", "satake", "stabilize", "euler", "sym2", "petersson",
            "hida", "appendix-example", "factorize")

APPENDIX_TARGETS = {
    "smoothed_L_3_2": 0.826348,
    "rational_product_1e5": 0.826290,
    "ideal_product_1e5": 0.826480,
}


class UsageError(Exception):
    """A flag combination that cannot name a computation."""


@dataclass
class RunConfig:
    command: str
    form: str = "delta"
    s: Optional[complex] = None
    cutoffs: list[float] = field(default_factory=list)
    max_n: int = 100
    prime: int = 0  # 0 means "no prime given"; petersson reads it as level 1
    variant: str = "plain"
    product_field: str = "q"
    output: Optional[str] = None
    format: str = "csv"
    deterministic: bool = True
    threads: int = 1

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        if any(b <= a for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            raise ValueError("cutoffs must be strictly ascending")


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as a complex number") from None


def _parse_cutoffs(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cutoff list {text!r}") from None


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected KEY=VALUE, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pstab",
        description="norm ratios of p-stabilized eigenforms and conditionally "
                    "convergent Euler products",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="KEY=VALUE file supplying defaults (flags win)")
    parser.add_argument("--form", choices=("delta", "cm32"))
    parser.add_argument("--s", type=_parse_complex, help="evaluation point, e.g. 1.5 or 1+0.5j")
    parser.add_argument("--cutoffs", type=_parse_cutoffs, help="comma-separated ascending cutoffs")
    parser.add_argument("--max-n", type=int, dest="max_n")
    parser.add_argument("-p", "--prime", type=int, dest="prime")
    parser.add_argument("--variant", choices=("plain", "stabilized", "eta"))
    parser.add_argument("--field", choices=("q", "zi"), dest="product_field",
                        help="rational (q) or Gaussian-ideal (zi) grouping")
    parser.add_argument("--output", help="artifact path; default derived from the command")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--deterministic", action=argparse.BooleanOptionalAction)
    parser.add_argument("--threads", type=int)
    return parser


_FILE_PARSERS = {
    "form": str,
    "s": _parse_complex,
    "cutoffs": _parse_cutoffs,
    "max_n": int,
    "prime": int,
    "variant": str,
    "product_field": str,
    "output": str,
    "format": str,
    "deterministic": lambda v: v.lower() in ("1", "true", "yes"),
    "threads": int,
}


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse flags (optionally on top of a KEY=VALUE config file)."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    merged: dict = {}
    if ns.config:
        for key, raw in _read_config_file(ns.config).items():
            key = key.replace("-", "_")
            if key not in _FILE_PARSERS:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = _FILE_PARSERS[key](raw)
    for key in _FILE_PARSERS:
        flag_value = getattr(ns, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    return RunConfig(command=ns.command, **merged)


def _default_cutoffs(config: RunConfig) -> list[float]:
    return config.cutoffs or [1e3, 1e4, 1e5]


def _artifact_path(config: RunConfig, stem: str) -> Path:
    if config.output:
        return Path(config.output)
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    return base / f"{stem}.{config.format}"


def _write_rows(config: RunConfig, path: Path, header: list[str], rows: list[list]) -> None:
    if config.format == "csv":
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(repr(float(v)) if isinstance(v, float) else str(v)
                               for v in row) + "\n")
        path.write_text(buf.getvalue())
    else:
        payload = {"schema": 1, "rows": [dict(zip(header, row)) for row in rows]}
        path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def _write_json_obj(config: RunConfig, path: Path, obj: dict) -> None:
    if config.format == "csv":
        rows = [[k, v] for k, v in obj.items()]
        _write_rows(config, path, ["key", "value"], rows)
    else:
        path.write_text(json.dumps({"schema": 1, **obj}, sort_keys=True, indent=1) + "\n")


def _cmd_coeffs(config: RunConfig) -> tuple[str, Path]:
    spec = forms.EigenformSpec.from_name(config.form)
    table = forms.coefficient_table(spec, config.max_n, threads=config.threads)
    path = _artifact_path(config, f"coeffs_{config.form}_{config.max_n}")
    _write_rows(config, path, ["n", "a_n"], [[n, v] for n, v in table.items()])
    return f"coeffs: {config.form} a_n for n <= {config.max_n}", path

def _require_prime_flag(config: RunConfig) -> None:
    if config.prime < 2:
        raise UsageError(f"the {config.command} command needs -p PRIME")


def _cmd_satake(config: RunConfig) -> tuple[str, Path]:
    _require_prime_flag(config)
    spec = forms.EigenformSpec.from_name(config.form)
    sat = forms.satake_for(spec, config.prime)
    path = _artifact_path(config, f"satake_{config.form}_p{config.prime}")
    _write_json_obj(config, path, {
        "prime": sat.prime, "lambda": float(sat.lam),
        "alpha_re": sat.alpha.real, "alpha_im": sat.alpha.imag,
        "beta_re": sat.beta.real, "beta_im": sat.beta.imag,
        "chi1_re": sat.chi1.real, "chi1_im": sat.chi1.imag,
        "chi2_re": sat.chi2.real, "chi2_im": sat.chi2.imag,
    })
    return f"satake: {config.form} at p = {config.prime}, lambda = {sat.lam}", path


def _cmd_stabilize(config: RunConfig) -> tuple[str, Path]:
    _require_prime_flag(config)
    spec = forms.EigenformSpec.from_name(config.form)
    if spec.level % config.prime == 0:
        raise PstabError(f"p = {config.prime} divides the level of {config.form}")
    if spec.source is forms.FormSource.DELTA_LEVEL1:
        lam = forms.delta_prime_eigenvalues(config.prime)[config.prime]
    else:
        lam = forms.cm32_ap_fast(config.prime)
    report = stabilization.stabilization_report(lam, config.prime, spec.weight)
    path = _artifact_path(config, f"stabilize_{config.form}_p{config.prime}")
    _write_json_obj(config, path, json.loads(report.to_json()))
    return (f"stabilize: p = {config.prime}, up_ratio = {report.up_ratio:g}, "
            f"stab_ratio = {report.stab_ratio:g}"), path


def _cmd_euler(config: RunConfig) -> tuple[str, Path]:
    spec = forms.EigenformSpec.from_name(config.form)
    cutoffs = _default_cutoffs(config)
    s = config.s if config.s is not None else 1.0 + 0.0j
    stream = euler.form_stream(spec, config.product_field, int(cutoffs[-1]))
    rows = euler.convergence_table(stream, s, cutoffs)
    path = _artifact_path(config, f"euler_{config.form}_{config.product_field}")
    _write_rows(config, path, ["cutoff", "re", "im", "factor_count"],
                [[r.cutoff, r.value.real, r.value.imag, r.factor_count] for r in rows])
    last = rows[-1]
    return (f"euler: {config.product_field}-grouped product at cutoff {last.cutoff:g} "
            f"= {last.value.real!r}"), path


def _cmd_sym2(config: RunConfig) -> tuple[str, Path]:
    spec = forms.EigenformSpec.from_name(config.form)
    cutoffs = _default_cutoffs(config)
    s = config.s if config.s is not None else 1.0 + 0.0j
    reference_value = None
    if spec.source is forms.FormSource.DELTA_LEVEL1 and s == 1.0 + 0.0j:
        norm = reference.petersson_norm_level1(spec).value
        reference_value = reference.hida_bridge_value(spec.weight, spec.level, norm, {})
    stream = euler.sym2_stream(spec, int(cutoffs[-1]))
    rows = euler.convergence_table(stream, s, cutoffs, reference=reference_value)
    path = _artifact_path(config, f"sym2_{config.form}")
    _write_rows(config, path, ["cutoff", "re", "im", "abs_error"],
                [[r.cutoff, r.value.real, r.value.imag,
                  "" if r.abs_error is None else r.abs_error] for r in rows])
    return f"sym2: product at cutoff {rows[-1].cutoff:g} = {rows[-1].value.real!r}", path


def _cmd_petersson(config: RunConfig) -> tuple[str, Path]:
    spec = forms.EigenformSpec.from_name(config.form)
    if config.prime == 0:
        if config.variant != "plain":
            raise UsageError("stabilized and eta norms live at level p; pass -p 2 or -p 3")
        result = reference.petersson_norm_level1(spec)
        stem = "petersson_level1"
    else:
        result = reference.petersson_norm_gamma0p(spec, config.prime, config.variant)
        stem = f"petersson_p{config.prime}_{config.variant}"
    path = _artifact_path(config, stem)
    _write_json_obj(config, path, json.loads(result.to_json()))
    return f"petersson: value = {result.value!r} +- {result.error_estimate:.2e}", path


def _cmd_hida(config: RunConfig) -> tuple[str, Path]:
    spec = forms.EigenformSpec.from_name(config.form)
    if spec.source is not forms.FormSource.DELTA_LEVEL1:
        raise PstabError("the norm bridge experiment needs the level-1 quadrature")
    norm = reference.petersson_norm_level1(spec)
    bridge = reference.hida_bridge(spec.weight, spec.level, {})
    value = bridge.value_from_norm(norm.value)
    path = _artifact_path(config, "hida_delta")
    _write_json_obj(config, path, {
        "petersson_norm": norm.value,
        "constant": bridge.constant,
        "euler_correction": bridge.euler_correction,
        "sym2_value_at_weight": value,
    })
    return f"hida: L(kappa) = constant * <f,f> = {value!r}", path


def _cmd_appendix_example(config: RunConfig) -> tuple[str, Path]:
    spec = forms.EigenformSpec.cm32()
    table = forms.coefficient_table(spec, 160_000, threads=config.threads)
    smoothed, _ = reference.smoothed_dirichlet_value(table, 1.5, (2e3, 4e3, 8e3))
    q_rows = euler.convergence_table(euler.cm32_rational_stream(100_000), 1.0, [100_000.0])
    z_rows = euler.convergence_table(euler.cm32_ideal_stream(100_000), 1.0, [100_000.0])
    computed = {
        "smoothed_L_3_2": float(smoothed),
        "rational_product_1e5": q_rows[0].value.real,
        "ideal_product_1e5": z_rows[0].value.real,
    }
    rows = [[name, computed[name], APPENDIX_TARGETS[name],
             computed[name] - APPENDIX_TARGETS[name]] for name in APPENDIX_TARGETS]
    path = _artifact_path(config, "appendix_example")
    _write_rows(config, path, ["quantity", "computed", "target", "difference"], rows)
    summary = "  ".join(f"{name}={computed[name]:.6f}(target {APPENDIX_TARGETS[name]:.6f})"
                        for name in APPENDIX_TARGETS)
    worst = max(abs(computed[k] - APPENDIX_TARGETS[k]) for k in APPENDIX_TARGETS)
    if worst > 2e-6:
        raise PstabError(f"appendix example off target by {worst:.2e} > 2e-6")
    return f"appendix-example: {summary}", path


def _cmd_factorize(config: RunConfig) -> tuple[str, Path]:
    spec = forms.EigenformSpec.from_name(config.form)
    cutoffs = [int(c) for c in _default_cutoffs(config)]
    rows = []
    for cutoff in cutoffs:
        rep = reference.global_factorization_check(spec, cutoff)
        rows.append([rep.cutoff, rep.rhs_value, rep.quadrature_norm, rep.rel_gap,
                     rep.unit_identity_residual, rep.zeta_rel_gap])
    path = _artifact_path(config, f"factorize_{config.form}")
    _write_rows(config, path,
                ["cutoff", "rhs", "quadrature_norm", "rel_gap", "unit_residual", "zeta_rel_gap"],
                rows)
    return f"factorize: rel gap {rows[-1][3]:.3e} at cutoff {cutoffs[-1]}", path


_HANDLERS = {
    "coeffs": _cmd_coeffs,
    "satake": _cmd_satake,
    "stabilize": _cmd_stabilize,
    "euler": _cmd_euler,
    "sym2": _cmd_sym2,
    "petersson": _cmd_petersson,
    "hida": _cmd_hida,
    "appendix-example": _cmd_appendix_example,
    "factorize": _cmd_factorize,
}


def dispatch(config: RunConfig) -> int:
    """Run one experiment; returns the process exit code."""
    try:
        summary, path = _HANDLERS[config.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except PstabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except MemoryError:
        print("error: out of memory", file=sys.stderr)
        return 4
    print(f"{summary}  -> {path}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        _build_parser().print_usage(sys.stderr)
        return 2
    try:
        config = parse_config(argv)
    except SystemExit as exc:  # argparse reports its own usage message
        return 2 if exc.code not in (0,) else 0
    except (ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return dispatch(config)


if __name__ == "__main__":
    sys.exit(main())
