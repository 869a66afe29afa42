#!/usr/bin/env python3
"""
ticketforge - Main CLI Entry Point

Strong lottery tickets by subset-sum pruning: generate targets, construct
tickets in L+1 or 2L mode, audit and measure them, and report budgets,
widths and subset-sum statistics.
"""

import functools
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, List, Optional, Tuple, TypeVar, cast

import click
import pandas as pd

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from src import __version__  # noqa: E402
from src.budget import WIDTH_MODES, error_budget, width_bounds  # noqa: E402
from src.construct import construct  # noqa: E402
from src.core.config import (  # noqa: E402
    MODES,
    NORM_METHODS,
    TOLERANCE_POLICIES,
    ConfigLoader,
    TicketForgeConfig,
    save_config_to_yaml,
)
from src.core.errors import FormatError, TicketForgeError  # noqa: E402
from src.core.interfaces import ReportMetadata  # noqa: E402
from src.formats import (  # noqa: E402
    FORMAT_VERSION,
    canonical_dumps,
    document_sha256,
    gen_target,
    load_model,
    load_ticket,
    network_to_dict,
    save_ticket,
    ticket_to_dict,
)
from src.network.ticket import ticket_stats  # noqa: E402
from src.subsetsum.statistics import SAMPLERS, success_table  # noqa: E402
from src.verify import audit, compare_modes  # noqa: E402

logger = logging.getLogger("ticketforge")

F = TypeVar("F", bound=Callable[..., Any])


def _int_list(ctx: click.Context, param: click.Parameter, value: Optional[str]
              ) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _float_list(ctx: click.Context, param: click.Parameter, value: Optional[str]
                ) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def handle_errors(command: F) -> F:
    """Report TicketForgeError on stderr and exit with its code."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except TicketForgeError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)

    return cast(F, wrapper)


def _metadata(config: TicketForgeConfig, model_doc: Optional[dict] = None) -> dict:
    loader = ConfigLoader()
    meta = ReportMetadata(
        app_version=__version__,
        format_version=FORMAT_VERSION,
        config_sha256=loader.get_config_hash(config.to_dict()),
        model_sha256=document_sha256(model_doc) if model_doc is not None else None,
    )
    return {
        "app_version": meta.app_version,
        "format_version": meta.format_version,
        "config_sha256": meta.config_sha256,
        "model_sha256": meta.model_sha256,
    }


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot write {out}: {e}")
    click.echo(f"Wrote {out}", err=True)


def _emit_table(frame: pd.DataFrame, fmt: str, out: Optional[Path],
                meta: Optional[dict] = None) -> None:
    if fmt == "csv":
        _emit(frame.to_csv(index=False), out)
        return
    document: dict = {"rows": frame.to_dict(orient="records")}
    if meta is not None:
        document["metadata"] = meta
    _emit(canonical_dumps(document), out)


def _config(ctx: click.Context) -> TicketForgeConfig:
    return cast(TicketForgeConfig, ctx.obj["config"])


out_option = click.option(
    "--out", "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the result to this file instead of stdout",
)
format_option = click.option(
    "--format", "fmt",
    type=click.Choice(["json", "csv"], case_sensitive=False),
    default="json",
    help="Report format (default: json)",
)
model_argument = click.argument("model", type=click.Path(exists=True, dir_okay=False,
                                                         path_type=Path))


@click.group()
@click.option(
    "--config", "-c",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Path to YAML configuration file (built-in defaults when omitted)",
)
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging")
@click.version_option(version=__version__, prog_name="ticketforge")
@click.pass_context
def cli(ctx: click.Context, config: Optional[Path], verbose: bool) -> None:
    """
    Construct strong lottery tickets by pruning random networks.

    Examples:

        # Random sparse target and an L+1 ticket for it
        python ticketforge.py gen-target --arch 4,8,8,2 --sparsity 0.5 -o target.json
        python ticketforge.py construct target.json --mode l+1 -o ticket.json

        # Audit the ticket and measure its error
        python ticketforge.py verify ticket.json --model target.json
    """
    loader = ConfigLoader()
    try:
        typed = loader.load_typed(str(config) if config is not None else None)
    except ValueError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)
    level = logging.DEBUG if verbose else getattr(logging, typed.log_level, logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)
    ctx.ensure_object(dict)
    ctx.obj["config"] = typed
    logger.debug("Configuration hash %s", loader.get_config_hash(typed.to_dict())[:8])


@cli.command("gen-target")
@click.option("--arch", required=True, callback=_int_list,
              help="Comma-separated layer widths, e.g. 4,8,8,2")
@click.option("--activation", default="relu", show_default=True,
              help="Activation tag of every layer (relu, lrelu:<a>, tanh, sigmoid, linear)")
@click.option("--output-activation", default=None,
              help="Activation tag of the last layer (defaults to --activation)")
@click.option("--sparsity", type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True,
              help="Fraction of parameters set to zero")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@out_option
@handle_errors
def gen_target_cmd(arch: List[int], activation: str, output_activation: Optional[str],
                   sparsity: float, seed: int, out: Optional[Path]) -> None:
    """Generate a random target network with parameters in [-1, 1]."""
    net = gen_target(arch, activation, sparsity, seed, output_activation)
    _emit(canonical_dumps(network_to_dict(net)), out)


@cli.command("construct")
@model_argument
@click.option("--mode", type=click.Choice(MODES), default=None,
              help="Construction mode (config default when omitted)")
@click.option("--eps", type=float, default=None, help="Target sup-norm error")
@click.option("--delta", type=float, default=None, help="Failure probability")
@click.option("--pool", type=click.IntRange(min=1), default=None, help="Pool size m")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Source seed")
@click.option("--tolerance-policy", type=click.Choice(TOLERANCE_POLICIES), default=None)
@click.option("--workers", type=click.IntRange(min=1), default=None,
              help="Threads solving first attempts")
@click.option("--best-effort", is_flag=True, default=False,
              help="Record failed blocks instead of aborting")
@out_option
@click.pass_context
@handle_errors
def construct_cmd(ctx: click.Context, model: Path, mode: Optional[str], eps: Optional[float],
                  delta: Optional[float], pool: Optional[int], seed: Optional[int],
                  tolerance_policy: Optional[str], workers: Optional[int],
                  best_effort: bool, out: Optional[Path]) -> None:
    """Prune a random source into a ticket approximating MODEL."""
    config = _config(ctx)
    overrides = {
        "mode": mode, "eps": eps, "delta": delta, "pool": pool, "seed": seed,
        "tolerance_policy": tolerance_policy, "workers": workers,
        "best_effort": True if best_effort else None,
    }
    construction = replace(config.construction,
                           **{k: v for k, v in overrides.items() if v is not None})
    config = replace(config, construction=construction)
    target = load_model(model)
    ticket = construct(target, config)
    stats = ticket_stats(ticket)
    if out is None:
        click.echo(canonical_dumps(ticket_to_dict(ticket)), nl=False)
    else:
        save_ticket(ticket, out)
        click.echo(f"Wrote {construction.mode} ticket to {out}: depth {stats.depth}, "
                   f"{stats.param_count} parameters, max width {stats.max_width}", err=True)
    manifest = ticket.manifest
    if manifest is not None and manifest.failed:
        click.echo(f"Warning: {manifest.failed} of {manifest.attempted} blocks above tolerance",
                   err=True)
        sys.exit(2)


@cli.command("verify")
@click.argument("ticket_path", metavar="TICKET",
                type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--model", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="Target model; adds the sampled sup-norm error")
@click.option("--samples", type=click.IntRange(min=1), default=None,
              help="Quasi-random sample count (config default when omitted)")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Sampling seed")
@format_option
@out_option
@click.pass_context
@handle_errors
def verify_cmd(ctx: click.Context, ticket_path: Path, model: Optional[Path],
               samples: Optional[int], seed: Optional[int], fmt: str,
               out: Optional[Path]) -> None:
    """
    Audit TICKET against its manifest and optionally measure its error.

    Exits 2 when a block failed, 1 when the error exceeds eps or the audit
    flags anything, 0 otherwise.
    """
    config = _config(ctx)
    ticket = load_ticket(ticket_path)
    target = load_model(model) if model is not None else None
    report = audit(
        ticket,
        target,
        samples if samples is not None else config.verify.samples,
        seed if seed is not None else config.verify.seed,
        config.verify.corner_limit,
    )
    document = report.to_dict()
    if fmt == "csv":
        row = {k: v for k, v in document.items() if not isinstance(v, (dict, list))}
        row.update({f"blocks_{k}": v for k, v in document["blocks"].items()})
        row.update({k: v for k, v in document["stats"].items() if not isinstance(v, list)})
        row["flagged"] = len(report.flagged)
        _emit(pd.DataFrame([row]).to_csv(index=False), out)
    else:
        model_doc = network_to_dict(target) if target is not None else None
        document["metadata"] = _metadata(config, model_doc)
        _emit(canonical_dumps(document), out)
    sys.exit(report.exit_code)


@cli.command("budget")
@model_argument
@click.option("--eps", type=float, default=None, help="Global sup-norm error")
@click.option("--norms", type=click.Choice(NORM_METHODS), default=None,
              help="Layer-norm bounds: interval (sound) or sampled")
@format_option
@out_option
@click.pass_context
@handle_errors
def budget_cmd(ctx: click.Context, model: Path, eps: Optional[float], norms: Optional[str],
               fmt: str, out: Optional[Path]) -> None:
    """Per-layer parameter tolerances guaranteeing the global error."""
    config = _config(ctx)
    target = load_model(model)
    b = config.bounds
    budget = error_budget(target, eps if eps is not None else config.construction.eps,
                          norms or b.norms, config.verify.samples, config.verify.seed,
                          b.sampled_safety, b.underflow)
    if fmt == "csv":
        frame = pd.DataFrame({
            "layer": list(range(1, budget.depth + 1)),
            "eps_l": budget.eps_layers,
            "M": budget.norms[:budget.depth],
            "width": budget.widths,
        })
        _emit(frame.to_csv(index=False), out)
        return
    document = budget.to_dict()
    document["metadata"] = _metadata(config, network_to_dict(target))
    _emit(canonical_dumps(document), out)


@cli.command("widths")
@click.option("--arch", required=True, callback=_int_list, help="Target layer widths")
@click.option("--eps", type=float, default=None, help="Tolerance eps'")
@click.option("--delta", type=float, default=None, help="Failure probability")
@click.option("--mode", type=click.Choice(WIDTH_MODES), default="full_L_plus_1",
              show_default=True)
@click.option("--C", "big_c", type=float, default=None, help="Universal constant C")
@click.option("--gamma", type=float, default=None, help="Exponent gamma")
@click.option("--pool", type=click.IntRange(min=1), default=None,
              help="Copies per interior neuron in the copy plan")
@format_option
@out_option
@click.pass_context
@handle_errors
def widths_cmd(ctx: click.Context, arch: List[int], eps: Optional[float],
               delta: Optional[float], mode: str, big_c: Optional[float],
               gamma: Optional[float], pool: Optional[int], fmt: str,
               out: Optional[Path]) -> None:
    """Lower bounds on the source widths for a target architecture."""
    config = _config(ctx)
    report = width_bounds(
        arch,
        eps if eps is not None else config.construction.eps,
        delta if delta is not None else config.construction.delta,
        mode,
        C=big_c if big_c is not None else config.bounds.c,
        gamma=gamma if gamma is not None else config.bounds.gamma,
        pool=pool,
    )
    if fmt == "csv":
        frame = pd.DataFrame({"layer": list(range(1, len(report.widths) + 1)),
                              "width": report.widths})
        _emit(frame.to_csv(index=False), out)
        return
    document = report.to_dict()
    document["metadata"] = _metadata(config)
    _emit(canonical_dumps(document), out)


@cli.command("bench-subsetsum")
@click.option("--dist", "dists", multiple=True, type=click.Choice(sorted(SAMPLERS)),
              help="Candidate distribution (repeatable; config default when omitted)")
@click.option("--eps-grid", callback=_float_list, default=None, help="e.g. 0.1,0.01,0.001")
@click.option("--m-grid", callback=_int_list, default=None, help="e.g. 5,10,15,20")
@click.option("--trials", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@format_option
@out_option
@click.pass_context
@handle_errors
def bench_cmd(ctx: click.Context, dists: Tuple[str, ...], eps_grid: Optional[List[float]],
              m_grid: Optional[List[int]], trials: Optional[int], seed: int, workers: int,
              fmt: str, out: Optional[Path]) -> None:
    """Monte-Carlo success rates of random subset-sum instances."""
    config = _config(ctx)
    bench = config.bench
    frame = success_table(
        dists or bench.distributions,
        m_grid or bench.m_grid,
        eps_grid or bench.eps_grid,
        trials if trials is not None else bench.trials,
        seed,
        workers,
    )
    _emit_table(frame, fmt, out, _metadata(config))


@cli.command("compare")
@model_argument
@click.option("--samples", type=click.IntRange(min=1), default=None)
@click.option("--best-effort", is_flag=True, default=False,
              help="Record failed blocks instead of aborting")
@format_option
@out_option
@click.pass_context
@handle_errors
def compare_cmd(ctx: click.Context, model: Path, samples: Optional[int],
                best_effort: bool, fmt: str, out: Optional[Path]) -> None:
    """Construct MODEL in both modes and tabulate error and size."""
    config = _config(ctx)
    if best_effort:
        config = replace(config, construction=replace(config.construction,
                                                      best_effort=best_effort))
    target = load_model(model)
    frame = compare_modes(target, config, samples=samples)
    _emit_table(frame, fmt, out, _metadata(config, network_to_dict(target)))


@cli.command("init-config")
@click.argument("path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--force", is_flag=True, help="Overwrite an existing file")
@click.pass_context
def init_config_cmd(ctx: click.Context, path: Path, force: bool) -> None:
    """Write the active configuration to PATH as YAML."""
    if path.exists() and not force:
        click.echo(f"Error: {path} exists; use --force to overwrite", err=True)
        sys.exit(4)
    save_config_to_yaml(_config(ctx), str(path))
    click.echo(f"Wrote configuration to {path}")


@cli.command("validate-config")
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate_config_cmd(path: Path) -> None:
    """Validate a YAML configuration file."""
    loader = ConfigLoader()
    try:
        config_dict = loader.load_config(str(path))
    except ValueError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)
    click.echo(f"Configuration is valid (hash: {loader.get_config_hash(config_dict)[:8]}...)")


def main() -> None:
    cli(obj={})


if __name__ == "__main__":
    main()
