"""Command-line entry point.

Exit codes: 0 ok, 1 suspicious findings with --fail-on-suspicious,
2 unreadable or unparsable input, 3 bad catalog, whitelist or option.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .apimap import CatalogError, load_catalog
from .graphs import build_cfg, cfg_to_dot
from .ir import IRError, lookup_method, parse_program
from .pipeline import analyze
from .report import FORMATS, ReportIOError, build_report, serialize, write_report
from .screen import WhitelistError, default_whitelist, load_whitelist
from .trigger import DEFAULT_BUDGET

EXIT_SUSPICIOUS = 1
EXIT_INPUT = 2
EXIT_CONFIG = 3


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@click.group()
@click.version_option(package_name="artifact", prog_name="hsoscan")
def cli():
    """Find sensitive operations hidden behind environment-probing branches."""


def _read_program(path: str):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliFailure(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return parse_program(text, p.stem)
    except IRError as exc:
        raise CliFailure(EXIT_INPUT, f"{path}: {exc}") from None


def _out_paths(inputs, out, fmt):
    if out is None:
        return [None] * len(inputs)
    if len(inputs) == 1 and not Path(out).is_dir():
        return [Path(out)]
    # several inputs: --out names a directory holding one report per input
    base = Path(out)
    try:
        base.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliFailure(EXIT_CONFIG, f"cannot create output directory {out}: {exc.strerror}") from None
    ext = "json" if fmt == "json" else "txt"
    stems = [Path(i).stem for i in inputs]
    if len(set(stems)) != len(stems):
        raise CliFailure(EXIT_CONFIG, "input files share a name; reports would collide in --out")
    return [base / f"{s}.{ext}" for s in stems]


@cli.command("analyze")
@click.argument("inputs", nargs=-1, required=True)
@click.option("--catalog-dir", default=None, help="Directory overriding the bundled catalog CSVs.")
@click.option("--whitelist", "whitelist_path", default=None, help="Whitelist JSON (default: bundled).")
@click.option("--no-whitelist", is_flag=True, help="Screen with an empty whitelist.")
@click.option("--taint", is_flag=True, help="Run taint analysis and report hidden data flows.")
@click.option("--sources-extended", is_flag=True, help="Add the extended source set (needs --taint).")
@click.option("--budget", default=str(DEFAULT_BUDGET), show_default=True,
              help="Visited-triple budget per trigger inference.")
@click.option("--rule2", default="syntactic", show_default=True, help="syntactic | closure")
@click.option("--format", "fmt", default="json", show_default=True, help="json | text")
@click.option("--out", default=None, help="Report file, or directory for several inputs.")
@click.option("--dump-cfg", "dump_cfg", default=None, metavar="SIG",
              help="Write the CFG of method SIG (Class#name) as DOT to stderr.")
@click.option("--fail-on-suspicious", is_flag=True, help="Exit 1 if any suspicious HSO is found.")
def analyze_cmd(inputs, catalog_dir, whitelist_path, no_whitelist, taint, sources_extended,
                budget, rule2, fmt, out, dump_cfg, fail_on_suspicious):
    """Analyze one or more IR files."""
    code = run_analyze(inputs, catalog_dir, whitelist_path, no_whitelist, taint,
                       sources_extended, budget, rule2, fmt, out, dump_cfg, fail_on_suspicious)
    sys.exit(code)


def _config(catalog_dir, whitelist_path, no_whitelist, taint, sources_extended, budget,
            rule2, fmt):
    if sources_extended and not taint:
        raise CliFailure(EXIT_CONFIG, "--sources-extended requires --taint")
    if no_whitelist and whitelist_path:
        raise CliFailure(EXIT_CONFIG, "--whitelist and --no-whitelist are exclusive")
    if rule2 not in ("syntactic", "closure"):
        raise CliFailure(EXIT_CONFIG, f"--rule2 must be syntactic or closure, got {rule2!r}")
    if fmt not in FORMATS:
        raise CliFailure(EXIT_CONFIG, f"--format must be json or text, got {fmt!r}")
    try:
        budget = int(budget)
    except ValueError:
        raise CliFailure(EXIT_CONFIG, f"--budget must be an integer, got {budget!r}") from None
    if budget < 1:
        raise CliFailure(EXIT_CONFIG, "--budget must be at least 1")
    try:
        catalog = load_catalog(catalog_dir)
    except CatalogError as exc:
        raise CliFailure(EXIT_CONFIG, f"catalog error: {exc}") from None
    try:
        if no_whitelist:
            rules = []
        elif whitelist_path:
            rules = load_whitelist(whitelist_path)
        else:
            rules = default_whitelist()
    except WhitelistError as exc:
        raise CliFailure(EXIT_CONFIG, f"whitelist error: {exc}") from None
    return catalog, rules, budget


def run_analyze(inputs, catalog_dir=None, whitelist_path=None, no_whitelist=False, taint=False,
                sources_extended=False, budget=DEFAULT_BUDGET, rule2="syntactic", fmt="json",
                out=None, dump_cfg=None, fail_on_suspicious=False) -> int:
    try:
        catalog, rules, budget = _config(catalog_dir, whitelist_path, no_whitelist, taint,
                                         sources_extended, budget, rule2, fmt)
        programs = [_read_program(p) for p in inputs]
        targets = _out_paths(inputs, out, fmt)
    except CliFailure as exc:
        click.echo(f"error: {exc.message}", err=True)
        return exc.code

    mode = "default+extended" if sources_extended else "default"
    summary = []
    dumped = False
    for path, program, target in zip(inputs, programs, targets):
        if dump_cfg:
            m = lookup_method(program, dump_cfg)
            if m is not None:
                click.echo(cfg_to_dot(build_cfg(m)), err=True, nl=False)
                dumped = True
        result = analyze(program, catalog, rules, taint=taint, source_mode=mode,
                         budget=budget, rule2=rule2)
        report = build_report(result.findings, result.hsdfs, result.stats, program.app_id,
                              result.diagnostics)
        data = serialize(report, fmt)
        if target is None:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            try:
                write_report(data, target)
            except ReportIOError as exc:
                click.echo(f"error: {exc}", err=True)
                return EXIT_CONFIG
        summary.append((path, result.stats))
    if dump_cfg and not dumped:
        click.echo(f"error: no method {dump_cfg} in the inputs", err=True)
        return EXIT_CONFIG
    if len(inputs) > 1:
        for path, st in summary:
            click.echo(f"{path}: hsos={st['hsos']} suspicious={st['suspicious']} "
                       f"hsdfs={st['hsdfs']}", err=True)
        total = sum(st["suspicious"] for _, st in summary)
        click.echo(f"total: files={len(summary)} suspicious={total}", err=True)
    if fail_on_suspicious and any(st["suspicious"] for _, st in summary):
        return EXIT_SUSPICIOUS
    return 0


@cli.group("corpus")
def corpus_group():
    """Generate planted programs and score reports against them."""


@corpus_group.command("gen")
@click.option("--seed", required=True, type=int)
@click.option("--spec", "spec_path", default=None, help="Plant spec JSON (default: seeded mix).")
@click.option("--out", required=True, help="Output directory for app.ir and truth.json.")
def corpus_gen(seed, spec_path, out):
    """Write app.ir and truth.json for one planted program."""
    from .corpus import PlantSpec, SpecError, default_plant_spec, gen_program
    try:
        if spec_path:
            try:
                data = json.loads(Path(spec_path).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise SpecError(f"cannot load {spec_path}: {exc}") from None
            spec = PlantSpec.from_dict(data, seed)
        else:
            spec = default_plant_spec(seed)
        text, truth = gen_program(spec)
    except SpecError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    base = Path(out)
    base.mkdir(parents=True, exist_ok=True)
    (base / "app.ir").write_text(text, encoding="utf-8")
    (base / "truth.json").write_text(truth.dumps(), encoding="utf-8")
    click.echo(f"wrote {base / 'app.ir'} and {base / 'truth.json'}")


@corpus_group.command("score")
@click.option("--report", "report_path", required=True)
@click.option("--truth", "truth_path", required=True)
def corpus_score(report_path, truth_path):
    """Score a JSON report against planted ground truth."""
    from .corpus import GroundTruth, MismatchError, score
    try:
        report = json.loads(Path(report_path).read_text(encoding="utf-8"))
        truth = GroundTruth.from_dict(json.loads(Path(truth_path).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        result = score(report, truth)
    except MismatchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(json.dumps(result, indent=2))


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="hsoscan", standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        sys.exit(EXIT_CONFIG)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    sys.exit(0)


if __name__ == "__main__":
    main()
