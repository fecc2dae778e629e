"""Command-line interface for assoclab."""

import json
import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
from rich.table import Table

from .core import (
    RunConfig,
    configure_logging,
    console,
    create_check_table,
    create_instance_table,
    create_table,
    create_trace_table,
    get_default_budget,
    get_default_threads,
    load_instance,
    parse_index_set,
    read_json,
    to_jsonable,
    write_artifact,
    write_csv,
)
from .counting import (
    Cycle,
    associativity_lemma_check,
    count_associative_triples,
    count_cycles,
    count_octahedra,
    count_rectangles,
    cycle_bounds,
    iter_cycles,
    measure,
)
from .decomposition import (
    count_dispersed_ring_decompositions,
    count_point_decompositions,
    count_ring_decompositions,
    dispersed_lower_bound_check,
    dispersed_ring_disc,
    iter_point_decompositions,
    iter_ring_decompositions,
    octahedron_sphere,
    polygon_disc,
    single_face_disc,
    slit_octahedron_disc,
    trivial_max,
)
from .entropy import (
    cyclic_space,
    discrete_space,
    entropy_report,
    lemma_checks,
    matrix_space,
    net,
    plunnecke_check,
    popular_elements,
    rough_approx_check,
    ruzsa_cover,
    separated_set,
)
from .exceptions import AssocLabError, InputError, QuadrangleFailure, ResourceExhausted, VerificationFailure
from .extraction import drs_bipartite, bipartite_from_pls, drs_cell_neighborhood, prune_indecomposable, qc_extract
from .pls import generate, parse_generator_spec, to_binary_op, validate
from .quadrangle import QC_KINDS, brandt_reconstruct, check_quadrangle, completion_defect
from .so3 import RotationNet, build_net, fuzzy_op, verify_corollaries, verify_density
from .vankampen import build_presentation, emit_embedding, parse_word, replay_certificate, slit_scan, vk_distance


@dataclass
class Outcome:
    """What a command produced: a JSON-able result, optional CSV rows and an optional table."""

    result: Any
    table: Optional[Table] = None
    csv: Optional[Tuple[Sequence[str], List[Sequence[Any]]]] = None
    exit_code: int = 0


# Handlers: each turns a RunConfig into an Outcome.


def _instance(config: RunConfig):
    return load_instance(config.instance, config.gen)


def _count(config: RunConfig) -> Outcome:
    pls = _instance(config)
    p = config.params
    kind, r = p.get("kind", "label"), int(p.get("r", 2))
    method = p.get("method")
    metric = config.action
    if metric == "octahedra":
        report = measure("octahedra", count_octahedra, pls, method=method or "hash-grouped")
    elif metric == "cycles":
        report = measure(f"cycles_{kind}_{2 * r}", count_cycles, pls, kind, r, method=method or "matrix")
    elif metric == "rectangles":
        report = measure("rectangles", lambda q, method: count_rectangles(q), pls, method="histogram")
    elif metric == "assoc":
        report = measure("associative_triples", count_associative_triples, to_binary_op(pls), method=method or "vectorized")
    elif metric == "bounds":
        bounds = cycle_bounds(pls, kind, r)
        rows = [{"metric": f"cycles_{kind}_{2 * r}", "measured": bounds["count"], "bound": f"[{bounds['lower']}, {bounds['upper']}]", "pass": bounds["ok"]}]
        return Outcome(bounds, create_check_table("Cycle-count bounds", rows), exit_code=0 if bounds["ok"] else 2)
    elif metric == "assoc-lemma":
        check = associativity_lemma_check(to_binary_op(pls))
        rows = [{"metric": "octahedra", "measured": check["octahedra"], "bound": check["bound"], "pass": check["ok"]}]
        return Outcome(check, create_check_table("Associative triples and octahedra", rows), exit_code=0 if check["ok"] else 2)
    else:
        raise InputError(f"unknown count metric {metric!r}")
    row = (report.metric, report.value, report.method, f"{report.elapsed_ms:.3f}")
    header = ("metric", "value", "method", "elapsed_ms")
    return Outcome(dict(zip(header, row)), create_table("Counts", header, [row]), (header, [row]))


def _qc(config: RunConfig) -> Outcome:
    pls = _instance(config)
    p = config.params
    if config.action == "check":
        kinds = QC_KINDS if p.get("kind", "all") == "all" else (p["kind"],)
        violations = {kind: check_quadrangle(pls, kind) for kind in kinds}
        result = {"ok": not any(violations.values()), "violations": {k: [v.to_dict() for v in vs] for k, vs in violations.items()}}
        table = create_table("Quadrangle violations", ("Kind", "Count", "Values"), [(k, len(vs), [list(v.values) for v in vs[:5]]) for k, vs in violations.items()])
        if p.get("strict") and not result["ok"]:
            first = next(vs[0] for vs in violations.values() if vs)
            raise QuadrangleFailure(f"{first.kind} quadrangle condition fails", first)
        return Outcome(result, table)
    if config.action == "defect":
        kind, r = p.get("kind", "label"), int(p.get("r", 2))
        value, histogram = completion_defect(pls, "label" if kind == "all" else kind, r, verbose=True)
        result = {"defect": value, "histogram": histogram}
        return Outcome(result, create_table("Completion defect", ("Completions", "Prefixes"), sorted(histogram.items())))
    if config.action in ("reconstruct", "brandt"):
        group = brandt_reconstruct(pls, int(p.get("row", 0)), int(p.get("column", 0)))
        result = dict(group.to_dict(), checks=group.check())
        table = create_table(f"Group of order {group.n} (identity {group.identity})", ["*"] + [str(b) for b in range(group.n)], [[a] + list(row) for a, row in enumerate(group.table)])
        return Outcome(result, table)
    raise InputError(f"unknown qc action {config.action!r}")


def _parse_cycle(pls, p: Dict[str, Any]) -> Cycle:
    kind, r = p.get("kind", "label"), int(p.get("r", 2))
    text = p.get("cycle")
    if text:
        try:
            cells = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"cycle must be a JSON list of triples: {e}") from None
        return Cycle(kind, tuple(tuple(int(v) for v in c) for c in cells))
    first = next(iter_cycles(pls, kind, r), None)
    if first is None:
        raise InputError(f"instance has no {2 * r}-cycles of kind {kind}")
    return first


DISCS: Dict[str, Callable[[int], Any]] = {
    "polygon": polygon_disc,
    "dispersed": dispersed_ring_disc,
    "single": lambda r: single_face_disc(),
    "slit": lambda r: slit_octahedron_disc(),
    "sphere": lambda r: octahedron_sphere(),
}


def _decomp(config: RunConfig) -> Outcome:
    p = config.params
    if config.action == "trivmax":
        name = p.get("disc", "polygon")
        if name not in DISCS:
            raise InputError(f"unknown disc {name!r}; expected one of {', '.join(DISCS)}")
        n = _instance(config).n if (config.instance or config.gen) else int(p.get("n") or 0)
        if n <= 0:
            raise InputError("trivmax needs an instance or a positive --n")
        disc = DISCS[name](int(p.get("r", 2))).with_fixed_boundary()
        bound, internal = trivial_max(disc, n)
        result = {"disc": name, "n": n, "internal_vertices": internal, "bound": bound}
        return Outcome(result, create_table("Trivial maximum", ("Disc", "n", "V_I", "Bound"), [(name, n, internal, bound)]))

    pls = _instance(config)
    cycle = _parse_cycle(pls, p)
    eps, theta = float(p.get("eps", 0.0)), float(p.get("theta", 0.0))
    limit = int(p.get("limit", 0))
    result: Dict[str, Any] = {"cycle": cycle.to_dict()}
    if config.action == "point":
        result["count"] = count_point_decompositions(pls, cycle, eps)
        if limit:
            result["witnesses"] = [d.to_dict() for _, d in zip(range(limit), iter_point_decompositions(pls, cycle, eps))]
    elif config.action == "ring":
        result["count"] = count_ring_decompositions(pls, cycle, theta, config.budget)
        if limit:
            result["witnesses"] = [d.to_dict() for _, d in zip(range(limit), iter_ring_decompositions(pls, cycle, theta, config.budget))]
    elif config.action == "dispersed":
        result["count"] = count_dispersed_ring_decompositions(pls, cycle, config.budget)
    elif config.action == "bound":
        result.update(dispersed_lower_bound_check(pls, cycle, theta, config.budget))
        rows = [{"metric": "dispersed", "measured": result["dispersed"], "bound": result["bound"], "pass": result["ok"]}]
        return Outcome(result, create_check_table("Dispersed decompositions", rows), exit_code=0 if result["ok"] else 2)
    else:
        raise InputError(f"unknown decomposition kind {config.action!r}")
    table = create_table("Decompositions", ("Kind", "Signature", "Count"), [(config.action, list(cycle.signature), result["count"])])
    return Outcome(result, table)


def _extract(config: RunConfig) -> Outcome:
    pls = _instance(config)
    p = config.params
    seed, randomize, k = config.seed, bool(p.get("randomize", False)), int(p.get("k", 2))
    if config.action == "bipartite":
        selection = drs_bipartite(bipartite_from_pls(pls), k, seed, randomize=randomize)
        result = selection.to_dict()
        return Outcome(result, create_table("Bipartite selection", ("Side", "Size"), [("X", len(selection.left)), ("Y", len(selection.right))]))
    if config.action == "qc":
        subset, trace = qc_extract(
            pls, seed, k, p.get("eps"), float(p.get("delta", 0.01)), float(p.get("gamma", 0.0)),
            float(p.get("theta", 0.0)), int(p.get("b", 9)), budget=config.budget, randomize=randomize,
        )
    elif config.action == "drs":
        eps = p.get("eps")
        if eps is None:
            raise InputError("drs needs --eps")
        subset, trace = drs_cell_neighborhood(pls, float(eps), float(p.get("delta", 0.01)), k, seed, randomize)
    elif config.action == "prune":
        subset, trace = prune_indecomposable(pls, k, float(p.get("gamma", 0.0)), float(p.get("theta", 0.0)), config.budget, seed, randomize)
    else:
        raise InputError(f"unknown extraction {config.action!r}")
    trace_data = trace.to_dict()
    if p.get("trace"):
        write_artifact(p["trace"], config, trace_data)
    result = {"kept": len(subset), "of": len(pls), "verified": trace.verified, "instance": subset.to_dict(), "trace": trace_data}
    return Outcome(result, create_trace_table(trace_data["stages"]))


def _vk(config: RunConfig) -> Outcome:
    pls = _instance(config)
    p = config.params
    area = int(p.get("area", 8))
    cap = p.get("cap")
    cap = int(cap) if cap is not None else None
    max_states = p.get("max_states")
    max_states = int(max_states) if max_states is not None else config.budget
    if config.action == "dist":
        pres = build_presentation(pls)
        w1, w2 = parse_word(pres, p.get("w1", "")), parse_word(pres, p.get("w2", ""))
        outcome = vk_distance(pres, w1, w2, area, cap, max_states, bool(p.get("insertions", False)))
        replayed = replay_certificate(pres, w1, w2, outcome) if outcome.proven else None
        if replayed is False:
            raise VerificationFailure("certificate does not replay")
        result = dict(outcome.to_dict(pres), replayed=replayed)
        rows = [(i, w) for i, w in enumerate(result["certificate"])]
        table = create_table(f"{outcome.status} (area {outcome.area})", ("Step", "Word"), rows)
        return Outcome(result, table)
    if config.action == "scan":
        witnesses = slit_scan(pls)
        result = {"pairs": [w.to_dict() for w in witnesses]}
        table = create_table("Slit octahedra", ("Labels", "Triples"), [([pls.name_of(2, z) for z in w.labels], w.triples) for w in witnesses])
        return Outcome(result, table)
    if config.action == "embed":
        report = emit_embedding(pls, area, cap, max_states, config.threads)
        result = report.to_dict()
        rows = [(e.get("class"), e.get("pair"), e.get("status"), e.get("area")) for e in report.separation]
        return Outcome(result, create_table("Generator separation", ("Class", "Pair", "Status", "Area"), rows), exit_code=0 if report.certified else 2)
    raise InputError(f"unknown vk action {config.action!r}")


def _space(text: str):
    head, _, rest = text.partition(":")
    if head == "cyclic" and rest:
        return cyclic_space(int(rest))
    if head == "discrete" and rest:
        return discrete_space(int(rest))
    data = read_json(text)
    return matrix_space(data.get("result", data) if isinstance(data, dict) else {})


def _entropy(config: RunConfig) -> Outcome:
    p = config.params
    space = _space(p.get("space", "cyclic:12"))
    pts = parse_index_set(p["set"]) if p.get("set") else space.all
    if any(not 0 <= i < len(space) for i in pts):
        raise InputError(f"point indices must lie in [0, {len(space)})")
    eps, delta = float(p.get("eps", 1.0)), float(p.get("delta", p.get("eps", 1.0)))
    mode = p.get("mode", "greedy")

    def points(idx):
        return [space.points[i] for i in idx]

    if config.action == "sigma":
        chosen = separated_set(space, pts, eps, mode)
        result = {"sigma": len(chosen), "mode": mode, "witness": points(chosen)}
    elif config.action == "nu":
        chosen = net(space, pts, eps, mode, strict=not p.get("closed", False))
        result = {"nu": len(chosen), "mode": mode, "closed": bool(p.get("closed", False)), "witness": points(chosen)}
    elif config.action == "report":
        result = entropy_report(space, pts, eps).to_dict()
    elif config.action == "cover":
        other = parse_index_set(p.get("with", "0"))
        k = ruzsa_cover(space, pts, other, eps)
        result = {"K": points(k), "size": len(k), "verified": True}
    elif config.action == "rag":
        found = rough_approx_check(space, pts, int(p.get("k", 1)), delta, int(p.get("samples", 0)), config.seed)
        result = found.to_dict(space)
        return Outcome(result, create_table("Rough approximate group", ("Verified", "K"), [(found.verified, result["translates"])]), exit_code=0 if found.verified else 2)
    elif config.action == "popular":
        found = popular_elements(space, pts, eps, delta, int(p.get("m", 1)), bool(p.get("symmetric", False)), bool(p.get("exhaustive", False)))
        result = {"popular": points(found), "size": len(found)}
    elif config.action == "lemmas":
        v = parse_index_set(p["v"]) if p.get("v") else None
        w = parse_index_set(p["w"]) if p.get("w") else None
        rows = lemma_checks(space, pts, eps, v, w)
        ok = all(r["ok"] for r in rows)
        return Outcome({"checks": rows, "ok": ok}, create_check_table("Entropy inequalities", rows, "lemma"), exit_code=0 if ok else 2)
    elif config.action == "plunnecke":
        result = plunnecke_check(space, pts, eps, delta)
        ok = all(r["ok"] for r in result["checks"])
        return Outcome(result, create_check_table("Popular differences", result["checks"], "lemma"), exit_code=0 if ok else 2)
    else:
        raise InputError(f"unknown entropy action {config.action!r}")
    table = create_table(f"{config.action} on {space.name or 'space'}", list(result), [list(result.values())])
    return Outcome(result, table)


def _so3(config: RunConfig) -> Outcome:
    p = config.params
    if p.get("net"):
        data = read_json(p["net"])
        rotation_net = RotationNet.from_dict(data.get("result", data))
    else:
        rotation_net = build_net(float(p.get("delta", 0.45)), config.seed, int(p.get("rejections", 10_000)), int(p.get("max_points", 20_000)))
    if config.action == "net":
        result = rotation_net.to_dict()
        table = create_table("Rotation net", ("Delta", "Points", "Evidence", "Min separation"), [(rotation_net.delta, len(rotation_net), rotation_net.evidence, rotation_net.min_separation())])
        return Outcome(result, table)
    theta = float(p.get("theta", 0.4))
    if config.action == "op":
        op = fuzzy_op(rotation_net, theta)
        result = {"n": op.n, "defined": len(op.table), "triples": op.triples()}
        return Outcome(result, create_table("Fuzzy product", ("Points", "Defined pairs"), [(op.n, len(op.table))]))
    if config.action == "verify":
        rows = [verify_density(rotation_net, theta)] + verify_corollaries(rotation_net, theta, float(p.get("eps", 0.1)), seed=config.seed)
        header = ("metric", "measured", "bound", "pass")
        csv_rows = [tuple(r[h] for h in header) for r in rows]
        ok = all(r["pass"] for r in rows)
        return Outcome({"checks": rows, "points": len(rotation_net)}, create_check_table("SO(3) corollaries", rows), (header, csv_rows), 0 if ok else 2)
    raise InputError(f"unknown so3 action {config.action!r}")


def _gen(config: RunConfig) -> Outcome:
    pls = generate(parse_generator_spec(config.gen or ""))
    fmt = config.params.get("format") or ("csv" if (config.output or "").endswith(".csv") else "json")
    triples = ("x", "y", "z"), [list(t) for t in pls.triples]
    return Outcome(pls.to_dict(), create_instance_table(pls) if max(pls.dims) <= 16 else None, triples if fmt == "csv" else None)


def _validate(config: RunConfig) -> Outcome:
    data = read_json(config.instance)
    if isinstance(data, dict) and "result" in data and "triples" not in data:
        data = data["result"]
    if not isinstance(data, dict) or "triples" not in data:
        raise InputError(f"{config.instance} has no 'triples' entry")
    dims = data.get("dims") or [max((t[i] for t in data["triples"]), default=-1) + 1 for i in range(3)]
    report = validate(data["triples"], dims)
    result = report.to_dict()
    table = create_table("Validation", ("Kind", "Witness"), [(v["kind"], v["witness"]) for v in result["violations"]] or [("ok", "-")])
    return Outcome(result, table, exit_code=0 if report.ok else 1)


HANDLERS: Dict[str, Callable[[RunConfig], Outcome]] = {
    "count": _count,
    "qc": _qc,
    "decomp": _decomp,
    "extract": _extract,
    "vk": _vk,
    "entropy": _entropy,
    "so3": _so3,
    "gen": _gen,
    "validate": _validate,
}


def execute(config: RunConfig) -> Outcome:
    """Run the module operation named by the configuration, honouring its time budget."""
    handler = HANDLERS.get(config.command)
    if handler is None:
        raise InputError(f"unknown command {config.command!r}")
    if not config.time_budget:
        return handler(config)
    box: Dict[str, Any] = {}

    def target():
        try:
            box["outcome"] = handler(config)
        except BaseException as e:  # re-raised in the caller's thread
            box["error"] = e

    worker = threading.Thread(target=target, daemon=True)
    worker.start()
    worker.join(config.time_budget)
    if worker.is_alive():
        raise ResourceExhausted(f"{config.command} did not finish within {config.time_budget} s")
    if "error" in box:
        raise box["error"]
    return box["outcome"]


def _emit(config: RunConfig, outcome: Outcome, pretty: bool) -> None:
    if config.output:
        if outcome.csv is not None:
            header, rows = outcome.csv
            write_csv(config.output, header, rows, config)
        else:
            write_artifact(config.output, config, outcome.result)
        console.print(f"[green]Success:[/] Wrote {config.output}")
        return
    if pretty and outcome.table is not None:
        console.print(outcome.table)
    elif outcome.csv is not None:
        _, rows = outcome.csv
        for row in rows:
            click.echo(",".join(str(to_jsonable(v)) for v in row))
    else:
        click.echo(json.dumps(to_jsonable(outcome.result), indent=2 if pretty else None))


def run(config: RunConfig, pretty: bool = False) -> int:
    """Execute a configuration, emit its output and return the exit status."""
    try:
        outcome = execute(config)
        _emit(config, outcome, pretty)
    except AssocLabError as e:
        console.print(f"[bold red]Error:[/] {e}")
        return e.exit_code
    return outcome.exit_code


def _run(ctx: click.Context, command: str, action: Optional[str] = None, **kwargs: Any) -> None:
    """Build the RunConfig from the command line and exit with the status of its run."""
    opts = ctx.obj
    params = {k: v for k, v in kwargs.pop("params", {}).items() if v is not None and v is not False}
    config = RunConfig(
        command=command,
        action=action,
        threads=opts["threads"],
        time_budget=opts["time_budget"],
        params=params,
        **kwargs,
    )
    status = run(config, opts["pretty"])
    if status:
        ctx.exit(status)


def instance_options(fn):
    fn = click.option("--gen", "gen", help="Generator spec, e.g. cyclic:5 or restrict:0.5:1:cyclic:8")(fn)
    fn = click.option("--in", "instance", type=click.Path(), help="Instance JSON file")(fn)
    return fn


def output_option(fn):
    return click.option("--out", "-o", "output", type=click.Path(), help="Write the result to this file")(fn)


@click.group()
@click.option("--pretty", is_flag=True, help="Render rich tables instead of JSON/CSV")
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging")
@click.option("--threads", type=int, default=None, help="Worker threads (default: ASSOCLAB_THREADS or 1)")
@click.option("--time-budget", type=float, default=None, help="Wall-clock limit in seconds")
@click.pass_context
def cli(ctx: click.Context, pretty: bool, verbose: bool, threads: Optional[int], time_budget: Optional[float]):
    """assoclab - associativity, quadrangle conditions and approximate groups."""
    configure_logging(verbose)
    try:
        default_threads = get_default_threads()
    except InputError as e:
        console.print(f"[bold red]Error:[/] {e}")
        ctx.exit(e.exit_code)
    ctx.obj = {"pretty": pretty, "threads": threads or default_threads, "time_budget": time_budget}


def _budget(value: Optional[int]) -> int:
    return value if value is not None else get_default_budget()


@cli.command()
@click.argument("metric", type=click.Choice(["octahedra", "cycles", "rectangles", "assoc", "bounds", "assoc-lemma"]))
@instance_options
@click.option("--kind", type=click.Choice(["label", "row", "column"]), default="label", help="Cycle kind")
@click.option("--r", "r", type=int, default=2, help="Half-length of cycles")
@click.option("--method", help="Counting method (hash-grouped, naive, matrix, walk, spectral, vectorized)")
@output_option
@click.pass_context
def count(ctx, metric, instance, gen, kind, r, method, output):
    """Count rectangles, octahedra, cycles or associative triples."""
    _run(ctx, "count", metric, instance=instance, gen=gen, output=output, params={"kind": kind, "r": r, "method": method})


@cli.command()
@click.argument("action", type=click.Choice(["check", "defect", "reconstruct", "brandt"]))
@instance_options
@click.option("--kind", type=click.Choice(["all", "label", "row", "column"]), default="all")
@click.option("--r", "r", type=int, default=2, help="Half-length for the completion defect")
@click.option("--row", type=int, default=0, help="Base row for group reconstruction")
@click.option("--column", type=int, default=0, help="Base column for group reconstruction")
@click.option("--strict", is_flag=True, help="Exit with status 2 when a violation exists")
@output_option
@click.pass_context
def qc(ctx, action, instance, gen, kind, r, row, column, strict, output):
    """Quadrangle checks, completion defect and group reconstruction."""
    _run(ctx, "qc", action, instance=instance, gen=gen, output=output,
         params={"kind": kind, "r": r, "row": row, "column": column, "strict": strict})


@cli.command()
@click.argument("action", type=click.Choice(["point", "ring", "dispersed", "bound", "trivmax"]))
@instance_options
@click.option("--cycle", help="Cycle as a JSON list of [column, row, label] triples")
@click.option("--kind", type=click.Choice(["label", "row", "column"]), default="label")
@click.option("--r", "r", type=int, default=2)
@click.option("--eps", type=float, default=None, help="Popularity threshold for point decompositions")
@click.option("--theta", type=float, default=None, help="Popularity threshold for ring decompositions")
@click.option("--limit", type=int, default=None, help="List up to this many witnesses")
@click.option("--disc", type=click.Choice(sorted(DISCS)), default="polygon", help="Disc for trivmax")
@click.option("--n", "n", type=int, default=None, help="Instance order for trivmax without an instance")
@click.option("--budget", type=int, default=None, help="State budget (default: ASSOCLAB_BUDGET or 10^8)")
@output_option
@click.pass_context
def decomp(ctx, action, instance, gen, cycle, kind, r, eps, theta, limit, disc, n, budget, output):
    """Point, ring and dispersed ring decompositions; trivial maxima of discs."""
    _run(ctx, "decomp", action, instance=instance, gen=gen, output=output, budget=_budget(budget),
         params={"cycle": cycle, "kind": kind, "r": r, "eps": eps, "theta": theta, "limit": limit, "disc": disc, "n": n})


@cli.command()
@click.argument("action", type=click.Choice(["qc", "drs", "prune", "bipartite"]))
@instance_options
@click.option("--seed", type=int, default=0)
@click.option("--k", "k", type=int, default=2, help="Largest cycle half-length considered")
@click.option("--eps", type=float, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--theta", type=float, default=None)
@click.option("--b", "b", type=int, default=None, help="Area bound of the independent-set stage")
@click.option("--randomize", is_flag=True, help="Seeded random tie-breaking")
@click.option("--trace", type=click.Path(), help="Write the extraction trace to this file")
@click.option("--budget", type=int, default=None, help="State budget (default: ASSOCLAB_BUDGET or 10^8)")
@output_option
@click.pass_context
def extract(ctx, action, instance, gen, seed, k, eps, delta, gamma, theta, b, randomize, trace, budget, output):
    """Extract a subset satisfying the quadrangle conditions."""
    _run(ctx, "extract", action, instance=instance, gen=gen, output=output, seed=seed, budget=_budget(budget),
         params={"k": k, "eps": eps, "delta": delta, "gamma": gamma, "theta": theta, "b": b, "randomize": randomize, "trace": trace})


@cli.command()
@click.argument("action", type=click.Choice(["dist", "scan", "embed"]))
@instance_options
@click.option("--w1", default="", help="First word, e.g. 'x0 y1' or 'd'")
@click.option("--w2", default="", help="Second word")
@click.option("--budget", "area", type=int, default=8, help="Area budget")
@click.option("--cap", type=int, default=None, help="Word length cap")
@click.option("--max-states", type=int, default=None, help="Search state limit (default: ASSOCLAB_BUDGET or 10^8)")
@click.option("--insertions", is_flag=True, help="Also insert whole relators (off by default)")
@output_option
@click.pass_context
def vk(ctx, action, instance, gen, w1, w2, area, cap, max_states, insertions, output):
    """Van Kampen distances, slit octahedra and the metric embedding."""
    _run(ctx, "vk", action, instance=instance, gen=gen, output=output, budget=_budget(max_states),
         params={"w1": w1, "w2": w2, "area": area, "cap": cap, "max_states": max_states, "insertions": insertions})


@cli.command()
@click.argument("action", type=click.Choice(["sigma", "nu", "report", "cover", "rag", "popular", "lemmas", "plunnecke"]))
@click.option("--space", default="cyclic:12", help="cyclic:N, discrete:N or a metric JSON file")
@click.option("--set", "point_set", help="Point indices, e.g. 0,1,5 or range:0:6")
@click.option("--eps", type=float, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--mode", type=click.Choice(["greedy", "exact"]), default="greedy")
@click.option("--closed", is_flag=True, help="Closed balls for nets")
@click.option("--with", "other", help="Second set for the covering")
@click.option("--k", "k", type=int, default=None, help="Translate budget for rough approximate groups")
@click.option("--m", "m", type=int, default=None, help="Witness pairs needed for popularity")
@click.option("--symmetric", is_flag=True)
@click.option("--exhaustive", is_flag=True)
@click.option("--v", "v", help="Second set for the triangle inequality")
@click.option("--w", "w", help="Third set for the triangle inequality")
@click.option("--seed", type=int, default=0)
@output_option
@click.pass_context
def entropy(ctx, action, space, point_set, eps, delta, mode, closed, other, k, m, symmetric, exhaustive, v, w, seed, output):
    """Separated sets, nets and approximate-group checks on finite metric spaces."""
    _run(ctx, "entropy", action, output=output, seed=seed,
         params={"space": space, "set": point_set, "eps": eps, "delta": delta, "mode": mode, "closed": closed,
                 "with": other, "k": k, "m": m, "symmetric": symmetric, "exhaustive": exhaustive, "v": v, "w": w})


@cli.command()
@click.argument("action", type=click.Choice(["net", "op", "verify"]))
@click.option("--delta", type=float, default=None, help="Net separation in radians")
@click.option("--seed", type=int, default=0)
@click.option("--rejections", type=int, default=None, help="Consecutive rejections before freezing")
@click.option("--max-points", type=int, default=None)
@click.option("--net", "net_file", type=click.Path(), help="Load a saved net instead of building one")
@click.option("--theta", type=float, default=None)
@click.option("--eps", type=float, default=None)
@output_option
@click.pass_context
def so3(ctx, action, delta, seed, rejections, max_points, net_file, theta, eps, output):
    """Separated nets of SO(3) and the fuzzy product on them."""
    _run(ctx, "so3", action, output=output, seed=seed,
         params={"delta": delta, "rejections": rejections, "max_points": max_points, "net": net_file, "theta": theta, "eps": eps})


@cli.command()
@click.argument("spec")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
              help="Instance JSON or x,y,z triple rows (default: csv for a .csv output, else json)")
@output_option
@click.pass_context
def gen(ctx, spec, fmt, output):
    """Generate an instance from a generator spec."""
    _run(ctx, "gen", gen=spec, output=output, params={"format": fmt})


@cli.command(name="validate")
@click.argument("path", type=click.Path())
@click.pass_context
def validate_cmd(ctx, path):
    """Check an instance file for linearity violations."""
    _run(ctx, "validate", instance=path)


@cli.command()
@click.argument("artifact", type=click.Path())
@click.pass_context
def rerun(ctx, artifact):
    """Repeat the run recorded in an artifact."""
    try:
        data = read_json(artifact)
        stored = data.get("config") if isinstance(data, dict) else None
        if stored is None:
            raise InputError(f"{artifact} carries no run configuration")
        config = RunConfig.from_dict(stored)
    except AssocLabError as e:
        console.print(f"[bold red]Error:[/] {e}")
        ctx.exit(e.exit_code)
    config.output = None
    status = run(config, ctx.obj["pretty"])
    if status:
        ctx.exit(status)


if __name__ == "__main__":
    cli()
