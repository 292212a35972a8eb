"""Operator command line: train, explain, audit, multiplicity, whatif, repro, serve.

Human-readable tables by default; --json switches every data-emitting
subcommand to deterministic JSON (sorted keys, two-space indent) so identical
invocations with identical seeds produce byte-identical output. A config file
of KEY = VALUE lines (dotted keys select the subcommand, e.g. serve.port =
9000) can supply any flag; environment variables use the CONTESTKIT_ prefix
(e.g. CONTESTKIT_SERVE_HOST, CONTESTKIT_SERVE_PORT).
"""

import json
import sys
from pathlib import Path

import click

from .errors import ContestkitError
from .models import TreeParams, evaluate, load_dataset, load_schema, save_tree, split, train_tree
from .core import DecisionPolicy
from .multiplicity import estimate_multiplicity_bound, sample_rashomon_set
from .repro import CreditPipelineConfig, packaged_credit_schema_path, run_counterexample, run_credit_pipeline


def _parse_scalar(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def _read_config(path: str) -> dict:
    defaults = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"config line is not KEY = VALUE: {raw!r}")
        key, _, value = line.partition("=")
        node = defaults
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        # flag spelling allowed: --model-family is stored as model_family
        node[parts[-1].replace("-", "_")] = _parse_scalar(value.strip())
    return defaults


def _use_config(ctx, param, value):
    if value:
        ctx.default_map = _read_config(value)
    return value


def emit_json(obj) -> None:
    click.echo(json.dumps(obj, sort_keys=True, indent=2))


def _kv_table(pairs) -> None:
    width = max(len(str(k)) for k, _ in pairs)
    for k, v in pairs:
        click.echo(f"{str(k):<{width}}  {v}")


def _build_store(data, seed, budget=None):
    from .evidence import DEFAULT_BUDGET
    from .service.store import build_demo_store

    return build_demo_store(
        seed=seed,
        budget=DEFAULT_BUDGET if budget is None else budget,
        credit_csv_path=data,
    )


@click.group(name="contestkit")
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    is_eager=True,
    expose_value=False,
    callback=_use_config,
    help="KEY = VALUE file supplying defaults for any flag (dotted keys pick the subcommand).",
)
@click.version_option(package_name="contestkit")
def cli():
    """Evidence tooling for contesting model decisions."""


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False), help="Training CSV.")
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), help="Sidecar schema JSON; defaults to the packaged credit schema.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Where to write the trained model JSON.")
@click.option("--max-depth", type=int, default=None, show_default="unlimited", help="Tree depth cap.")
@click.option("--test-fraction", type=float, default=0.2, show_default=True, help="Held-out fraction for metrics.")
@click.option("--seed", type=int, default=0, show_default=True, help="Split and tie-break seed.")
@click.option("--tau", type=float, default=0.5, show_default=True, help="Decision threshold.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def train(data, schema_path, out, max_depth, test_fraction, seed, tau, as_json):
    """Train a decision tree on a CSV and persist it as JSON."""
    schema = load_schema(schema_path or packaged_credit_schema_path())
    ds = load_dataset(data, schema)
    train_ds, test_ds = split(ds, test_fraction, seed=seed, stratified=True)
    model = train_tree(train_ds, TreeParams(max_depth=max_depth, seed=seed))
    metrics = evaluate(model, test_ds, DecisionPolicy(tau))
    save_tree(model, out)
    payload = {
        "model_path": out,
        "depth": model.depth(),
        "n_train": train_ds.n_rows,
        "n_test": test_ds.n_rows,
        "metrics": metrics.to_dict(),
    }
    if as_json:
        emit_json(payload)
    else:
        _kv_table(
            [
                ("model", out),
                ("depth", model.depth()),
                ("train rows", train_ds.n_rows),
                ("test rows", test_ds.n_rows),
                ("accuracy", f"{metrics.accuracy:.4f}"),
                ("false negative rate", f"{metrics.false_negative_rate:.4f}"),
            ]
        )


@cli.command()
@click.option("--case", "case_id", required=True, help="Case id in the store (e.g. tent-003, applicant-000).")
@click.option("--kind", type=click.Choice(["counterfactual", "surrogate", "anchor"]), required=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False), help="Back the applicant case with this CSV instead of the generated table.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def explain(case_id, kind, data, seed, as_json):
    """Emit one kind of explanation evidence for a stored case."""
    store = _build_store(data, seed)
    evidence = store.evidence(case_id)
    block = evidence[kind]
    if block is None:
        raise click.ClickException(f"no {kind} evidence available for case {case_id!r}")
    if as_json:
        emit_json(block)
        return
    if kind == "counterfactual":
        s = block["suggestion"]
        _kv_table(
            [
                ("change", f"{s['feature_name']}: {s['old_value']} -> {s['new_value']}"),
                ("distance", s["distance"]),
                ("decision flip", f"{s['decision_flip'][0]} -> {s['decision_flip'][1]}"),
                ("continuity verdict", block["continuity_verdict"]["implied_level"]),
            ]
        )
    elif kind == "surrogate":
        e = block["explanation"]
        pairs = [(f"weight[{k}]", f"{v:.6g}") for k, v in e["weights"].items()]
        pairs += [
            ("intercept", f"{e['intercept']:.6g}"),
            ("local faithfulness", f"{e['local_faithfulness']:.3e}"),
        ]
        if block["monotonicity_verdict"]:
            pairs.append(("monotonicity verdict", block["monotonicity_verdict"]["implied_level"]))
        _kv_table(pairs)
    else:
        a = block["anchor"]
        pairs = [
            ("rule", a["rule"]),
            ("pinned decision", a["pinned_decision"]),
            ("support", a["support"]),
            ("precision", a["precision"]),
        ]
        if block["reason_verdict"]:
            pairs.append(("reason verdict", block["reason_verdict"]["implied_level"]))
        _kv_table(pairs)


@cli.command()
@click.option("--case", "case_id", required=True, help="Case id in the store.")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), help="Back the applicant case with this CSV instead of the generated table.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def audit(case_id, data, seed, as_json):
    """Emit every conflict verdict plus, for ground-truth cases, the grid report."""
    store = _build_store(data, seed)
    evidence = store.evidence(case_id)
    if as_json:
        emit_json(evidence)
        return
    pairs = [("case", case_id)]
    if evidence["report"]:
        rep = evidence["report"]["report"]
        pairs += [
            ("epistemically contestable", rep["epistemic"]),
            ("somewhere contestable", rep["somewhere_contestable"]),
            ("somewhere inaccurate", rep["somewhere_inaccurate"]),
            ("witnesses", len(rep["witnesses"])),
        ]
    else:
        pairs.append(("grid report", "unavailable: no ground truth for this case"))
    if evidence["counterfactual"]:
        pairs.append(("continuity verdict", evidence["counterfactual"]["continuity_verdict"]["implied_level"]))
    if evidence["surrogate"] and evidence["surrogate"]["monotonicity_verdict"]:
        pairs.append(("monotonicity verdict", evidence["surrogate"]["monotonicity_verdict"]["implied_level"]))
    if evidence["anchor"] and evidence["anchor"]["reason_verdict"]:
        pairs.append(("reason verdict", evidence["anchor"]["reason_verdict"]["implied_level"]))
    pairs.append(("multiplicity theta_hat", evidence["multiplicity"]["estimate"]["theta_hat"]))
    _kv_table(pairs)


@cli.command()
@click.option("--case", "case_id", required=True, help="Case id in the store.")
@click.option("--model-family", type=click.Choice(["tent", "tree"]), required=True, help="Which selection process to resample.")
@click.option("--n", type=int, default=100, show_default=True, help="Models to sample.")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), help="Back the applicant case with this CSV instead of the generated table.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def multiplicity(case_id, model_family, n, data, seed, as_json):
    """Sample a fresh model set at the stored performance level and print the
    disagreement bound for one case."""
    store = _build_store(data, seed)
    sc, sm = store.lookup(case_id)
    if sm.family != model_family:
        raise click.UsageError(
            f"case {case_id!r} belongs to the {sm.family!r} family, not {model_family!r}"
        )
    rs = sample_rashomon_set(sm.selection, sm.train_ds, n=n, seed=seed)
    est = estimate_multiplicity_bound(rs, sm.policy, sc.x)
    payload = {"case_id": case_id, "model_family": model_family, "seed": seed}
    payload.update(est.to_dict())
    if as_json:
        emit_json(payload)
    else:
        _kv_table(
            [
                ("case", case_id),
                ("models sampled", est.n),
                ("positive fraction", est.positive_fraction),
                ("theta_hat", est.theta_hat),
            ]
        )


@cli.command()
@click.option("--case", "case_id", required=True, help="Case id in the store.")
@click.option("--input", "inputs", multiple=True, required=True, help="Comma-separated feature vector; repeat for a batch.")
@click.option("--server", help="Service base URL; when set the query goes over HTTP and spends that server's budget.")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), help="In-process only: back the applicant case with this CSV.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def whatif(case_id, inputs, server, data, seed, as_json):
    """Evaluate alternative inputs for a case, in process or against a server."""
    rows = [[float(v) for v in item.split(",")] for item in inputs]
    if server:
        import httpx

        resp = httpx.post(
            f"{server.rstrip('/')}/cases/{case_id}/what-if",
            json={"inputs": rows},
            timeout=30.0,
        )
        body = resp.json()
        if resp.status_code != 200:
            raise click.ClickException(f"{body.get('code', 'error')}: {body.get('message', '')}")
        payload = body
    else:
        store = _build_store(data, seed)
        payload = store.run_what_if(case_id, rows)
    if as_json:
        emit_json(payload)
    else:
        for row, result in zip(rows, payload["results"]):
            click.echo(f"{row} -> probability {result['probability']:.6g}, decision {result['decision']}")
        click.echo(f"budget remaining: {payload['budget_remaining']}")


@cli.command()
@click.option("--counterexample", type=click.Choice(["1", "2", "3"]), help="Replay one counterexample fixture.")
@click.option("--credit-pipeline", is_flag=True, help="Run the credit table pipeline fixture.")
@click.option("--data", type=click.Path(dir_okay=False), default="data/german_credit.csv", show_default=True, help="Credit CSV location.")
@click.option("--synthetic-data", is_flag=True, help="Mark the CSV as a generated stand-in: metric bands are reported, not asserted.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output (runtimes omitted).")
def repro(counterexample, credit_pipeline, data, synthetic_data, seed, as_json):
    """Replay the published fixtures and exit nonzero if any claim fails."""
    if not counterexample and not credit_pipeline:
        raise click.UsageError("pick --counterexample {1,2,3} and/or --credit-pipeline")
    results = []
    if counterexample:
        results.append(run_counterexample(int(counterexample)))
    if credit_pipeline:
        results.append(
            run_credit_pipeline(
                CreditPipelineConfig(csv_path=data, seed=seed, synthetic_data=synthetic_data)
            )
        )
    if as_json:
        out = []
        for r in results:
            d = r.to_dict()
            d.pop("runtime_s", None)  # keep byte-identical across runs
            out.append(d)
        emit_json(out if len(out) > 1 else out[0])
    else:
        for r in results:
            click.echo(r.table())
    if not all(r.passed for r in results):
        sys.exit(1)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True, help="Listen address (CONTESTKIT_SERVE_HOST).")
@click.option("--port", type=int, default=8000, show_default=True, help="Listen port (CONTESTKIT_SERVE_PORT).")
@click.option("--budget", type=int, default=50, show_default=True, help="Per-case what-if budget.")
@click.option("--window-seconds", type=float, default=86400.0, show_default=True, help="Budget window length.")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), help="Back the applicant case with this CSV instead of the generated table.")
@click.option("--seed", type=int, default=0, show_default=True)
def serve(host, port, budget, window_seconds, data, seed):
    """Serve the case store over HTTP."""
    import uvicorn

    from .service import create_app
    from .service.store import build_demo_store

    store = build_demo_store(
        seed=seed, budget=budget, window_seconds=window_seconds, credit_csv_path=data
    )
    app = create_app(store)
    click.echo(f"serving {len(store.cases)} cases on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main():
    try:
        cli(auto_envvar_prefix="CONTESTKIT")
    except ContestkitError as exc:
        click.echo(f"{exc.code}: {exc.message}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
