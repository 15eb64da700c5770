"""Command-line entry points.

    chatedit serve --port 8080 --fixture script.json
    chatedit edit --image in.png --instruction "make it vintage" --fixture script.json --output out.png
    chatedit eval invocation --dataset en-single --fixture hier.json
    chatedit eval ablation --dataset ablation --hier-fixture ... --flat-fixture ...
    chatedit eval removal --manifest rows.jsonl

A live model is selected with --backend-url/--model; the bearer credential
comes from the CHATEDIT_API_KEY environment variable (override the variable
name with --api-key-env).
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

import click

from .dispatch import ExecutionContext, execute_plan, plan_invocation
from .errors import ChatEditError
from .evalharness import (
    DEFAULT_GRID,
    EvalConfig,
    builtin_dataset,
    evaluate_invocation,
    evaluate_removal,
    fixture_backend_factory,
    load_dataset,
    load_discipline_rules,
    load_removal_manifest,
    ablation_grid,
)
from .executors import DEFAULT_MANIFEST, default_catalog, default_registry
from .gateway import HttpChatBackend, LLMBackend, ScriptedBackend, ScriptFixture
from .imaging import RasterImage
from .prompts import Language, PromptOptions
from .session import RuntimeDeps, SessionStore


def _build_backend(
    fixture: Optional[str], backend_url: Optional[str], model: str, api_key_env: str,
    timeout: float,
) -> LLMBackend:
    if fixture:
        return ScriptedBackend(ScriptFixture.load(fixture))
    if backend_url:
        return HttpChatBackend(backend_url, model, api_key_env=api_key_env, timeout=timeout)
    raise click.UsageError("provide --fixture for a scripted backend or --backend-url for a live one")


def _backend_options(fn):
    fn = click.option("--fixture", type=click.Path(exists=True), default=None,
                      help="Scripted backend fixture file.")(fn)
    fn = click.option("--backend-url", default=None, help="Live chat-completions base URL.")(fn)
    fn = click.option("--model", default="default", help="Model id for the live backend.")(fn)
    fn = click.option("--api-key-env", default="CHATEDIT_API_KEY", show_default=True,
                      help="Environment variable holding the bearer credential.")(fn)
    fn = click.option("--timeout", default=60.0, show_default=True, help="Request timeout (s).")(fn)
    return fn


@click.group()
def main() -> None:
    """Conversational image editing toolkit."""


@main.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--registry", "registry_path", type=click.Path(exists=True),
              default=str(DEFAULT_MANIFEST), show_default=True)
@click.option("--frontend", type=click.Path(), default=None,
              help="Directory of built UI assets to serve at /.")
@click.option("--snapshot-dir", type=click.Path(), default=None,
              help="Persist session snapshots under this directory.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file; explicit flags override its values.")
@_backend_options
def serve(port, host, registry_path, frontend, snapshot_dir, config_path, fixture,
          backend_url, model, api_key_env, timeout):
    """Run the HTTP session server.

    The config file may set backend_url, model, api_key_env, timeout,
    fixture, registry, frontend and snapshot_dir; credentials themselves
    always come from the environment, never from files or flags.
    """
    import json

    import uvicorn

    from .server import create_app

    if config_path:
        config = json.loads(Path(config_path).read_text(encoding="utf-8"))
        backend_url = backend_url or config.get("backend_url")
        fixture = fixture or config.get("fixture")
        registry_path = config.get("registry", registry_path)
        frontend = frontend or config.get("frontend")
        snapshot_dir = snapshot_dir or config.get("snapshot_dir")
        if model == "default":
            model = config.get("model", model)
        if api_key_env == "CHATEDIT_API_KEY":
            api_key_env = config.get("api_key_env", api_key_env)
        timeout = config.get("timeout", timeout)

    deps = RuntimeDeps(
        registry=default_registry(registry_path),
        backend=_build_backend(fixture, backend_url, model, api_key_env, timeout),
        catalog=default_catalog(),
    )
    store = SessionStore(snapshot_dir=snapshot_dir)
    app = create_app(deps, store, frontend_dir=Path(frontend) if frontend else None)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--image", type=click.Path(exists=True), required=True)
@click.option("--instruction", required=True)
@click.option("--output", type=click.Path(), default="edited.png", show_default=True)
@click.option("--registry", "registry_path", type=click.Path(exists=True),
              default=str(DEFAULT_MANIFEST), show_default=True)
@_backend_options
def edit(image, instruction, output, registry_path, fixture, backend_url, model,
         api_key_env, timeout):
    """Single-shot edit: plan, execute, write the result PNG."""
    registry = default_registry(registry_path)
    backend = _build_backend(fixture, backend_url, model, api_key_env, timeout)
    source = RasterImage.load(image)
    try:
        plan = plan_invocation(instruction, registry, backend, PromptOptions())
        context = ExecutionContext(
            catalog=default_catalog(), instruction=instruction, backend=backend
        )
        outcome = execute_plan(plan, source, context)
    except ChatEditError as exc:
        click.echo(f"edit failed: {exc}", err=True)
        sys.exit(1)
    outcome.image.save(output)
    click.echo(outcome.reply)
    click.echo(f"functions: {outcome.plan.resolved_names()}")
    click.echo(f"token usage: {outcome.plan.token_usage}")
    click.echo(f"wrote {output}")


@main.group()
def eval() -> None:
    """Evaluation harness."""


def _load_cases(dataset: str):
    path = Path(dataset)
    if path.exists():
        return load_dataset(path)
    return builtin_dataset(dataset)


@eval.command()
@click.option("--dataset", required=True,
              help="Dataset JSONL path or builtin name (en-single, en-dual, ablation).")
@click.option("--mode", type=click.Choice(["hierarchical", "flat"]), default="hierarchical",
              show_default=True)
@click.option("--reasoning/--no-reasoning", default=True, show_default=True)
@click.option("--examples", default=3, show_default=True)
@click.option("--report", type=click.Path(), default=None, help="Write the JSON report here.")
@_backend_options
def invocation(dataset, mode, reasoning, examples, report, fixture, backend_url, model,
               api_key_env, timeout):
    """Invocation accuracy and token usage for one configuration."""
    cases = _load_cases(dataset)
    backend = _build_backend(fixture, backend_url, model, api_key_env, timeout)
    config = EvalConfig(mode=mode, reasoning=reasoning, example_count=examples)
    result = evaluate_invocation(cases, config, backend, default_registry())
    click.echo(result.to_text())
    if report:
        Path(report).write_text(result.to_json(), encoding="utf-8")
        click.echo(f"wrote {report}")


@eval.command()
@click.option("--dataset", required=True)
@click.option("--hier-fixture", type=click.Path(exists=True), required=True)
@click.option("--flat-fixture", type=click.Path(exists=True), required=True)
@click.option("--discipline", type=click.Path(exists=True), default=None,
              help="Decoration rules emulating example-count sensitivity.")
@click.option("--report", type=click.Path(), default=None)
def ablation(dataset, hier_fixture, flat_fixture, discipline, report):
    """The 7-config reasoning/hierarchy/examples grid."""
    cases = _load_cases(dataset)
    rules = load_discipline_rules(discipline) if discipline else ()
    factory = fixture_backend_factory(hier_fixture, flat_fixture, rules)
    result = ablation_grid(cases, DEFAULT_GRID, factory, default_registry())
    click.echo(result.to_text())
    if report:
        Path(report).write_text(result.to_json(), encoding="utf-8")
        click.echo(f"wrote {report}")


@eval.command()
@click.option("--manifest", type=click.Path(exists=True), required=True)
@click.option("--dilation-radius", default=3, show_default=True)
@click.option("--report", type=click.Path(), default=None)
def removal(manifest, dilation_radius, report):
    """Object-removal metric pass (PSNR / SSIM against ground truth)."""
    from .removal import RemovalConfig

    rows = load_removal_manifest(manifest)
    result = evaluate_removal(rows, RemovalConfig(dilation_radius=dilation_radius))
    click.echo(result.to_text())
    if report:
        Path(report).write_text(result.to_json(), encoding="utf-8")
        click.echo(f"wrote {report}")


if __name__ == "__main__":
    main()
