"""
pod-mpc command line.

Usage:
    pod-mpc pod serve --owner https://alice.example/profile/card#me --directory ids.json
    pod-mpc agent compute serve --identity http://ca0.example --keyring keys.json --directory ids.json
    pod-mpc app run --description desc.json --identity http://app.example --keyring keys.json
    pod-mpc demo --scenario average_wage --incomes 10,20,30
"""

import asyncio
import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional

import httpx
import numpy as np
import typer
import uvicorn
import yaml
from rich.console import Console
from rich.table import Table

from ..agents import computation_agent, dealer_service, encryption_agent
from ..agents.dealer_service import HttpMaterialSource, LocalMaterialSource
from ..app.models import JobReport, ResourceDescription, RiskParams, SelectionPolicy
from ..app.risk import monte_carlo_risk, risk_probability
from ..bench.harness import run_plan
from ..bench.plan import BenchRow, ExperimentPlan
from ..bench.report import emit_plots, write_csv
from ..config import AppConfig, create_app_config
from ..core.dealer import InsecureTestDealer
from ..errors import ConfigError, PodMpcError, exit_code_for
from ..fixtures import DataModel
from ..mpc.circuits import ElementwiseOp
from ..mpc.node import PlayerNode
from ..mpc.protocols import ProtocolClass
from ..pod import server as pod_server
from ..pod.auth import Identity, IdentityDirectory, Keyring, RequestVerifier
from ..pod.storage import create_storage
from ..workloads import CircuitSpec, MwemWorkload, WorkloadKind
from .commands import AppRunCommand, DemoCommand, FixtureCommand, MwemCommand, Scenario

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)

# Rich console for pretty output
console = Console()

app = typer.Typer(
    name="pod-mpc",
    help="Privacy-preserving computation over personal data stores with delegated MPC",
    add_completion=False,
)
pod_app = typer.Typer(help="Pod service", add_completion=False)
agent_app = typer.Typer(help="Encryption and computation agents", add_completion=False)
encrypt_app = typer.Typer(help="Encryption agent", add_completion=False)
compute_app = typer.Typer(help="Computation agent", add_completion=False)
dealer_app = typer.Typer(help="Correlated-randomness dealer (insecure, tests and demos only)", add_completion=False)
app_app = typer.Typer(help="Run jobs as an App", add_completion=False)
bench_app = typer.Typer(help="Scalability benchmarks", add_completion=False)
mwem_app = typer.Typer(help="Differentially private synthetic data", add_completion=False)
fixture_app = typer.Typer(help="Multi-provider fixtures", add_completion=False)
config_app = typer.Typer(help="Configuration", add_completion=False)
keys_app = typer.Typer(help="Identity keys", add_completion=False)

app.add_typer(pod_app, name="pod")
app.add_typer(agent_app, name="agent")
agent_app.add_typer(encrypt_app, name="encrypt")
agent_app.add_typer(compute_app, name="compute")
app.add_typer(dealer_app, name="dealer")
app.add_typer(app_app, name="app")
app.add_typer(bench_app, name="bench")
app.add_typer(mwem_app, name="mwem")
app.add_typer(fixture_app, name="fixture")
app.add_typer(config_app, name="config")
app.add_typer(keys_app, name="keys")


def setup_logging(level: str) -> None:
    numeric_level = getattr(logging, level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ConfigError(f"Unknown log level {level!r}")
    logging.basicConfig(level=numeric_level, format=LOG_FORMAT)
    logging.getLogger().setLevel(numeric_level)


@contextmanager
def handle_errors(verbose: bool = False):
    """Print domain errors and exit with their category's code."""
    try:
        yield
    except PodMpcError as e:
        console.print(f"❌ {e}", style="red", markup=False)
        if verbose:
            console.print_exception()
        raise typer.Exit(code=exit_code_for(e))


def _config(ctx: typer.Context) -> AppConfig:
    return ctx.obj["config"]


def _verbose(ctx: typer.Context) -> bool:
    return ctx.obj["verbose"]


def _directory(path: Optional[Path], config: AppConfig) -> IdentityDirectory:
    path = path or (Path(config.keys.directory) if config.keys.directory else None)
    if path is None:
        raise ConfigError("An identity directory is required (--directory or keys.directory)")
    return IdentityDirectory.load(path)


def _keyring(path: Optional[Path], config: AppConfig) -> Keyring:
    path = path or (Path(config.keys.keyring) if config.keys.keyring else None)
    if path is None:
        raise ConfigError("A keyring is required (--keyring or keys.keyring)")
    return Keyring.load(path)


def _split(values: Optional[str]) -> List[int]:
    if not values:
        return []
    try:
        return [int(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise typer.BadParameter(f"Expected comma-separated integers, got {values!r}")


@app.callback()
def main(
    ctx: typer.Context,
    config_file: Optional[Path] = typer.Option(None, "--config", help="YAML configuration file"),
    log_level: Optional[str] = typer.Option(None, help="Log level (debug, info, warning, error)"),
    verbose: bool = typer.Option(False, help="Enable verbose logging"),
):
    """Privacy-preserving computation over personal data stores."""
    with handle_errors(verbose):
        overrides = {"log_level": log_level} if log_level else None
        config = create_app_config(str(config_file) if config_file else None, overrides)
        setup_logging("DEBUG" if verbose else config.log_level)
    ctx.obj = {"config": config, "verbose": verbose}


# Services

@pod_app.command("serve")
def pod_serve(
    ctx: typer.Context,
    owner: Optional[str] = typer.Option(None, help="Identity URL of the Pod owner"),
    directory: Optional[Path] = typer.Option(None, help="Identity directory file"),
    storage: Optional[Path] = typer.Option(None, help="Storage directory (in-memory when omitted)"),
    host: Optional[str] = typer.Option(None, help="Host to bind the server to"),
    port: Optional[int] = typer.Option(None, help="Port to bind the server to"),
):
    """Start a Pod."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        owner = owner or config.pod.owner
        if not owner:
            raise ConfigError("A Pod owner is required (--owner or pod.owner)")
        storage_dir = storage or (Path(config.pod.storage_dir) if config.pod.storage_dir else None)
        api = pod_server.create_app(owner, _directory(directory, config), create_storage(storage_dir),
                                    config.pod.clock_skew)
        host = host or config.network.host
        port = port or config.network.pod_port
        logger.info(f"Starting Pod of {owner} on {host}:{port}")
        uvicorn.run(api, host=host, port=port, log_level=config.log_level.lower())


@encrypt_app.command("serve")
def encrypt_serve(
    ctx: typer.Context,
    identity: str = typer.Option(..., help="Identity URL of this agent"),
    keyring: Optional[Path] = typer.Option(None, help="Keyring file holding the agent's key"),
    directory: Optional[Path] = typer.Option(None, help="Identity directory file"),
    host: Optional[str] = typer.Option(None, help="Host to bind the server to"),
    port: Optional[int] = typer.Option(None, help="Port to bind the server to"),
    enforce_protocol: bool = typer.Option(True, help="Reject disallowed protocols here instead of at the CAs"),
):
    """Start an encryption agent."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        ids = _directory(directory, config)
        agent = encryption_agent.EncryptionAgent(
            _keyring(keyring, config).get(identity), ids, httpx.AsyncClient(timeout=config.network.connect_timeout),
            enforce_protocol_locally=enforce_protocol,
        )
        host = host or config.network.host
        port = port or config.network.encryption_port
        logger.info(f"Starting encryption agent {identity} on {host}:{port}")
        uvicorn.run(encryption_agent.create_app(agent, RequestVerifier(ids, config.pod.clock_skew)),
                    host=host, port=port, log_level=config.log_level.lower())


@compute_app.command("serve")
def compute_serve(
    ctx: typer.Context,
    identity: str = typer.Option(..., help="Identity URL of this agent"),
    keyring: Optional[Path] = typer.Option(None, help="Keyring file holding the agent's key"),
    directory: Optional[Path] = typer.Option(None, help="Identity directory file"),
    host: Optional[str] = typer.Option(None, help="Host to bind the HTTP server and player node to"),
    port: Optional[int] = typer.Option(None, help="HTTP port"),
    mpc_port: Optional[int] = typer.Option(None, help="Player node TCP port"),
    dealer_url: Optional[str] = typer.Option(None, help="Dealer endpoint (in-process dealer when omitted)"),
    advertise_host: Optional[str] = typer.Option(None, help="Host other players dial when binding 0.0.0.0"),
):
    """Start a computation agent and its player node."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        ids = _directory(directory, config)
        me = _keyring(keyring, config).get(identity)
        host = host or config.network.host
        dealer_url = dealer_url or config.jobs.dealer_url
        if dealer_url:
            material = HttpMaterialSource(dealer_url, httpx.AsyncClient(timeout=None), me)
        else:
            material = LocalMaterialSource(InsecureTestDealer(seed=config.jobs.dealer_seed))
        node = PlayerNode(host, mpc_port or config.network.mpc_port, config.network.reconnection_handler(),
                          advertise_host)
        agent = computation_agent.ComputationAgent(me, ids, node, material)
        port = port or config.network.computation_port
        logger.info(f"Starting computation agent {identity} on {host}:{port}")
        uvicorn.run(computation_agent.create_app(agent, RequestVerifier(ids, config.pod.clock_skew)),
                    host=host, port=port, log_level=config.log_level.lower())


@dealer_app.command("serve")
def dealer_serve(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, help="Dealer seed"),
    directory: Optional[Path] = typer.Option(None, help="Identity directory; requests are unauthenticated when omitted"),
    host: Optional[str] = typer.Option(None, help="Host to bind the server to"),
    port: Optional[int] = typer.Option(None, help="Port to bind the server to"),
):
    """Start the insecure test dealer."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        verifier = RequestVerifier(IdentityDirectory.load(directory)) if directory else None
        api = dealer_service.create_app(config.jobs.dealer_seed if seed is None else seed, verifier)
        host = host or config.network.host
        port = port or config.network.dealer_port
        logger.warning("The dealer sees every party's correlated randomness; never use it in production")
        uvicorn.run(api, host=host, port=port, log_level=config.log_level.lower())


# Jobs

def print_report(report: JobReport) -> None:
    table = Table(title=f"Job {report.job_id}")
    table.add_column("Property", style="cyan", width=22)
    table.add_column("Value", style="white", width=60)
    table.add_row("Workload", report.result.kind.value)
    table.add_row("Computation agents", "\n".join(report.selection.computation_agents))
    table.add_row("Protocol", report.selection.protocol.value)
    if report.result.mean is not None:
        table.add_row("Mean", f"{report.result.mean:g}")
    elif report.result.synthetic is not None:
        table.add_row("Synthetic A_T", ", ".join(f"{v:.2f}" for v in report.result.synthetic))
    else:
        table.add_row("Outputs", ", ".join(str(v) for v in report.result.values))
    metrics = report.job.metrics
    table.add_row("Full time", f"{metrics.full_time:.3f}s")
    table.add_row("Computation time", f"{metrics.comp_time:.3f}s")
    table.add_row("Rounds", str(metrics.rounds))
    table.add_row("Player bytes", str(metrics.bytes_global))
    table.add_row("Client bytes", str(metrics.client_bytes))
    table.add_row("Transcript", report.transcript_hash()[:16])
    console.print(table)


@app_app.command("run")
def app_run(
    ctx: typer.Context,
    description: Path = typer.Option(..., help="Resource description JSON"),
    identity: str = typer.Option(..., help="Identity URL of the App"),
    keyring: Optional[Path] = typer.Option(None, help="Keyring with the App's key and the providers' signing keys"),
    seed: Optional[int] = typer.Option(None, help="Job seed"),
    metrics: Optional[Path] = typer.Option(None, help="Write a metrics CSV row here"),
):
    """Run the job a resource description asks for."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        command = AppRunCommand(ResourceDescription.load(description), _keyring(keyring, config), identity,
                                config.jobs.seed if seed is None else seed, config, metrics)
        report = asyncio.run(command.execute())
        print_report(report)


@app_app.command("risk")
def app_risk(
    n: int = typer.Option(..., help="Computation agents in the union of trusted lists"),
    k: int = typer.Option(..., help="Corrupted agents among them"),
    m: int = typer.Option(..., help="Agents chosen for the job"),
    trials: int = typer.Option(0, help="Also estimate by Monte-Carlo sampling with this many trials"),
    seed: int = typer.Option(0, help="Monte-Carlo seed"),
):
    """Probability that every randomly chosen computation agent is corrupted."""
    try:
        params = RiskParams(n=n, k=k, m=m)
    except ValueError as e:
        raise typer.BadParameter(str(e))
    estimate = risk_probability(params)
    console.print(f"exact: {estimate.exact:.6g}")
    console.print(f"bound: {estimate.bound:.6g}")
    if trials > 0:
        console.print(f"monte-carlo ({trials} trials): "
                      f"{monte_carlo_risk(params, trials, np.random.default_rng(seed)):.6g}")


# Benchmarks and MWEM

def print_rows(rows: List[BenchRow]) -> None:
    table = Table(title="Sweep")
    for column in ("parties", "clients", "full_time_s", "comp_time_s", "rounds", "bytes_global",
                   "client_bytes", "correct"):
        table.add_column(column)
    for row in rows:
        table.add_row(str(row.parties), str(row.clients), f"{row.full_time_s:.3f}", f"{row.comp_time_s:.3f}",
                      str(row.rounds), str(row.bytes_global), str(row.client_bytes),
                      "✅" if row.correct else "❌")
    console.print(table)


@bench_app.command("run")
def bench_run(
    ctx: typer.Context,
    plan: Path = typer.Option(..., help="Experiment plan (JSON or YAML)"),
    out: Path = typer.Option(Path("results.csv"), help="CSV output"),
    plots_dir: Optional[Path] = typer.Option(None, "--emit-plots", help="Directory for scaling charts"),
):
    """Run a scalability sweep."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        rows = asyncio.run(run_plan(ExperimentPlan.load(plan), config.bench.max_clients, config.bench.max_players))
        write_csv(rows, out)
        if plots_dir:
            print_plots(emit_plots(rows, plots_dir))
        print_rows(rows)
    if not all(row.correct for row in rows):
        console.print("❌ Some sweep points disagree with the plaintext oracle", style="red")
        raise typer.Exit(code=1)


def print_plots(paths: List[Path]) -> None:
    for path in paths:
        console.print(f"📈 {path}")


@mwem_app.command("run")
def mwem_run(
    ctx: typer.Context,
    providers: int = typer.Option(16, help="Data providers"),
    points: int = typer.Option(100, help="Points per provider"),
    setting: int = typer.Option(3, help="1/2 bin inside MPC, 3 bins at the client"),
    bins: int = typer.Option(10, help="Histogram bins"),
    queries: int = typer.Option(60, help="Random linear queries"),
    iterations: int = typer.Option(30, help="MWEM iterations"),
    epsilon: float = typer.Option(1.0, help="Privacy budget"),
    seed: Optional[int] = typer.Option(None, help="Data, noise and query seed"),
    secure: bool = typer.Option(True, help="Run through delegated MPC instead of in the clear"),
    players: int = typer.Option(3, help="Players of the secure run"),
    protocol: ProtocolClass = typer.Option(ProtocolClass.HONEST_MAJORITY_SEMI_HONEST, help="Protocol class"),
):
    """Generate differentially private synthetic data with MWEM."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        seed = config.jobs.seed if seed is None else seed
        workload = MwemWorkload(setting=setting, bins=bins, queries=queries, query_seed=seed,
                                iterations=iterations, epsilon=epsilon, points_per_provider=points,
                                total_points=providers * points if setting == 1 else None)
        outcome = asyncio.run(MwemCommand(workload, providers, seed, secure, players, protocol).execute())
    console.print("A_T: " + ", ".join(f"{v:.2f}" for v in outcome.synthetic))
    console.print(f"max query error: {outcome.max_error:.3f}")
    if outcome.oracle_match is not None:
        console.print("✅ matches the plaintext oracle" if outcome.oracle_match else "❌ differs from the plaintext oracle")
        if not outcome.oracle_match:
            raise typer.Exit(code=1)


# Fixtures and demo

@fixture_app.command("generate")
def fixture_generate(
    ctx: typer.Context,
    providers: int = typer.Option(..., help="Number of data providers"),
    pod: List[str] = typer.Option([], help="Pod base URL of each provider, in order"),
    ea: List[str] = typer.Option([], help="Encryption agent URLs"),
    ca: List[str] = typer.Option([], help="Computation agent URLs"),
    app_identity: str = typer.Option(..., "--app", help="Identity URL of the App"),
    keyring: Optional[Path] = typer.Option(None, help="Keyring with the providers' keys"),
    data_model: DataModel = typer.Option(DataModel.UNIFORM_INCOME, help="Synthetic data model"),
    workload: WorkloadKind = typer.Option(WorkloadKind.AVERAGE_WAGE, help="Workload of the description"),
    width: int = typer.Option(1, help="Array size for sum/product/elementwise workloads"),
    op: ElementwiseOp = typer.Option(ElementwiseOp.MUL, help="Elementwise operation"),
    policy: SelectionPolicy = typer.Option(SelectionPolicy.SUBSET, help="CA selection policy"),
    m: Optional[int] = typer.Option(None, help="Computation agents per job"),
    seed: Optional[int] = typer.Option(None, help="Data seed"),
    out: Path = typer.Option(Path("description.json"), help="Resource description output"),
):
    """Populate Pods with synthetic data and trust documents."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        circuit = CircuitSpec(kind=workload, width=width, op=op)
        command = FixtureCommand(
            providers, data_model, circuit, config.jobs.seed if seed is None else seed, pod,
            _keyring(keyring, config), ea, ca, app_identity, out, policy, m or config.jobs.default_m,
        )
        description = asyncio.run(command.execute())
    console.print(f"✅ {len(description.entries)} providers, description written to {out}")


@app.command()
def demo(
    ctx: typer.Context,
    scenario: Scenario = typer.Option(Scenario.AVERAGE_WAGE, help="Workload to run"),
    providers: int = typer.Option(3, help="Number of data providers"),
    incomes: Optional[str] = typer.Option(None, help="Comma-separated incomes (average wage only)"),
    seed: Optional[int] = typer.Option(None, help="Job and data seed"),
    untrusted_app: bool = typer.Option(False, help="First provider does not trust the App"),
    metrics: Optional[Path] = typer.Option(None, help="Write a metrics CSV row here"),
):
    """Spawn every service in-process and run one job end to end."""
    config = _config(ctx)
    with handle_errors(_verbose(ctx)):
        command = DemoCommand(scenario, providers, config.jobs.seed if seed is None else seed,
                              _split(incomes) or None, untrusted_app, config, metrics)
        outcome = asyncio.run(command.execute())
        print_report(outcome.report)
    if outcome.matched:
        console.print("✅ Result matches the plaintext oracle")
    else:
        console.print("❌ Result differs from the plaintext oracle", style="red")
        raise typer.Exit(code=1)


# Configuration and keys

@config_app.command("show")
def config_show(ctx: typer.Context):
    """Print the effective configuration."""
    console.print(yaml.safe_dump(_config(ctx).model_dump(mode="json"), sort_keys=False), markup=False)


@keys_app.command("generate")
def keys_generate(
    identity: List[str] = typer.Option(..., help="Identity URLs to create keys for"),
    out: Path = typer.Option(Path("keys.json"), help="Keyring output (private keys)"),
    directory_out: Path = typer.Option(Path("identities.json"), help="Identity directory output"),
    seed: Optional[str] = typer.Option(None, help="Derive keys deterministically from this seed"),
):
    """Create identities, a keyring and the matching identity directory."""
    keyring = Keyring.load(out) if out.exists() else Keyring()
    for url in identity:
        keyring.add(Identity.generate(url, seed=seed.encode() if seed else None))
    keyring.save(out)
    keyring.directory().save(directory_out)
    console.print(json.dumps(keyring.directory().to_dict(), indent=2), markup=False)


if __name__ == "__main__":
    app()
