"""Command-line pipeline: walk, train, eval-classify, eval-linkpred, sweep.

Flag names mirror the usual hyperparameter symbols (--gamma, --dim, --lr,
--sigma2/--sigma, --alpha, ...).  Every output file is written atomically
and gets a sibling ``<output>.manifest`` with all resolved settings, input
checksums, and timings.  Exit codes: 0 success, 2 usage error, 3 data
error, 4 numerical abort.  The KNE_SEED environment variable, when set,
overrides --seed.
"""

from __future__ import annotations

import functools
import logging
import os
import sys
import tempfile
import time

import click
import numpy as np

from . import __version__, backend
from .errors import DataError, KneError, NumericalError
from .evaluation import load_labels, run_classification, run_link_prediction
from .graph import Graph, largest_connected_component, load_edge_list, write_nodemap
from .kernels import KernelSpec
from .manifest import atomic_write_text, read_manifest, sha256_file, write_manifest
from .train import TrainConfig, export_embeddings, import_embeddings, train, train_corpus
from .walks import WalkConfig, generate_walks, load_corpus, load_corpus_standalone, save_corpus

log = logging.getLogger(__name__)


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DataError, NumericalError) as exc:
            click.echo(f"kne: error: {exc}", err=True)
            raise SystemExit(exc.exit_code)
        except KneError as exc:
            click.echo(f"kne: error: {exc}", err=True)
            raise SystemExit(3)

    return wrapper


def _resolve_seed(seed: int) -> int:
    env = os.environ.get("KNE_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise click.UsageError(f"KNE_SEED must be an integer, got {env!r}")
    return seed


def _resolve_kernel(kernel: str, sigma2, sigma, alpha) -> KernelSpec:
    if kernel == "gauss":
        if sigma2 is not None and sigma is not None:
            raise click.UsageError("--sigma and --sigma2 conflict; pass exactly one")
        if sigma is not None:
            return KernelSpec.gauss_from_sigma(sigma)
        return KernelSpec.gauss(sigma2 if sigma2 is not None else 2.0)
    if sigma2 is not None or sigma is not None:
        raise click.UsageError("--sigma/--sigma2 apply to the gauss kernel only")
    return KernelSpec.schoenberg(alpha if alpha is not None else 2.0)


def _atomic_output(path, write_fn) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _workers(threads: int, deterministic: bool) -> int:
    return 1 if deterministic else max(1, threads)


def walk_options(fn):
    opts = [
        click.option("--num-walks", type=int, default=80, show_default=True, help="Walks started per node."),
        click.option("--walk-length", type=int, default=10, show_default=True, help="Nodes per walk."),
        click.option("--p", type=float, default=1.0, show_default=True, help="Return parameter of the biased walk."),
        click.option("--q", type=float, default=1.0, show_default=True, help="In-out parameter of the biased walk."),
        click.option("--gamma", type=int, default=10, show_default=True, help="Context window size."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def train_options(fn):
    opts = [
        click.option("--dim", type=int, default=128, show_default=True, help="Embedding dimension."),
        click.option("--negatives", type=int, default=5, show_default=True, help="Negative samples per pair."),
        click.option("--lr", type=float, default=0.025, show_default=True, help="Initial learning rate."),
        click.option("--lr-min", type=float, default=None, help="Learning-rate floor [default: lr * 1e-4]."),
        click.option("--epochs", type=int, default=1, show_default=True, help="Passes over the walk corpus."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def kernel_options(fn):
    opts = [
        click.option("--kernel", type=click.Choice(["gauss", "sch"]), default="gauss", show_default=True),
        click.option("--sigma2", type=float, default=None, help="Gauss kernel sigma^2 [default: 2.0]."),
        click.option("--sigma", type=float, default=None, help="Gauss kernel sigma (converted to sigma^2)."),
        click.option("--alpha", type=float, default=None, help="Schoenberg kernel alpha [default: 2.0]."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def run_options(fn):
    opts = [
        click.option("--seed", type=int, default=1, show_default=True, help="Master seed (KNE_SEED overrides)."),
        click.option("--threads", type=int, default=1, show_default=True, help="Worker cap for walks/training."),
        click.option(
            "--deterministic/--no-deterministic",
            default=True,
            show_default=True,
            help="Single-worker corpus-order training (bit-reproducible).",
        ),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="kne")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Kernelized random-walk node embeddings."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load_graph(path, lcc: bool) -> Graph:
    g = load_edge_list(path)
    if lcc:
        g = largest_connected_component(g)
    return g


def _base_manifest(command: str, seed: int) -> dict:
    return {
        "command": command,
        "version": __version__,
        "backend": backend.BACKEND,
        "seed": seed,
    }


@main.command("walk")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--lcc", is_flag=True, help="Restrict to the largest connected component.")
@click.option("--nodemap", type=click.Path(dir_okay=False), default=None, help="Write 'token id' mapping here.")
@walk_options
@run_options
@_handle_errors
def cmd_walk(graph_path, output, lcc, nodemap, num_walks, walk_length, p, q, gamma, seed, threads, deterministic):
    """Generate a random-walk corpus file (one walk per line, node tokens)."""
    seed = _resolve_seed(seed)
    t0 = time.perf_counter()
    g = _load_graph(graph_path, lcc)
    cfg = WalkConfig(
        walks_per_node=num_walks,
        walk_length=walk_length,
        p=p,
        q=q,
        window=gamma,
        seed=seed,
        workers=_workers(threads, deterministic),
    )
    corpus = generate_walks(g, cfg)
    _atomic_output(output, lambda tmp: save_corpus(corpus, g, tmp))
    if nodemap:
        _atomic_output(nodemap, lambda tmp: write_nodemap(g, tmp))
    entries = _base_manifest("walk", seed)
    entries.update(
        graph=graph_path,
        graph_sha256=sha256_file(graph_path),
        lcc=lcc,
        num_walks=num_walks,
        walk_length=walk_length,
        p=p,
        q=q,
        gamma=gamma,
        threads=threads,
        deterministic=deterministic,
        n_nodes=g.n,
        n_edges=g.m,
        n_walks=corpus.n_walks,
        output_sha256=sha256_file(output),
        elapsed_s=f"{time.perf_counter() - t0:.3f}",
    )
    write_manifest(output, entries)
    click.echo(f"wrote {corpus.n_walks} walks to {output}")


_TRAIN_MANIFEST_TYPES = {
    "graph": str,
    "corpus": str,
    "lcc": lambda s: s == "true",
    "kernel": str,
    "kernel_param": float,
    "num_walks": int,
    "walk_length": int,
    "p": float,
    "q": float,
    "gamma": int,
    "dim": int,
    "negatives": int,
    "lr": float,
    "lr_min": float,
    "epochs": int,
    "seed": int,
    "threads": int,
    "deterministic": lambda s: s == "true",
}


def _run_train(params: dict, output: str) -> None:
    t0 = time.perf_counter()
    seed = params["seed"]
    spec = KernelSpec(params["kernel"], params["kernel_param"])
    workers = _workers(params["threads"], params["deterministic"])
    cfg = TrainConfig(
        dim=params["dim"],
        negatives=params["negatives"],
        lr0=params["lr"],
        lr_min=params["lr_min"],
        epochs=params["epochs"],
        seed=seed,
        workers=workers,
        deterministic=params["deterministic"],
    )
    entries = _base_manifest("train", seed)

    graph_path = params.get("graph")
    corpus_path = params.get("corpus")
    t_walk = 0.0
    if corpus_path:
        entries["corpus"] = corpus_path
        entries["corpus_sha256"] = sha256_file(corpus_path)
        if graph_path:
            g = _load_graph(graph_path, params["lcc"])
            corpus = load_corpus(corpus_path, g)
            tokens = list(g.tokens)
            entries["graph"] = graph_path
            entries["graph_sha256"] = sha256_file(graph_path)
        else:
            corpus, tokens = load_corpus_standalone(corpus_path)
    elif graph_path:
        g = _load_graph(graph_path, params["lcc"])
        entries["graph"] = graph_path
        entries["graph_sha256"] = sha256_file(graph_path)
        wcfg = WalkConfig(
            walks_per_node=params["num_walks"],
            walk_length=params["walk_length"],
            p=params["p"],
            q=params["q"],
            window=params["gamma"],
            seed=seed,
            workers=workers,
        )
        t_w = time.perf_counter()
        corpus = generate_walks(g, wcfg)
        t_walk = time.perf_counter() - t_w
        tokens = list(g.tokens)
    else:
        raise click.UsageError("pass --graph and/or --corpus")

    t_t = time.perf_counter()
    model = train_corpus(corpus, cfg, spec, window=params["gamma"], tokens=tokens)
    t_train = time.perf_counter() - t_t
    _atomic_output(output, lambda tmp: export_embeddings(model, tmp))

    entries.update(
        lcc=params["lcc"],
        kernel=spec.family,
        kernel_param=spec.param,
        num_walks=params["num_walks"],
        walk_length=params["walk_length"],
        p=params["p"],
        q=params["q"],
        gamma=params["gamma"],
        dim=params["dim"],
        negatives=params["negatives"],
        lr=params["lr"],
        lr_min=cfg.lr_min,
        epochs=params["epochs"],
        threads=params["threads"],
        deterministic=params["deterministic"],
        n_nodes=model.n,
        mean_epoch_loss=" ".join(f"{x:.6f}" for x in model.epoch_losses),
        output_sha256=sha256_file(output),
        elapsed_walk_s=f"{t_walk:.3f}",
        elapsed_train_s=f"{t_train:.3f}",
        elapsed_s=f"{time.perf_counter() - t0:.3f}",
    )
    write_manifest(output, entries)
    click.echo(f"wrote {model.n}x{model.d} embeddings to {output}")


@main.command("train")
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--lcc", is_flag=True, help="Restrict the graph to its largest component first.")
@click.option("--from-manifest", "from_manifest", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Replay a previous train run from its manifest.")
@kernel_options
@walk_options
@train_options
@run_options
@_handle_errors
def cmd_train(graph_path, corpus_path, output, lcc, from_manifest, kernel, sigma2, sigma, alpha,
              num_walks, walk_length, p, q, gamma, dim, negatives, lr, lr_min, epochs,
              seed, threads, deterministic):
    """Learn embeddings from a graph (walks generated on the fly) or a corpus file."""
    if from_manifest:
        stored = read_manifest(from_manifest)
        if stored.get("command") != "train":
            raise DataError(f"{from_manifest}: not a train manifest")
        params = {key: None for key in ("graph", "corpus")}
        for key, cast in _TRAIN_MANIFEST_TYPES.items():
            if key in stored:
                params[key] = cast(stored[key])
        _run_train(params, output)
        return
    if graph_path is None and corpus_path is None:
        raise click.UsageError("pass --graph and/or --corpus (or --from-manifest)")
    spec = _resolve_kernel(kernel, sigma2, sigma, alpha)
    params = {
        "graph": graph_path,
        "corpus": corpus_path,
        "lcc": lcc,
        "kernel": spec.family,
        "kernel_param": spec.param,
        "num_walks": num_walks,
        "walk_length": walk_length,
        "p": p,
        "q": q,
        "gamma": gamma,
        "dim": dim,
        "negatives": negatives,
        "lr": lr,
        "lr_min": lr_min if lr_min is not None else lr * 1e-4,
        "epochs": epochs,
        "seed": _resolve_seed(seed),
        "threads": threads,
        "deterministic": deterministic,
    }
    _run_train(params, output)


def _align_embeddings(matrix: np.ndarray, tokens: list[str], g: Graph) -> np.ndarray:
    if tokens == g.tokens:
        return matrix
    out = np.empty((g.n, matrix.shape[1]), dtype=np.float64)
    seen = np.zeros(g.n, dtype=bool)
    for row, tok in enumerate(tokens):
        i = g.token_id(tok)
        out[i] = matrix[row]
        seen[i] = True
    if not seen.all():
        raise DataError(f"embeddings missing for {int((~seen).sum())} graph nodes")
    return out


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise click.UsageError(f"{flag}: expected a comma-separated list of numbers, got {text!r}")
    if not values:
        raise click.UsageError(f"{flag}: empty list")
    return values


@main.command("eval-classify")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", "emb_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--ratios", default="0.02,0.04,0.06,0.08,0.10,0.30,0.50,0.70,0.90", show_default=True)
@click.option("--repeats", type=int, default=50, show_default=True)
@click.option("--lam", type=float, default=1.0, show_default=True, help="L2 regularization strength.")
@click.option("--lcc", is_flag=True, help="Evaluate on the largest component only.")
@click.option("--setting", default=None, help="Row label in the TSV [default: embedding file stem].")
@run_options
@_handle_errors
def cmd_eval_classify(graph_path, labels_path, emb_path, output, ratios, repeats, lam, lcc,
                      setting, seed, threads, deterministic):
    """Node-classification micro-F1 table over training ratios."""
    seed = _resolve_seed(seed)
    t0 = time.perf_counter()
    ratio_values = _parse_float_list(ratios, "--ratios")
    for r in ratio_values:
        if not 0.0 < r < 1.0:
            raise click.UsageError(f"--ratios: values must lie in (0, 1), got {r}")
    g = _load_graph(graph_path, lcc)
    labels = load_labels(labels_path)
    if lcc:
        labels = {tok: cls for tok, cls in labels.items() if tok in set(g.tokens)}
    matrix, tokens = import_embeddings(emb_path)
    X = _align_embeddings(matrix, tokens, g)
    results = run_classification(
        g, X, labels, ratios=ratio_values, repeats=repeats, lam=lam, seed=seed,
        workers=_workers(threads, deterministic),
    )
    name = setting or os.path.splitext(os.path.basename(emb_path))[0]
    header = "setting\t" + "\t".join(f"{r:g}" for r in ratio_values)
    mean_row = name + "\t" + "\t".join(f"{res.mean:.4f}" for res in results)
    std_row = name + "__std\t" + "\t".join(f"{res.std:.4f}" for res in results)
    atomic_write_text(output, "\n".join([header, mean_row, std_row]) + "\n")
    entries = _base_manifest("eval-classify", seed)
    entries.update(
        graph=graph_path,
        graph_sha256=sha256_file(graph_path),
        labels=labels_path,
        labels_sha256=sha256_file(labels_path),
        embeddings=emb_path,
        embeddings_sha256=sha256_file(emb_path),
        lcc=lcc,
        ratios=",".join(f"{r:g}" for r in ratio_values),
        repeats=repeats,
        lam=lam,
        threads=threads,
        output_sha256=sha256_file(output),
        elapsed_s=f"{time.perf_counter() - t0:.3f}",
    )
    write_manifest(output, entries)
    click.echo(f"wrote classification table to {output}")


@main.command("eval-linkpred")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--fraction", type=float, default=0.5, show_default=True, help="Fraction of edges removed for testing.")
@click.option("--lam", type=float, default=1.0, show_default=True)
@click.option("--allow-disconnect", is_flag=True, help="Do not skip bridge edges during removal.")
@kernel_options
@walk_options
@train_options
@run_options
@_handle_errors
def cmd_eval_linkpred(graph_path, output, fraction, lam, allow_disconnect, kernel, sigma2, sigma, alpha,
                      num_walks, walk_length, p, q, gamma, dim, negatives, lr, lr_min, epochs,
                      seed, threads, deterministic):
    """Link-prediction AUC on the largest component (train on the residual graph)."""
    if not 0.0 < fraction < 1.0:
        raise click.UsageError(f"--fraction must lie in (0, 1), got {fraction}")
    seed = _resolve_seed(seed)
    t0 = time.perf_counter()
    spec = _resolve_kernel(kernel, sigma2, sigma, alpha)
    g = load_edge_list(graph_path)
    workers = _workers(threads, deterministic)
    wcfg = WalkConfig(walks_per_node=num_walks, walk_length=walk_length, p=p, q=q,
                      window=gamma, seed=seed, workers=workers)
    tcfg = TrainConfig(dim=dim, negatives=negatives, lr0=lr, lr_min=lr_min, epochs=epochs,
                       seed=seed, workers=workers, deterministic=deterministic)
    result = run_link_prediction(
        g, spec, wcfg, tcfg, fraction=fraction, lam=lam, seed=seed,
        enforce_connectivity=not allow_disconnect,
    )
    dataset = os.path.splitext(os.path.basename(graph_path))[0]
    content = "dataset\tkernel\tparam\tauc\n" + f"{dataset}\t{spec.family}\t{spec.param:g}\t{result.auc:.4f}\n"
    atomic_write_text(output, content)
    entries = _base_manifest("eval-linkpred", seed)
    entries.update(
        graph=graph_path,
        graph_sha256=sha256_file(graph_path),
        fraction=fraction,
        lam=lam,
        allow_disconnect=allow_disconnect,
        kernel=spec.family,
        kernel_param=spec.param,
        num_walks=num_walks,
        walk_length=walk_length,
        p=p,
        q=q,
        gamma=gamma,
        dim=dim,
        negatives=negatives,
        lr=lr,
        epochs=epochs,
        threads=threads,
        deterministic=deterministic,
        auc=f"{result.auc:.6f}",
        n_lcc_nodes=result.n_nodes,
        n_test_pos=result.n_test_pos,
        requested_removals=result.requested_removals,
        residual_edges=result.residual_edges,
        output_sha256=sha256_file(output),
        elapsed_s=f"{time.perf_counter() - t0:.3f}",
    )
    write_manifest(output, entries)
    click.echo(f"{dataset} {spec.describe()}: AUC {result.auc:.4f}")


@main.command("sweep")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--axis", type=click.Choice(["dim", "sigma2", "alpha"]), required=True)
@click.option("--values", required=True, help="Comma-separated values along the sweep axis.")
@click.option("--ratio", type=float, default=0.5, show_default=True, help="Training ratio for evaluation.")
@click.option("--repeats", type=int, default=10, show_default=True)
@click.option("--lam", type=float, default=1.0, show_default=True)
@click.option("--lcc", is_flag=True)
@kernel_options
@walk_options
@train_options
@run_options
@_handle_errors
def cmd_sweep(graph_path, labels_path, output, axis, values, ratio, repeats, lam, lcc,
              kernel, sigma2, sigma, alpha, num_walks, walk_length, p, q, gamma,
              dim, negatives, lr, lr_min, epochs, seed, threads, deterministic):
    """Micro-F1 across one hyperparameter axis (walk corpus is shared)."""
    if not 0.0 < ratio < 1.0:
        raise click.UsageError(f"--ratio must lie in (0, 1), got {ratio}")
    seed = _resolve_seed(seed)
    t0 = time.perf_counter()
    value_list = _parse_float_list(values, "--values")
    if axis == "sigma2":
        kernel = "gauss"
    elif axis == "alpha":
        kernel = "sch"
    base_spec = _resolve_kernel(kernel, sigma2, sigma, alpha)

    g = _load_graph(graph_path, lcc)
    labels = load_labels(labels_path)
    if lcc:
        labels = {tok: cls for tok, cls in labels.items() if tok in set(g.tokens)}
    workers = _workers(threads, deterministic)
    wcfg = WalkConfig(walks_per_node=num_walks, walk_length=walk_length, p=p, q=q,
                      window=gamma, seed=seed, workers=workers)
    corpus = generate_walks(g, wcfg)

    lines = ["axis\tvalue\tmicro_f1_mean\tmicro_f1_std"]
    for value in value_list:
        run_dim = dim
        spec = base_spec
        if axis == "dim":
            run_dim = int(value)
        elif axis == "sigma2":
            spec = KernelSpec.gauss(value)
        else:
            spec = KernelSpec.schoenberg(value)
        tcfg = TrainConfig(dim=run_dim, negatives=negatives, lr0=lr, lr_min=lr_min,
                           epochs=epochs, seed=seed, workers=workers, deterministic=deterministic)
        model = train(g, corpus, tcfg, spec, window=gamma)
        res = run_classification(g, model.A, labels, ratios=[ratio], repeats=repeats,
                                 lam=lam, seed=seed, workers=workers)[0]
        lines.append(f"{axis}\t{value:g}\t{res.mean:.4f}\t{res.std:.4f}")
        log.info("sweep %s=%g: micro-F1 %.4f", axis, value, res.mean)
    atomic_write_text(output, "\n".join(lines) + "\n")
    entries = _base_manifest("sweep", seed)
    entries.update(
        graph=graph_path,
        graph_sha256=sha256_file(graph_path),
        labels=labels_path,
        labels_sha256=sha256_file(labels_path),
        axis=axis,
        values=",".join(f"{v:g}" for v in value_list),
        ratio=ratio,
        repeats=repeats,
        lam=lam,
        lcc=lcc,
        kernel=base_spec.family,
        kernel_param=base_spec.param,
        num_walks=num_walks,
        walk_length=walk_length,
        gamma=gamma,
        dim=dim,
        epochs=epochs,
        output_sha256=sha256_file(output),
        elapsed_s=f"{time.perf_counter() - t0:.3f}",
    )
    write_manifest(output, entries)
    click.echo(f"wrote sweep table to {output}")


if __name__ == "__main__":
    main()
