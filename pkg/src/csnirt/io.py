"""File formats and run configuration.

Three text formats, all round-trip exact:

* responses: comma-separated, header row of item ids (first cell labels
  the id column), one row per subject starting with the subject id,
  cells strictly "0" or "1".
* draws: one header block of ``# key = value`` lines (format version,
  seed, chain id, mcmc settings, acceptance counters, config echo)
  followed by a CSV table with one row per stored draw and columns named
  ``param[index]``.
* config: flat ``key = value`` text with dotted keys, e.g.
  ``priors.dirichlet = 0.1, 0.01, 0.01``.

All numeric output uses repr(), i.e. full round-trip decimal precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import PriorConfig, ResponseMatrix
from .sampler import DrawStore, TuningConfig
from .synth import Scenario

__all__ = [
    "DataError",
    "DRAWS_FORMAT",
    "read_responses",
    "write_responses",
    "write_draws",
    "read_draws",
    "load_draws_dir",
    "RunConfig",
    "read_config",
    "write_config",
    "read_fixed_c",
    "write_truth",
    "read_truth",
    "write_item_summaries",
    "read_item_summaries",
]

DRAWS_FORMAT = "csnirt-draws/1"

MODELS = ("2pcsp", "3pcsp", "3pcsp-fixed-c")


class DataError(Exception):
    """Malformed or inconsistent input data."""


def _fmt(x) -> str:
    return repr(float(x))


# --- response matrices -------------------------------------------------------


def read_responses(path) -> ResponseMatrix:
    """Parse a response CSV; every format violation names its row/column."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 2:
        raise DataError(f"{path}: header must name the id column and at least one item")
    item_ids = [cell.strip() for cell in header[1:]]
    for k, cell in enumerate(item_ids):
        if not cell:
            raise DataError(f"{path}: row 1, column {k + 2}: empty item id")
    if len(set(item_ids)) != len(item_ids):
        raise DataError(f"{path}: duplicate item ids in header")

    subject_ids: list[str] = []
    rows: list[list[int]] = []
    width = len(header)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != width:
            raise DataError(
                f"{path}: row {lineno}: expected {width} cells, found {len(cells)} (ragged row)"
            )
        sid = cells[0].strip()
        if not sid:
            raise DataError(f"{path}: row {lineno}, column 1: empty subject id")
        subject_ids.append(sid)
        parsed = []
        for k, cell in enumerate(cells[1:]):
            tok = cell.strip()
            if tok == "0":
                parsed.append(0)
            elif tok == "1":
                parsed.append(1)
            elif tok == "":
                raise DataError(f"{path}: row {lineno}, column {k + 2}: missing cell")
            else:
                raise DataError(
                    f"{path}: row {lineno}, column {k + 2}: non-binary token {tok!r}"
                )
        rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no subject rows")
    if len(set(subject_ids)) != len(subject_ids):
        raise DataError(f"{path}: duplicate subject ids")
    y = np.array(rows, dtype=np.int8).T  # stored items x subjects
    try:
        return ResponseMatrix(y=y, item_ids=tuple(item_ids), subject_ids=tuple(subject_ids))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_responses(rm: ResponseMatrix, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("subject," + ",".join(rm.item_ids) + "\n")
        yt = rm.y.T
        for j, sid in enumerate(rm.subject_ids):
            fh.write(sid + "," + ",".join(str(int(v)) for v in yt[j]) + "\n")


# --- draw stores --------------------------------------------------------------


def _draw_columns(nitems: int, nsub: int) -> list[str]:
    cols = ["chain", "draw", "iteration"]
    for name in ("a", "b", "c", "gamma_neg", "gamma_pos", "z"):
        cols += [f"{name}[{i + 1}]" for i in range(nitems)]
    # the three weight components are separate column families so names
    # never contain the cell delimiter
    cols += [f"w{k}[{i + 1}]" for i in range(nitems) for k in range(3)]
    cols += [f"theta[{j + 1}]" for j in range(nsub)]
    cols += [f"d_count[{i + 1}]" for i in range(nitems)]
    return cols


def write_draws(store: DrawStore, path) -> None:
    """Write one chain's draws; the read side reproduces the store exactly."""
    path = Path(path)
    nitems = store.n_items
    nsub = store.theta.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# format = {DRAWS_FORMAT}\n")
        fh.write(f"# seed = {store.seed}\n")
        fh.write(f"# chain = {store.chain_id}\n")
        fh.write(f"# iterations = {store.iterations}\n")
        fh.write(f"# burnin = {store.burnin}\n")
        fh.write(f"# thin = {store.thin}\n")
        fh.write(f"# model = {store.model}\n")
        fh.write(f"# n_items = {nitems}\n")
        fh.write(f"# n_subjects = {nsub}\n")
        for k in sorted(store.acceptance):
            acc, att = store.acceptance[k]
            fh.write(f"# acceptance.{k} = {acc} {att}\n")
        for k in sorted(store.config):
            fh.write(f"# config.{k} = {store.config[k]}\n")
        fh.write(",".join(_draw_columns(nitems, nsub)) + "\n")
        for n in range(store.n_draws):
            row = [str(store.chain_id), str(n + 1), str(int(store.iteration[n]))]
            for name in ("a", "b", "c", "gamma_neg", "gamma_pos"):
                row += [_fmt(v) for v in getattr(store, name)[n]]
            row += [str(int(v)) for v in store.z[n]]
            row += [_fmt(v) for v in store.w[n].ravel()]
            row += [_fmt(v) for v in store.theta[n]]
            row += [str(int(v)) for v in store.d_count[n]]
            fh.write(",".join(row) + "\n")


def read_draws(path) -> DrawStore:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta: dict[str, str] = {}
    body_start = 0
    for k, line in enumerate(lines):
        if line.startswith("#"):
            try:
                key, value = line[1:].split("=", 1)
            except ValueError:
                raise DataError(f"{path}: line {k + 1}: malformed header line")
            meta[key.strip()] = value.strip()
        else:
            body_start = k
            break
    else:
        raise DataError(f"{path}: truncated file, no column header")
    if meta.get("format") != DRAWS_FORMAT:
        raise DataError(
            f"{path}: format version mismatch: found {meta.get('format')!r}, expected {DRAWS_FORMAT!r}"
        )
    try:
        nitems = int(meta["n_items"])
        nsub = int(meta["n_subjects"])
        seed = int(meta["seed"])
        chain_id = int(meta["chain"])
        iterations = int(meta["iterations"])
        burnin = int(meta["burnin"])
        thin = int(meta["thin"])
        model = meta["model"]
    except KeyError as exc:
        raise DataError(f"{path}: missing header key {exc}") from exc
    acceptance: dict[str, tuple[int, int]] = {}
    config: dict[str, str] = {}
    for key, value in meta.items():
        if key.startswith("acceptance."):
            acc, att = value.split()
            acceptance[key[len("acceptance."):]] = (int(acc), int(att))
        elif key.startswith("config."):
            config[key[len("config."):]] = value

    expected_cols = _draw_columns(nitems, nsub)
    header = lines[body_start].split(",")
    if header != expected_cols:
        raise DataError(f"{path}: column header does not match the declared dimensions")
    body = [ln for ln in lines[body_start + 1 :] if ln.strip()]
    n = len(body)
    expected_draws = (iterations - burnin) // thin
    if n != expected_draws:
        raise DataError(
            f"{path}: truncated file: {n} draw rows for {expected_draws} expected"
        )
    data = np.empty((n, len(expected_cols)))
    for r, line in enumerate(body):
        cells = line.split(",")
        if len(cells) != len(expected_cols):
            raise DataError(f"{path}: draw row {r + 1}: ragged row")
        data[r] = [float(cell) for cell in cells]
    col = 3
    blocks = {}
    for name in ("a", "b", "c", "gamma_neg", "gamma_pos", "z"):
        blocks[name] = data[:, col : col + nitems]
        col += nitems
    w = data[:, col : col + 3 * nitems].reshape(n, nitems, 3)
    col += 3 * nitems
    theta = data[:, col : col + nsub]
    col += nsub
    d_count = data[:, col : col + nitems]
    return DrawStore(
        a=blocks["a"],
        b=blocks["b"],
        c=blocks["c"],
        gamma_neg=blocks["gamma_neg"],
        gamma_pos=blocks["gamma_pos"],
        z=blocks["z"].astype(np.int8),
        w=w,
        theta=theta,
        d_count=d_count.astype(np.int64),
        iteration=data[:, 2].astype(np.int64),
        acceptance=acceptance,
        seed=seed,
        chain_id=chain_id,
        iterations=iterations,
        burnin=burnin,
        thin=thin,
        model=model,
        config=config,
    )


def load_draws_dir(dirpath) -> list[DrawStore]:
    """Read every draws file in a directory, ordered by chain id."""
    dirpath = Path(dirpath)
    if not dirpath.is_dir():
        raise DataError(f"{dirpath}: not a directory")
    paths = sorted(dirpath.glob("draws_chain*.csv"))
    if not paths:
        raise DataError(f"{dirpath}: no draws_chain*.csv files")
    stores = [read_draws(p) for p in paths]
    stores.sort(key=lambda s: s.chain_id)
    return stores


# --- run configuration ---------------------------------------------------------


@dataclass
class RunConfig:
    """Everything `fit` needs: model, priors, tuning, mcmc sizes, data paths."""

    model: str = "2pcsp"
    priors: PriorConfig = field(default_factory=PriorConfig)
    tuning: TuningConfig = field(default_factory=TuningConfig)
    iterations: int = 2000
    burnin: int = 1000
    thin: int = 1
    chains: int = 2
    seed: int = 0
    responses_path: str = "responses.csv"
    fixed_c_path: str | None = None
    exclude_items: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose one of {MODELS}")
        if self.iterations <= 0 or self.burnin < 0 or self.thin < 1 or self.chains < 1:
            raise ValueError("mcmc counts must be positive")

    def flat(self) -> dict[str, str]:
        """Dotted-key echo of the full configuration."""
        t = self.tuning
        p = self.priors
        out = {
            "model": self.model,
            "priors.dirichlet": ", ".join(_fmt(v) for v in p.dirichlet),
            "priors.beta_skew": ", ".join(_fmt(v) for v in p.beta_skew),
            "priors.mu_a": _fmt(p.mu_a),
            "priors.sigma_a": _fmt(p.sigma_a),
            "priors.mu_b": _fmt(p.mu_b),
            "priors.sigma_b": _fmt(p.sigma_b),
            "priors.beta_guess": ", ".join(_fmt(v) for v in p.beta_guess),
            "tuning.tau_gamma_neg": _fmt(t.tau_gamma_neg),
            "tuning.tau_gamma_pos": _fmt(t.tau_gamma_pos),
            "tuning.sigma_ab": ", ".join(_fmt(v) for v in np.asarray(t.sigma_ab).ravel()),
            "tuning.sigma_theta": _fmt(t.sigma_theta),
            "tuning.adapt_target": _fmt(t.adapt_target),
            "tuning.adapt_target_ab": _fmt(t.adapt_target_ab),
            "tuning.adapt_window": str(t.adapt_window),
            "mcmc.iterations": str(self.iterations),
            "mcmc.burnin": str(self.burnin),
            "mcmc.thin": str(self.thin),
            "mcmc.chains": str(self.chains),
            "mcmc.seed": str(self.seed),
            "data.responses_path": self.responses_path,
        }
        if self.fixed_c_path is not None:
            out["data.fixed_c_path"] = self.fixed_c_path
        if self.exclude_items:
            out["data.exclude_items"] = ", ".join(self.exclude_items)
        return out


def _parse_floats(value: str, n: int, key: str) -> tuple[float, ...]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != n:
        raise DataError(f"{key}: expected {n} comma-separated values, got {len(parts)}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise DataError(f"{key}: {exc}") from exc


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse the flat dotted-key configuration format."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{source}: line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in values:
            raise DataError(f"{source}: line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()

    priors = PriorConfig()
    tuning = TuningConfig()
    cfg_kwargs: dict = {}
    try:
        for key, value in values.items():
            if key == "model":
                cfg_kwargs["model"] = value
            elif key == "priors.dirichlet":
                priors.dirichlet = _parse_floats(value, 3, key)
            elif key == "priors.beta_skew":
                priors.beta_skew = _parse_floats(value, 2, key)
            elif key == "priors.beta_guess":
                priors.beta_guess = _parse_floats(value, 2, key)
            elif key in ("priors.mu_a", "priors.sigma_a", "priors.mu_b", "priors.sigma_b"):
                setattr(priors, key.split(".")[1], float(value))
            elif key in ("tuning.tau_gamma_neg", "tuning.tau_gamma_pos", "tuning.sigma_theta",
                         "tuning.adapt_target", "tuning.adapt_target_ab"):
                setattr(tuning, key.split(".")[1], float(value))
            elif key == "tuning.adapt_window":
                tuning.adapt_window = int(value)
            elif key == "tuning.sigma_ab":
                flat_cov = _parse_floats(value, 4, key)
                tuning.sigma_ab = np.array(flat_cov).reshape(2, 2)
            elif key in ("mcmc.iterations", "mcmc.burnin", "mcmc.thin", "mcmc.chains", "mcmc.seed"):
                cfg_kwargs[key.split(".")[1]] = int(value)
            elif key == "data.responses_path":
                cfg_kwargs["responses_path"] = value
            elif key == "data.fixed_c_path":
                cfg_kwargs["fixed_c_path"] = value
            elif key == "data.exclude_items":
                cfg_kwargs["exclude_items"] = tuple(
                    s.strip() for s in value.split(",") if s.strip()
                )
            else:
                raise DataError(f"{source}: unknown configuration key {key!r}")
        priors.__post_init__()
        tuning.__post_init__()
        return RunConfig(priors=priors, tuning=tuning, **cfg_kwargs)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{source}: {exc}") from exc


def read_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    return parse_config(path.read_text(encoding="utf-8"), source=str(path))


def write_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in cfg.flat().items():
            fh.write(f"{key} = {value}\n")


def read_fixed_c(path) -> dict[str, float]:
    """Read per-item fixed guessing values: CSV with columns item,c."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    out: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or (lineno == 1 and line.lower().startswith("item")):
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise DataError(f"{path}: row {lineno}: expected 'item,c'")
        item, cval = cells[0].strip(), cells[1].strip()
        if item in out:
            raise DataError(f"{path}: row {lineno}: duplicate item {item!r}")
        try:
            c = float(cval)
        except ValueError as exc:
            raise DataError(f"{path}: row {lineno}: {exc}") from exc
        if not 0.0 <= c < 1.0:
            raise DataError(f"{path}: row {lineno}: guessing value {c} outside [0, 1)")
        out[item] = c
    if not out:
        raise DataError(f"{path}: no fixed guessing rows")
    return out


# --- ground truth -------------------------------------------------------------


def write_truth(scenario: Scenario, theta: np.ndarray, dirpath) -> None:
    """Write truth_items.csv and truth_theta.csv next to a simulated matrix."""
    dirpath = Path(dirpath)
    with open(dirpath / "truth_items.csv", "w", encoding="utf-8") as fh:
        fh.write("item,a,b,c,gamma,seed\n")
        for i in range(scenario.n_items):
            fh.write(
                f"{i + 1},{_fmt(scenario.true_a[i])},{_fmt(scenario.true_b[i])},"
                f"{_fmt(scenario.true_c[i])},{_fmt(scenario.true_gamma[i])},{scenario.seed}\n"
            )
    with open(dirpath / "truth_theta.csv", "w", encoding="utf-8") as fh:
        fh.write("subject,theta\n")
        for j in range(scenario.n_subjects):
            fh.write(f"{j + 1},{_fmt(theta[j])}\n")


def read_truth(dirpath) -> tuple[Scenario, np.ndarray]:
    dirpath = Path(dirpath)
    items_path = dirpath / "truth_items.csv"
    theta_path = dirpath / "truth_theta.csv"
    for p in (items_path, theta_path):
        if not p.exists():
            raise DataError(f"{p}: file not found")
    rows = [ln.split(",") for ln in items_path.read_text().splitlines()[1:] if ln.strip()]
    a = np.array([float(r[1]) for r in rows])
    b = np.array([float(r[2]) for r in rows])
    c = np.array([float(r[3]) for r in rows])
    gamma = np.array([float(r[4]) for r in rows])
    seed = int(rows[0][5])
    trows = [ln.split(",") for ln in theta_path.read_text().splitlines()[1:] if ln.strip()]
    theta = np.array([float(r[1]) for r in trows])
    scenario = Scenario(
        n_items=len(rows), n_subjects=len(trows),
        true_a=a, true_b=b, true_c=c, true_gamma=gamma, seed=seed,
    )
    return scenario, theta


# --- item summaries -------------------------------------------------------------


def write_item_summaries(items, path) -> None:
    """Summary table; the leading columns mirror the reporting layout
    (a, b, c, the three indicator means, then the skewness estimate)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "item,a,b,c,Z0,Z1,Z2,gamma,classification,asymmetry_level,"
            "ci_a_lo,ci_a_hi,ci_b_lo,ci_b_hi,ci_c_lo,ci_c_hi,ci_gamma_lo,ci_gamma_hi,level\n"
        )
        for it in items:
            fh.write(
                ",".join(
                    [
                        it.item_id,
                        _fmt(it.post_mean_a),
                        _fmt(it.post_mean_b),
                        _fmt(it.post_mean_c),
                        _fmt(it.z_probs[0]),
                        _fmt(it.z_probs[1]),
                        _fmt(it.z_probs[2]),
                        _fmt(it.gamma_est),
                        it.classification,
                        it.asymmetry_level,
                        _fmt(it.ci_a[0]),
                        _fmt(it.ci_a[1]),
                        _fmt(it.ci_b[0]),
                        _fmt(it.ci_b[1]),
                        _fmt(it.ci_c[0]),
                        _fmt(it.ci_c[1]),
                        _fmt(it.ci_gamma[0]),
                        _fmt(it.ci_gamma[1]),
                        _fmt(it.level),
                    ]
                )
                + "\n"
            )


def read_item_summaries(path):
    from .summary import ItemSummary

    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 19:
            raise DataError(f"{path}: row {lineno}: expected 19 cells")
        out.append(
            ItemSummary(
                item_id=cells[0],
                post_mean_a=float(cells[1]),
                post_mean_b=float(cells[2]),
                post_mean_c=float(cells[3]),
                z_probs=(float(cells[4]), float(cells[5]), float(cells[6])),
                gamma_est=float(cells[7]),
                classification=cells[8],
                asymmetry_level=cells[9],
                ci_a=(float(cells[10]), float(cells[11])),
                ci_b=(float(cells[12]), float(cells[13])),
                ci_c=(float(cells[14]), float(cells[15])),
                ci_gamma=(float(cells[16]), float(cells[17])),
                level=float(cells[18]),
            )
        )
    return out
