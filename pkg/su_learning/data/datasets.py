"""
Datasets
LIBSVM ingest, synthetic Gaussian and banana generators, SU subsampling and SU JSON files
"""

import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError
from scipy import linalg
from scipy.stats import norm
from sklearn.datasets import make_moons

from su_learning.errors import (
    DataError,
    DataFormatError,
    EmptyInputError,
    InsufficientDataError,
    NotPositiveDefiniteError,
)
from su_learning.models.data_models import (
    ClassPrior,
    HiddenLabels,
    LabeledDataset,
    SUDataset,
    SUSample,
    SyntheticSpec,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# ---------------------------------------------------------------------------
# LIBSVM format
# ---------------------------------------------------------------------------

def parse_libsvm(text: Union[bytes, str], n_features: Optional[int] = None) -> LabeledDataset:
    """Parse sparse ``label index:value ...`` lines into a dense labeled dataset.

    Indices are 1-based on disk. Two distinct raw labels are mapped so that the
    larger one becomes +1; a single distinct label keeps its sign.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DataFormatError(f"input is not valid UTF-8: {e}") from e

    raw_labels = []
    rows = []
    max_index = 0
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise DataFormatError(f"invalid label {tokens[0]!r}", line_number) from None
        if not np.isfinite(label):
            raise DataFormatError(f"non-finite label {tokens[0]!r}", line_number)

        entries = {}
        for token in tokens[1:]:
            index_text, sep, value_text = token.partition(":")
            if not sep:
                raise DataFormatError(f"expected index:value, got {token!r}", line_number)
            try:
                index = int(index_text)
                value = float(value_text)
            except ValueError:
                raise DataFormatError(f"malformed entry {token!r}", line_number) from None
            if index < 1:
                raise DataFormatError(f"feature indices start at 1, got {index}", line_number)
            if not np.isfinite(value):
                raise DataFormatError(f"non-finite value in {token!r}", line_number)
            if index in entries:
                raise DataFormatError(f"duplicate feature index {index}", line_number)
            entries[index] = value
            max_index = max(max_index, index)

        raw_labels.append(label)
        rows.append(entries)

    if not rows:
        raise EmptyInputError("no data lines in LIBSVM input")

    distinct = sorted(set(raw_labels))
    if len(distinct) > 2:
        raise DataFormatError(f"expected at most two distinct labels, found {len(distinct)}: {distinct[:5]}")

    if n_features is not None:
        if n_features < max_index:
            raise DataFormatError(f"n_features={n_features} but index {max_index} appears in the input")
        max_index = n_features
    if max_index < 1:
        raise DataFormatError("input has no features")

    features = np.zeros((len(rows), max_index))
    for i, entries in enumerate(rows):
        for index, value in entries.items():
            features[i, index - 1] = value

    if len(distinct) == 2:
        labels = np.where(np.asarray(raw_labels) == distinct[1], 1, -1)
    else:
        labels = np.full(len(rows), 1 if distinct[0] > 0 else -1)

    logger.debug(f"Parsed LIBSVM input: n={len(rows)}, d={max_index}, raw labels={distinct}")
    return LabeledDataset(features=features, labels=labels)


def write_libsvm(data: LabeledDataset) -> str:
    """Serialize nonzero entries with 17 significant digits (exact for float64)"""
    lines = []
    for x, y in zip(data.features, data.labels):
        parts = ["+1" if y == 1 else "-1"]
        parts.extend(f"{j + 1}:{value:.17g}" for j, value in enumerate(x) if value != 0.0)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def load_libsvm(path: PathLike, n_features: Optional[int] = None) -> LabeledDataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    return parse_libsvm(path.read_bytes(), n_features=n_features)


def save_libsvm(data: LabeledDataset, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(write_libsvm(data), encoding="utf-8")
    logger.info(f"Wrote {data.n} labeled points to {path}")
    return path


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

def _draw_labels(rng: np.random.Generator, pi_plus: float, n: int) -> np.ndarray:
    return np.where(rng.random(n) < pi_plus, 1, -1).astype(np.int8)


def generate_gaussian(spec: SyntheticSpec, n: int) -> LabeledDataset:
    """Labels ~ Bernoulli(pi_plus); features from the class-conditional Gaussian"""
    if n < 1:
        raise DataError(f"n must be >= 1, got {n}")
    try:
        chol = linalg.cholesky(spec.covariance, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"covariance is not positive definite: {e}") from e

    rng = np.random.default_rng(spec.seed)
    labels = _draw_labels(rng, spec.pi_plus.pi_plus, n)
    noise = rng.standard_normal((n, spec.d)) @ chol.T
    means = np.where(labels[:, None] == 1, spec.mean_plus[None, :], spec.mean_minus[None, :])
    return LabeledDataset(features=means + noise, labels=labels)


def generate_banana(pi_plus: Union[ClassPrior, float], n: int,
                    noise: float = 0.15, seed: int = 0) -> LabeledDataset:
    """Two interleaving half-moons; the inner moon is the positive class"""
    if n < 1:
        raise DataError(f"n must be >= 1, got {n}")
    prior = ClassPrior.coerce(pi_plus)
    rng = np.random.default_rng(seed)
    n_pos = int(rng.binomial(n, prior.pi_plus))
    features, raw = make_moons(n_samples=(n - n_pos, n_pos), noise=noise,
                               random_state=int(rng.integers(2**31 - 1)))
    return LabeledDataset(features=features, labels=np.where(raw == 1, 1, -1))


def bayes_error(spec: SyntheticSpec) -> float:
    """Closed-form Bayes error of the shared-covariance Gaussian family"""
    try:
        factor = linalg.cho_factor(spec.covariance, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"covariance is not positive definite: {e}") from e
    delta = spec.mean_plus - spec.mean_minus
    mahalanobis = float(np.sqrt(max(delta @ linalg.cho_solve(factor, delta), 0.0)))
    pi_plus, pi_minus = spec.pi_plus.pi_plus, spec.pi_plus.pi_minus
    if mahalanobis == 0.0:
        return min(pi_plus, pi_minus)
    shift = np.log(pi_plus / pi_minus) / mahalanobis
    return float(pi_plus * norm.cdf(-mahalanobis / 2 - shift)
                 + pi_minus * norm.cdf(-mahalanobis / 2 + shift))


# ---------------------------------------------------------------------------
# SU sampling
# ---------------------------------------------------------------------------

def _pair_classes_rejection(rng: np.random.Generator, prior: ClassPrior, n_s: int) -> np.ndarray:
    """Draw two i.i.d. labels per candidate and keep same-class candidates"""
    accepted = []
    needed = n_s
    while needed > 0:
        batch = int(np.ceil(needed / prior.pi_s * 1.2)) + 16
        first = _draw_labels(rng, prior.pi_plus, batch)
        second = _draw_labels(rng, prior.pi_plus, batch)
        same = first[first == second]
        accepted.append(same[:needed])
        needed -= len(accepted[-1])
    return np.concatenate(accepted)


def _pair_classes_stratified(rng: np.random.Generator, prior: ClassPrior, n_s: int) -> np.ndarray:
    positive_share = prior.pi_plus ** 2 / prior.pi_s
    return np.where(rng.random(n_s) < positive_share, 1, -1).astype(np.int8)


class _ClassPool:
    """Indices of one class, consumed without reuse when sampling without replacement"""

    def __init__(self, label: int, indices: np.ndarray, rng: np.random.Generator, replace: bool):
        self.label = label
        self.indices = indices
        self.rng = rng
        self.replace = replace
        self._order = rng.permutation(indices) if not replace else indices
        self._cursor = 0

    def _take(self, count: int, what: str) -> np.ndarray:
        available = len(self._order) - self._cursor
        if count > available:
            raise InsufficientDataError(
                f"class {self.label:+d} has {available} unused points left but {count} are needed for {what}",
                deficient_class=self.label)
        chosen = self._order[self._cursor:self._cursor + count]
        self._cursor += count
        return chosen

    def pairs(self, count: int) -> np.ndarray:
        """count x 2 index matrix; the two members of a pair are always distinct points"""
        if count == 0:
            return np.empty((0, 2), dtype=int)
        if not self.replace:
            return self._take(2 * count, f"{count} pairs").reshape(count, 2)
        m = len(self.indices)
        if m < 2:
            raise InsufficientDataError(
                f"class {self.label:+d} has {m} point(s); a similar pair needs two distinct points",
                deficient_class=self.label)
        first = self.rng.integers(0, m, count)
        second = self.rng.integers(0, m - 1, count)
        second = second + (second >= first)
        return np.stack([self.indices[first], self.indices[second]], axis=1)

    def points(self, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0, dtype=int)
        if not self.replace:
            return self._take(count, f"{count} unlabeled points")
        if len(self.indices) == 0:
            raise InsufficientDataError(
                f"class {self.label:+d} has no points but {count} unlabeled draws need it",
                deficient_class=self.label)
        return self.indices[self.rng.integers(0, len(self.indices), count)]


def sample_su(data: LabeledDataset, pi_plus: Union[ClassPrior, float], n_s: int, n_u: int,
              seed: int = 0, method: str = "rejection", replace: bool = True) -> SUDataset:
    """Subsample similar pairs and unlabeled points from a labeled dataset.

    Pair classes follow the similar-pair distribution (positive share
    pi_plus^2 / pi_S); unlabeled classes follow Bernoulli(pi_plus). With
    ``replace=False`` no labeled point is used twice anywhere in the sample.
    """
    if n_s < 1 or n_u < 1:
        raise DataError(f"n_s and n_u must be >= 1, got n_s={n_s}, n_u={n_u}")
    prior = ClassPrior.coerce(pi_plus)
    rng = np.random.default_rng(seed)

    if method == "rejection":
        pair_classes = _pair_classes_rejection(rng, prior, n_s)
    elif method == "stratified":
        pair_classes = _pair_classes_stratified(rng, prior, n_s)
    else:
        raise DataError(f"unknown sampling method {method!r}; use 'rejection' or 'stratified'")
    u_classes = _draw_labels(rng, prior.pi_plus, n_u)

    pools = {label: _ClassPool(label, data.class_indices(label), rng, replace) for label in (1, -1)}

    pair_index = np.empty((n_s, 2), dtype=int)
    for label, pool in pools.items():
        mask = pair_classes == label
        pair_index[mask] = pool.pairs(int(mask.sum()))
    u_index = np.empty(n_u, dtype=int)
    for label, pool in pools.items():
        mask = u_classes == label
        u_index[mask] = pool.points(int(mask.sum()))

    su = SUDataset(
        s_pairs=data.features[pair_index],
        u_points=data.features[u_index],
        hidden_labels=HiddenLabels(s_labels=pair_classes, u_labels=u_classes),
    )
    logger.info(f"Sampled SU data: n_S={n_s} ({int((pair_classes == 1).sum())} positive pairs), "
                f"n_U={n_u}, pi_plus={prior.pi_plus}, method={method}, replace={replace}")
    return su


# ---------------------------------------------------------------------------
# SU JSON files
# ---------------------------------------------------------------------------

def su_to_json(su: Union[SUDataset, SUSample], include_labels: bool = True) -> str:
    payload = {
        "s_pairs": su.s_pairs.tolist(),
        "u_points": su.u_points.tolist(),
        "d": su.d,
    }
    hidden = getattr(su, "hidden_labels", None)
    if include_labels and hidden is not None:
        payload["hidden_labels"] = {
            "s_pairs": hidden.s_labels.astype(int).tolist(),
            "u_points": hidden.u_labels.astype(int).tolist(),
        }
    return json.dumps(payload)


def su_from_json(text: Union[str, bytes]) -> SUDataset:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"invalid JSON: {e.msg}", e.lineno) from e
    if not isinstance(payload, dict):
        raise DataFormatError("SU file must hold a JSON object")
    missing = [key for key in ("s_pairs", "u_points", "d") if key not in payload]
    if missing:
        raise DataFormatError(f"SU file is missing keys: {missing}")

    hidden = None
    if payload.get("hidden_labels") is not None:
        labels = payload["hidden_labels"]
        try:
            hidden = HiddenLabels(s_labels=labels["s_pairs"], u_labels=labels["u_points"])
        except (KeyError, TypeError, ValidationError) as e:
            raise DataFormatError(f"invalid hidden_labels: {e}") from e

    try:
        su = SUDataset(s_pairs=payload["s_pairs"], u_points=payload["u_points"], hidden_labels=hidden)
    except (ValidationError, ValueError) as e:
        raise DataFormatError(f"invalid SU data: {e}") from e
    if su.d != payload["d"]:
        raise DataFormatError(f"declared d={payload['d']} but vectors have dimension {su.d}")
    return su


def save_su(su: Union[SUDataset, SUSample], path: PathLike, include_labels: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(su_to_json(su, include_labels=include_labels), encoding="utf-8")
    logger.info(f"Wrote SU data ({su.n_s} pairs, {su.n_u} unlabeled) to {path}")
    return path


def load_su(path: PathLike) -> SUDataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    return su_from_json(path.read_text(encoding="utf-8"))
