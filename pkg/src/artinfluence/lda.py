"""Per-style topic models: variational EM for latent Dirichlet allocation.

Documents are BoW histograms over a shared vocabulary. Inference is
mean-field: per-document topic responsibilities phi and a Dirichlet
surrogate gamma are iterated until the document ELBO stabilizes; the M-step
renormalizes the topic-word matrix from expected counts and refits the
symmetric Dirichlet parameter alpha by Newton iteration in log space. The
converged ELBO doubles as the per-class likelihood surrogate for
classification.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp, polygamma, psi

from .errors import DimensionMismatch, EmptyCorpus, InvalidInput

log = logging.getLogger(__name__)

BETA_FLOOR = 1e-10
MAX_VI_ITERS = 200
_ALPHA_NEWTON_INIT = 100.0
_ALPHA_NEWTON_THRESH = 1e-6
_ALPHA_NEWTON_MAX = 100


@dataclass(frozen=True, eq=False)
class TopicModel:
    """Topic-word matrix and symmetric Dirichlet prior of one style.

    Rows of ``beta`` are distributions over the vocabulary (floored at
    1e-10 before renormalization, so strictly positive). ``elbo_history``
    records the corpus ELBO after each EM iteration (diagnostic only).
    """

    beta: np.ndarray
    alpha: float
    elbo_history: tuple[float, ...] = field(default=())

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=np.float64).copy()
        b.flags.writeable = False
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n_topics(self) -> int:
        return int(self.beta.shape[0])

    @property
    def vocab_size(self) -> int:
        return int(self.beta.shape[1])


def _doc_elbo(counts, log_beta, alpha, gamma, phi) -> float:
    """Evidence lower bound of one document at the given variational state.

    ``counts``/``log_beta``/``phi`` are restricted to the document's active
    words; shapes are (W,), (T, W), (T, W).
    """
    t = gamma.shape[0]
    dig = psi(gamma) - psi(gamma.sum())
    elbo = gammaln(t * alpha) - t * gammaln(alpha) + (alpha - 1.0) * dig.sum()
    elbo += float(((phi * dig[:, None]).sum(axis=0) * counts).sum())
    elbo += float(((phi * log_beta).sum(axis=0) * counts).sum())
    elbo -= float(gammaln(gamma.sum()) - gammaln(gamma).sum() + ((gamma - 1.0) * dig).sum())
    with np.errstate(divide="ignore", invalid="ignore"):
        phi_log_phi = np.where(phi > 0.0, phi * np.log(phi), 0.0)
    elbo -= float((phi_log_phi.sum(axis=0) * counts).sum())
    return elbo


def _doc_estep(counts, log_beta, alpha, vi_tol, gamma=None):
    """Mean-field updates for one document until the ELBO stabilizes.

    Returns (gamma, phi, elbo). ``gamma`` may be passed to warm-start.
    """
    t = log_beta.shape[0]
    total = float(counts.sum())
    if gamma is None:
        gamma = np.full(t, alpha + total / t)
    phi = np.full((t, counts.shape[0]), 1.0 / t)
    prev = None
    for _ in range(MAX_VI_ITERS):
        log_phi = psi(gamma)[:, None] + log_beta
        log_phi -= logsumexp(log_phi, axis=0)[None, :]
        phi = np.exp(log_phi)
        gamma = alpha + phi @ counts
        elbo = _doc_elbo(counts, log_beta, alpha, gamma, phi)
        if prev is not None and abs(elbo - prev) <= vi_tol * abs(prev):
            break
        prev = elbo
    return gamma, phi, elbo


def _alpha_objective(a: float, ss: float, n_docs: int, n_topics: int) -> float:
    # alpha-dependent part of the corpus ELBO
    return n_docs * (gammaln(n_topics * a) - n_topics * gammaln(a)) + (a - 1.0) * ss


def _update_alpha(alpha: float, ss: float, n_docs: int, n_topics: int) -> float:
    """Newton iteration in log space for the symmetric Dirichlet parameter.

    Falls back to the incoming alpha whenever the iterate would lower the
    alpha-dependent part of the bound, which keeps EM monotone.
    """
    log_a = np.log(_ALPHA_NEWTON_INIT)
    for _ in range(_ALPHA_NEWTON_MAX):
        a = np.exp(log_a)
        if not np.isfinite(a) or a <= 0:
            break
        df = n_docs * n_topics * (psi(n_topics * a) - psi(a)) + ss
        d2f = n_docs * (n_topics**2 * polygamma(1, n_topics * a) - n_topics * polygamma(1, a))
        denom = d2f * a + df
        if denom == 0.0 or not np.isfinite(denom):
            break
        log_a -= df / denom
        if abs(df) < _ALPHA_NEWTON_THRESH:
            break
    candidate = float(np.exp(log_a))
    if not np.isfinite(candidate) or candidate <= 0:
        return alpha
    if _alpha_objective(candidate, ss, n_docs, n_topics) < _alpha_objective(alpha, ss, n_docs, n_topics):
        return alpha
    return candidate


def _normalize_beta(expected_counts: np.ndarray) -> np.ndarray:
    floored = np.maximum(expected_counts, BETA_FLOOR)
    return floored / floored.sum(axis=1, keepdims=True)


def lda_fit(
    histograms,
    n_topics: int,
    alpha_init: float = 0.1,
    em_tol: float = 1e-4,
    vi_tol: float = 1e-6,
    max_em_iters: int = 100,
    estimate_alpha: bool = True,
    seed: int = 0,
) -> TopicModel:
    """Fit a topic model to the histograms of one style by variational EM.

    Empty histograms are skipped with a warning. The corpus ELBO is
    non-decreasing across EM iterations (documents are warm-started from
    their previous variational state, and the alpha update is safeguarded).
    """
    hists = np.asarray(histograms, dtype=np.float64)
    if hists.ndim != 2:
        raise DimensionMismatch(f"histograms must be 2-D, got shape {hists.shape}")
    if n_topics < 1:
        raise InvalidInput(f"n_topics must be >= 1, got {n_topics}")
    if alpha_init <= 0:
        raise InvalidInput(f"alpha_init must be > 0, got {alpha_init}")
    keep = hists.sum(axis=1) > 0
    if not keep.any():
        raise EmptyCorpus("no non-empty histogram")
    if not keep.all():
        log.warning("dropping %d empty histogram(s) from topic-model fit", int((~keep).sum()))
        hists = hists[keep]

    n_docs, vocab = hists.shape
    docs = []
    for row in hists:
        active = np.where(row > 0)[0]
        docs.append((active, row[active]))

    rng = np.random.default_rng(seed)
    beta = _normalize_beta(1.0 + rng.random((n_topics, vocab)))
    alpha = float(alpha_init)
    gammas: list[np.ndarray | None] = [None] * n_docs

    history: list[float] = []
    prev = None
    for _ in range(max_em_iters):
        log_beta = np.log(beta)
        corpus_elbo = 0.0
        expected = np.zeros((n_topics, vocab))
        alpha_ss = 0.0
        for d, (active, counts) in enumerate(docs):
            gamma, phi, elbo = _doc_estep(counts, log_beta[:, active], alpha, vi_tol, gamma=gammas[d])
            gammas[d] = gamma
            corpus_elbo += elbo
            expected[:, active] += phi * counts[None, :]
            alpha_ss += float((psi(gamma) - psi(gamma.sum())).sum())
        history.append(corpus_elbo)

        beta = _normalize_beta(expected)
        if estimate_alpha:
            alpha = _update_alpha(alpha, alpha_ss, n_docs, n_topics)

        if prev is not None and abs(corpus_elbo - prev) <= em_tol * abs(prev):
            break
        prev = corpus_elbo

    return TopicModel(beta, alpha, tuple(history))


def lda_score(model: TopicModel, histogram, vi_tol: float = 1e-6) -> float:
    """Variational lower bound on the document log-likelihood under a model.

    An all-zero histogram is flagged and scores 0 by convention.
    """
    counts = np.asarray(histogram, dtype=np.float64)
    if counts.ndim != 1 or counts.shape[0] != model.vocab_size:
        raise DimensionMismatch(f"histogram width {counts.shape} != vocabulary size {model.vocab_size}")
    active = np.where(counts > 0)[0]
    if active.size == 0:
        log.warning("scoring an empty document; returning 0 by convention")
        return 0.0
    log_beta = np.log(model.beta)[:, active]
    _, _, elbo = _doc_estep(counts[active], log_beta, model.alpha, vi_tol)
    return float(elbo)


def lda_classify(models, histogram) -> str:
    """Pick the style whose topic model scores the histogram highest.

    ``models`` maps style label to TopicModel; ties break toward the
    earliest label in iteration order.
    """
    items = list(models.items()) if hasattr(models, "items") else list(models)
    if not items:
        raise InvalidInput("no models supplied")
    vocab = items[0][1].vocab_size
    for _, m in items:
        if m.vocab_size != vocab:
            raise DimensionMismatch("models disagree on vocabulary size")
    scores = [lda_score(m, histogram) for _, m in items]
    return items[int(np.argmax(scores))][0]


class FittedLdaClassifier:
    """Per-style topic models, classifying by highest document ELBO."""

    def __init__(self, models: dict[str, TopicModel]):
        self.models = models

    def predict(self, features) -> list[str]:
        return [lda_classify(self.models, row) for row in np.asarray(features, dtype=np.float64)]


class LdaClassifierSpec:
    """One topic model per style, packaged for cross_validate."""

    def __init__(
        self,
        n_topics: int = 20,
        alpha_init: float = 0.1,
        em_tol: float = 1e-4,
        vi_tol: float = 1e-6,
        max_em_iters: int = 100,
        estimate_alpha: bool = True,
        seed: int = 0,
    ):
        self.n_topics = n_topics
        self.alpha_init = alpha_init
        self.em_tol = em_tol
        self.vi_tol = vi_tol
        self.max_em_iters = max_em_iters
        self.estimate_alpha = estimate_alpha
        self.seed = seed

    def fit(self, features, labels) -> FittedLdaClassifier:
        hists = np.asarray(features, dtype=np.float64)
        labels = [str(lbl) for lbl in labels]
        models: dict[str, TopicModel] = {}
        for cls in sorted(set(labels)):
            rows = hists[[i for i, lbl in enumerate(labels) if lbl == cls]]
            models[cls] = lda_fit(
                rows,
                self.n_topics,
                self.alpha_init,
                self.em_tol,
                self.vi_tol,
                self.max_em_iters,
                self.estimate_alpha,
                self.seed,
            )
        return FittedLdaClassifier(models)
