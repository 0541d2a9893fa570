"""scikit-learn style front end for the summarization pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_corpus, check_positive_int
from .calibration import CalibrationConfig
from .config import PipelineConfig
from .pipeline import summarize


class ExtractiveSummarizer(TransformerMixin, BaseEstimator):
    """Select ``k`` posts from a collection with chunked LLM calls and voting.

    ``fit`` runs the pipeline on ``X`` (texts or a Corpus). ``transform``
    returns the selected texts in winner order and ``predict`` a 0/1 mask
    over the fitted collection, which lines up with annotator labels.

    Parameters mirror :class:`PipelineConfig`; ``backend`` may be a spec
    string (``"mock:first-q"``, ``"http:<model>"``) or a backend object.

    Examples
    --------
    >>> from lamsum.synthetic import make_corpus
    >>> X = make_corpus(120, seed=1).texts()
    >>> est = ExtractiveSummarizer(k=5, s=20, m=3).fit(X)
    >>> len(est.summary_ids_)
    5
    """

    def __init__(
        self,
        k=50,
        s=100,
        q=None,
        m=3,
        mode="lamsum",
        voting_rule="pav_sequential",
        seed=0,
        backend="mock:first-q",
        epsilon=0.5,
        max_workers=1,
    ):
        self.k = k
        self.s = s
        self.q = q
        self.m = m
        self.mode = mode
        self.voting_rule = voting_rule
        self.seed = seed
        self.backend = backend
        self.epsilon = epsilon
        self.max_workers = max_workers

    def _config(self) -> PipelineConfig:
        k = check_positive_int(self.k, "k")
        return PipelineConfig(
            k=k,
            s=check_positive_int(self.s, "s"),
            q=None if self.q is None else check_positive_int(self.q, "q"),
            m=check_positive_int(self.m, "m"),
            mode=self.mode,
            voting_rule=self.voting_rule,
            seed=int(self.seed),
            backend=self.backend if isinstance(self.backend, str) else getattr(self.backend, "name", "custom"),
            calibration=CalibrationConfig(epsilon=self.epsilon),
            max_workers=check_positive_int(self.max_workers, "max_workers"),
        )

    def fit(self, X, y=None, categories=None):
        corpus = check_corpus(X, categories)
        config = self._config()
        if corpus.N < config.k:
            raise ValueError(f"X has {corpus.N} texts, fewer than k={config.k}")
        backend = None if isinstance(self.backend, str) else self.backend
        self.selection_ = summarize(corpus, config, backend)
        self.corpus_ = corpus
        self.summary_ids_ = np.asarray(self.selection_.unit_ids, dtype=int)
        self.n_levels_ = self.selection_.n_levels
        self.n_features_in_ = 1
        return self

    def _check_same(self, X):
        check_is_fitted(self, "selection_")
        if X is None:
            return self.corpus_
        corpus = check_corpus(X)
        if corpus.texts() != self.corpus_.texts():
            raise ValueError("X differs from the collection seen in fit; call fit on it first")
        return corpus

    def transform(self, X):
        corpus = self._check_same(X)
        return corpus.texts(self.summary_ids_)

    def predict(self, X=None):
        corpus = self._check_same(X)
        mask = np.zeros(corpus.N, dtype=int)
        mask[self.summary_ids_] = 1
        return mask

    def fit_predict(self, X, y=None, **fit_params):
        return self.fit(X, y, **fit_params).predict()

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y, **fit_params).transform(X)
