"""Synthetic data builders shared by the tests."""

import numpy as np

from maskedkrr import Dataset


def make_dataset(features, presence=None, labels=None):
    features = np.asarray(features, dtype=np.float64)
    if presence is None:
        presence = np.ones_like(features, dtype=bool)
    if labels is None:
        n = features.shape[0]
        labels = np.where(np.arange(n) % 2 == 0, 1, -1)
    return Dataset(features, presence, labels)


def two_class_gaussian(n, m, informative, gap, seed, noise=1.0):
    """Balanced two-class dataset: the first ``informative`` dimensions carry
    a +-gap/2 mean shift, the rest are pure noise."""
    rng = np.random.default_rng(seed)
    labels = np.where(rng.random(n) < 0.5, 1, -1)
    if np.unique(labels).size < 2:  # tiny n can draw one class only
        labels[0] = -labels[0]
    x = rng.normal(0.0, noise, size=(n, m))
    shift = np.zeros(m)
    shift[:informative] = gap / 2.0
    x += labels[:, None] * shift[None, :]
    return Dataset(x, np.ones((n, m), dtype=bool), labels)


def random_masked_pairs(n_pairs, m, seed, missing_rate=0.3):
    """Random (values, mask) pairs for kernel sweeps."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_pairs):
        va = rng.normal(size=m)
        vb = rng.normal(size=m)
        ma = rng.random(m) >= missing_rate
        mb = rng.random(m) >= missing_rate
        out.append((va, ma, vb, mb))
    return out
