"""Row grouping and the train/validation split for the rankers.

Rows are kept in a canonical order (topic ascending, venue ascending
inside a topic) so that a stable descending sort on scores yields the
same tie handling as the run builder: score descending, venue id
ascending.
"""

import numpy as np

from ..errors import VenuerecError
from ..features import feature_matrix

METRICS = ("p5", "mrr")


def rows_by_topic(rows):
    """Group feature rows into ``{topic_id: [row, ...]}`` in canonical order."""
    seen = set()
    for row in rows:
        key = (row.topic_id, row.venue_id)
        if key in seen:
            raise VenuerecError("duplicate row for topic %s venue %s" % key)
        seen.add(key)
    grouped = {}
    for row in sorted(rows, key=lambda r: (r.topic_id, r.venue_id)):
        grouped.setdefault(row.topic_id, []).append(row)
    return grouped


def split_train_validation(rows, fraction=0.67, seed=0):
    """Partition rows into train and validation sets at topic granularity.

    The topic list is shuffled with a generator seeded by `seed`; the
    first ``round(fraction * n)`` topics (clamped so both sides stay
    non-empty) become the training side.  Row order is preserved.
    """
    if not 0.0 < fraction < 1.0:
        raise VenuerecError("split fraction must be in (0, 1), got %r"
                            % (fraction,))
    topics = sorted({row.topic_id for row in rows})
    if len(topics) < 2:
        raise VenuerecError("need at least 2 topics to split, got %d"
                            % len(topics))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(topics))
    n_train = int(round(fraction * len(topics)))
    n_train = min(max(n_train, 1), len(topics) - 1)
    train_topics = {topics[i] for i in perm[:n_train]}
    train = [row for row in rows if row.topic_id in train_topics]
    valid = [row for row in rows if row.topic_id not in train_topics]
    return train, valid


class TopicBlocks:
    """Canonically ordered feature matrix with per-topic slices.

    Built once per training set; `metric` then scores any candidate
    weight assignment from a score vector aligned with `X`.  Topics
    without a single relevant row are left out of the average, matching
    the run evaluator.
    """

    def __init__(self, rows, cutoff=1):
        grouped = rows_by_topic(rows)
        ordered = [row for topic in sorted(grouped) for row in grouped[topic]]
        self.rows = tuple(ordered)
        self.topic_ids = tuple(sorted(grouped))
        if ordered:
            self.X, self.y = feature_matrix(ordered)
        else:
            self.X = np.zeros((0, 0))
            self.y = np.zeros(0)
        self.rel = self.y >= cutoff
        bounds = []
        start = 0
        for topic in self.topic_ids:
            stop = start + len(grouped[topic])
            bounds.append((start, stop))
            start = stop
        self.bounds = tuple(bounds)
        self.included = tuple(
            i for i, (lo, hi) in enumerate(self.bounds)
            if self.rel[lo:hi].any())

    def __len__(self):
        return len(self.rows)

    def metric(self, scores, metric="p5", k=5):
        """Mean P@k or MRR of `scores` over topics with relevant rows."""
        if metric not in METRICS:
            raise VenuerecError("unknown metric %r" % (metric,))
        if not self.included:
            return 0.0
        total = 0.0
        for i in self.included:
            lo, hi = self.bounds[i]
            order = np.argsort(-scores[lo:hi], kind="stable")
            rel = self.rel[lo:hi][order]
            if metric == "p5":
                total += float(rel[:k].sum()) / k
            else:
                hits = np.nonzero(rel)[0]
                total += 1.0 / (hits[0] + 1.0)
        return total / len(self.included)
