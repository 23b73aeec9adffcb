"""Pre-trained word embedding store: file I/O, vector arithmetic, top-K search.

Two on-disk formats are supported.  Text: an optional "<count> <dim>"
header line, then one "term c1 ... cD" line per word.  Binary: the
word2vec convention of an ASCII header followed by records of
space-terminated term bytes plus D little-endian float32 values, with
an optional newline between records.  Vectors are held as float64
internally; binary values survive a load/save cycle bit for bit
because every float32 is exactly representable in float64.
"""

from typing import NamedTuple

import numpy as np

from ._kernels import cosine_scores
from .errors import FormatError


class SimilarTerm(NamedTuple):
    term: str
    score: float


class EmbeddingStore:
    """Immutable term -> vector map with a fixed dimension."""

    __slots__ = ("_terms", "_index", "_matrix", "_norms", "_lex_rank")

    def __init__(self, terms, matrix):
        terms = tuple(terms)
        matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(terms):
            raise ValueError("matrix shape does not match term count")
        if matrix.shape[1] < 1:
            raise ValueError("dimension must be positive")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("vectors must be finite")
        index = {}
        for i, term in enumerate(terms):
            if not term:
                raise ValueError("empty term")
            if term in index:
                raise ValueError("duplicate term %r" % term)
            index[term] = i
        self._terms = terms
        self._index = index
        matrix.setflags(write=False)
        self._matrix = matrix
        self._norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
        # rank of each row in lexicographic term order, so a stable sort
        # on (-score, rank) reproduces the documented tie-break
        rank = np.empty(len(terms), dtype=np.int64)
        rank[sorted(range(len(terms)), key=terms.__getitem__)] = np.arange(
            len(terms))
        self._lex_rank = rank

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        if not pairs:
            raise ValueError("cannot build a store from zero terms")
        terms = [t for t, _ in pairs]
        matrix = np.array([np.asarray(v, dtype=np.float64) for _, v in pairs])
        return cls(terms, matrix)

    @property
    def dimension(self):
        return self._matrix.shape[1]

    @property
    def terms(self):
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __contains__(self, term):
        return term in self._index

    def vector_of(self, term):
        """Stored vector for `term`, or None when absent."""
        i = self._index.get(term)
        if i is None:
            return None
        return self._matrix[i]


def cosine(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError("cosine requires two vectors of equal length")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def vec_combine(weighted, dimension=None):
    """Sum of weight * vector over (vector, weight) pairs.

    An empty input needs an explicit dimension to size the zero vector.
    """
    acc = None
    for vec, weight in weighted:
        v = np.asarray(vec, dtype=np.float64)
        if acc is None:
            if v.ndim != 1:
                raise ValueError("vec_combine requires rank-1 vectors")
            if dimension is not None and v.shape[0] != dimension:
                raise ValueError("vector length %d != dimension %d"
                                 % (v.shape[0], dimension))
            acc = np.zeros(v.shape[0], dtype=np.float64)
        elif v.shape != acc.shape:
            raise ValueError("vec_combine requires equal-length vectors")
        acc += float(weight) * v
    if acc is None:
        if dimension is None:
            raise ValueError("empty combine needs an explicit dimension")
        return np.zeros(dimension, dtype=np.float64)
    return acc


def vec_sub(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError("vec_sub requires two vectors of equal length")
    return a - b


def similar_k(store, query, k, exclude=()):
    """The k store terms most cosine-similar to `query`.

    Ordered by score descending, then term ascending.  A zero query has
    no direction, so the result is empty by definition.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1 or query.shape[0] != store.dimension:
        raise ValueError("query length %r != store dimension %d"
                         % (query.shape, store.dimension))
    if not np.all(np.isfinite(query)):
        raise ValueError("query must be finite")
    if np.linalg.norm(query) == 0.0 or len(store) == 0:
        return []
    scores = cosine_scores(store._matrix, store._norms, query)
    order = np.lexsort((store._lex_rank, -scores))
    exclude = set(exclude)
    out = []
    for i in order:
        term = store._terms[i]
        if term in exclude:
            continue
        out.append(SimilarTerm(term, float(scores[i])))
        if len(out) == k:
            break
    return out


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def load_embeddings(path, format="text"):
    if format == "text":
        return _load_text(path)
    if format == "binary":
        return _load_binary(path)
    raise ValueError("unknown embedding format %r" % format)


def save_embeddings(store, path, format="text"):
    if format == "text":
        _save_text(store, path)
    elif format == "binary":
        _save_binary(store, path)
    else:
        raise ValueError("unknown embedding format %r" % format)


def _parse_vector(parts, dim, term, path, lineno):
    if len(parts) != dim:
        raise FormatError(
            "term %r has %d components, expected %d" % (term, len(parts), dim),
            path=path, line=lineno)
    try:
        vec = np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError:
        raise FormatError("unparseable number for term %r" % term,
                          path=path, line=lineno) from None
    if not np.all(np.isfinite(vec)):
        raise FormatError("non-finite component for term %r" % term,
                          path=path, line=lineno)
    return vec


def _load_text(path):
    terms = []
    vectors = []
    seen = set()
    declared = None
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    declared = (int(parts[0]), int(parts[1]))
                except ValueError:
                    declared = None
                if declared is not None:
                    if declared[0] < 1 or declared[1] < 1:
                        raise FormatError(
                            "header counts must be positive", path=path, line=1)
                    dim = declared[1]
                    continue
            term = parts[0]
            if dim is None:
                dim = len(parts) - 1
                if dim < 1:
                    raise FormatError("cannot infer dimension", path=path,
                                      line=lineno)
            if term in seen:
                raise FormatError("duplicate term %r" % term, path=path,
                                  line=lineno)
            seen.add(term)
            terms.append(term)
            vectors.append(_parse_vector(parts[1:], dim, term, path, lineno))
    if not terms:
        raise FormatError("no vectors in file", path=path)
    if declared is not None and declared[0] != len(terms):
        raise FormatError("header declares %d terms, file holds %d"
                          % (declared[0], len(terms)), path=path)
    return EmbeddingStore(terms, np.array(vectors))


def _save_text(store, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%d %d\n" % (len(store), store.dimension))
        for i, term in enumerate(store.terms):
            row = store._matrix[i]
            fh.write(term)
            for x in row:
                fh.write(" %r" % float(x))
            fh.write("\n")


def _load_binary(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    nl = blob.find(b"\n")
    if nl < 0:
        raise FormatError("missing header", path=path)
    header = blob[:nl].split()
    if len(header) != 2:
        raise FormatError("malformed header", path=path, line=1)
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError("malformed header", path=path, line=1) from None
    if count < 1 or dim < 1:
        raise FormatError("header counts must be positive", path=path, line=1)
    pos = nl + 1
    record = 4 * dim
    terms = []
    vectors = []
    seen = set()
    for _ in range(count):
        space = blob.find(b" ", pos)
        if space < 0:
            raise FormatError("truncated record", path=path, offset=pos)
        term = blob[pos:space].decode("utf-8").lstrip("\n")
        if not term:
            raise FormatError("empty term", path=path, offset=pos)
        if term in seen:
            raise FormatError("duplicate term %r" % term, path=path,
                              offset=pos)
        seen.add(term)
        pos = space + 1
        if pos + record > len(blob):
            raise FormatError("truncated vector for term %r" % term,
                              path=path, offset=pos)
        vec = np.frombuffer(blob[pos:pos + record], dtype="<f4")
        if not np.all(np.isfinite(vec)):
            raise FormatError("non-finite component for term %r" % term,
                              path=path, offset=pos)
        vectors.append(vec.astype(np.float64))
        terms.append(term)
        pos += record
        if pos < len(blob) and blob[pos:pos + 1] == b"\n":
            pos += 1
    if pos != len(blob):
        raise FormatError("trailing data after %d records" % count,
                          path=path, offset=pos)
    return EmbeddingStore(terms, np.array(vectors))


def _save_binary(store, path):
    with open(path, "wb") as fh:
        fh.write(b"%d %d\n" % (len(store), store.dimension))
        for i, term in enumerate(store.terms):
            fh.write(term.encode("utf-8"))
            fh.write(b" ")
            fh.write(store._matrix[i].astype("<f4").tobytes())
            fh.write(b"\n")
