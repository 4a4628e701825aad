"""Exception types shared across the package."""


class RankpipeError(Exception):
    """Base class for all package errors."""


class MalformedInput(RankpipeError):
    """Raw document has no extractable paragraph content."""


class UnsupportedLanguage(RankpipeError):
    """No normalizer or stopword list registered for the language."""


class EmptyCorpus(RankpipeError):
    """Operation requires at least one document."""


class CorruptStore(RankpipeError):
    """Corpus store or index file failed integrity checks."""


class UnknownDocument(RankpipeError):
    """doc_id not present in the index."""


class EmptyQuery(RankpipeError):
    """No query tokens survive normalization."""


class MissingExpansions(RankpipeError):
    """Topic has no precomputed query expansions."""


class MissingTranslation(RankpipeError):
    """Topic has no stored translation for the target language."""


class EmptyBatch(RankpipeError):
    """Provider called with an empty text batch."""


class DimensionMismatch(RankpipeError):
    """Vector dimensions disagree with the provider contract."""


class ZeroVector(RankpipeError):
    """Cosine similarity is undefined for an all-zero vector."""


class ProviderUnavailable(RankpipeError):
    """Remote scoring service unreachable or returned an error."""


class CacheCorrupt(RankpipeError):
    """Cache entry failed its checksum."""


class EmptyScores(RankpipeError):
    """Aggregation requires at least one sentence score."""


class NonFiniteScore(RankpipeError):
    """Score list contains NaN or infinity."""


class MissingStageScore(RankpipeError):
    """Document absent from an upstream stage's ranked list."""


class DocSetMismatch(RankpipeError):
    """Rank-based fusion requires identical document sets."""


class InvariantViolation(RankpipeError):
    """A domain-type invariant was violated."""


class EmptyGrid(RankpipeError):
    """Grid search requires at least one candidate."""


class NoQrels(RankpipeError):
    """Grid search requires relevance judgments."""


class DegenerateDifferences(RankpipeError):
    """Paired t-test on all-zero differences."""


class MalformedRow(RankpipeError):
    """Run or qrels file row does not match the expected format."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class DuplicateDoc(RankpipeError):
    """(query, doc) pair appears more than once in a run file."""
