"""Text-audio retrieval benchmarks: construction, conversion, and scoring."""

from .builder import (
    BenchmarkSpec,
    DropRecord,
    McqBenchmark,
    MCQItem,
    McqKind,
    RetrievalBenchmark,
    Task,
    attach_llm_texts,
    build_inter_mcq,
    build_intra_mcq,
    build_retrieval_benchmark,
    load_benchmark,
    save_benchmark,
)
from .corpus import (
    DEFAULT_SILENCE_THRESHOLD,
    AudioTrack,
    Corpus,
    CorpusStats,
    Description,
    ManifestFormat,
    McqPair,
    MediaClip,
    TextKind,
    corpus_stats,
    detect_silence,
    load_manifest,
    save_corpus,
)
from .embeddings import (
    EmbeddingSet,
    Modality,
    SimilarityMatrix,
    cosine_similarity,
    fuse,
    load_embeddings,
    save_embeddings,
)
from .errors import (
    AudiobenchError,
    DataError,
    DecodeError,
    DegenerateInputError,
    FormatError,
    IntegrityError,
    ManifestParseError,
    ParseError,
    TransportError,
)
from .metrics import (
    Direction,
    McqReport,
    MetricReport,
    evaluate_mcq,
    evaluate_retrieval,
    mean_average_precision,
    ndcg,
    random_baseline,
    random_mcq_baseline,
    random_retrieval_baseline,
    render_table,
    retrieval_at_k,
)
from .relevance import (
    Grade,
    MatrixKind,
    ParsedCaption,
    RelevanceMatrix,
    RelevancyGrade,
    build_caption_matrix,
    build_class_matrix,
    caption_relevance,
    parse_caption,
    split_by_grade,
)

__version__ = "0.1.0"

__all__ = [
    "AudiobenchError",
    "AudioTrack",
    "BenchmarkSpec",
    "Corpus",
    "CorpusStats",
    "DataError",
    "DecodeError",
    "DEFAULT_SILENCE_THRESHOLD",
    "DegenerateInputError",
    "Description",
    "Direction",
    "DropRecord",
    "EmbeddingSet",
    "FormatError",
    "Grade",
    "IntegrityError",
    "ManifestFormat",
    "ManifestParseError",
    "MatrixKind",
    "McqBenchmark",
    "MCQItem",
    "McqKind",
    "McqPair",
    "McqReport",
    "MediaClip",
    "MetricReport",
    "Modality",
    "ParseError",
    "ParsedCaption",
    "RelevanceMatrix",
    "RelevancyGrade",
    "RetrievalBenchmark",
    "SimilarityMatrix",
    "Task",
    "TextKind",
    "TransportError",
    "attach_llm_texts",
    "build_caption_matrix",
    "build_class_matrix",
    "build_inter_mcq",
    "build_intra_mcq",
    "build_retrieval_benchmark",
    "caption_relevance",
    "corpus_stats",
    "cosine_similarity",
    "detect_silence",
    "evaluate_mcq",
    "evaluate_retrieval",
    "fuse",
    "load_benchmark",
    "load_embeddings",
    "load_manifest",
    "mean_average_precision",
    "ndcg",
    "parse_caption",
    "random_baseline",
    "random_mcq_baseline",
    "random_retrieval_baseline",
    "render_table",
    "retrieval_at_k",
    "save_benchmark",
    "save_corpus",
    "save_embeddings",
    "split_by_grade",
]
