from .assemble import FEATURE_GROUPS, SentenceFeaturizer, assemble_features, check_schema
from .embeddings import EmbeddingTable, cosine, load_word_vectors, sentence_embedding
from .extractors import (
    FeatureVector,
    char_features,
    count_syllables,
    emotion_features,
    layout_features,
    loaded_word_features,
    multi_meaning_features,
    pos_ner_features,
    readability_features,
    readability_scores,
    sentiment_features,
)
from .lexicons import EMOTIONS, Lexicons, load_lexicons
from .tagging import fallback_tag, load_annotations, tag_documents

__all__ = [
    "EMOTIONS", "FEATURE_GROUPS", "EmbeddingTable", "FeatureVector", "Lexicons",
    "SentenceFeaturizer", "assemble_features", "char_features", "check_schema", "cosine",
    "count_syllables", "emotion_features", "fallback_tag", "layout_features",
    "load_annotations", "load_lexicons", "load_word_vectors", "loaded_word_features",
    "multi_meaning_features", "pos_ner_features", "readability_features", "readability_scores",
    "sentence_embedding", "sentiment_features", "tag_documents",
]
