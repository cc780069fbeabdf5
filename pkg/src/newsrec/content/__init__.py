"""Article content encoders producing unit-norm embeddings."""

from .doc2vec import Doc2vecModel, doc2vec_fit, doc2vec_infer
from .encoders import ENCODERS, EmbeddingStore, encode_corpus, tokenized_corpus
from .lsa import LsaModel, lsa_encode, lsa_encode_matrix, lsa_fit, randomized_truncated_svd
from .text import prepare_text, split_sentences, tokenize
from .tfidf import TfidfModel, tfidf_fit, tfidf_matrix, tfidf_transform
from .wordvecs import WordEmbeddingTable, load_word_vectors, w2v_tfidf_encode

__all__ = [
    "Doc2vecModel",
    "doc2vec_fit",
    "doc2vec_infer",
    "ENCODERS",
    "EmbeddingStore",
    "encode_corpus",
    "tokenized_corpus",
    "LsaModel",
    "lsa_encode",
    "lsa_encode_matrix",
    "lsa_fit",
    "randomized_truncated_svd",
    "prepare_text",
    "split_sentences",
    "tokenize",
    "TfidfModel",
    "tfidf_fit",
    "tfidf_matrix",
    "tfidf_transform",
    "WordEmbeddingTable",
    "load_word_vectors",
    "w2v_tfidf_encode",
]
