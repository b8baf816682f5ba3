from .export_service import EmbeddingTable, export_embeddings, parse_embeddings, write_embeddings

__all__ = ["EmbeddingTable", "export_embeddings", "parse_embeddings", "write_embeddings"]
