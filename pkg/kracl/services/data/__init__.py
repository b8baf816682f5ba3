from .dataset_service import (
    DEFAULT_INDEGREE_BOUNDS,
    DatasetService,
    augment_inverse,
    augmented_triples,
    band_labels,
    band_of,
    bucket_by_indegree,
    build_context_graph,
    categorize_relations,
    compute_stats,
    corrupt_add_noise,
    corrupt_remove,
    inverse_relation,
    known_objects_index,
    load_dataset,
    save_dataset,
)

__all__ = [
    "DEFAULT_INDEGREE_BOUNDS",
    "DatasetService",
    "augment_inverse",
    "augmented_triples",
    "band_labels",
    "band_of",
    "bucket_by_indegree",
    "build_context_graph",
    "categorize_relations",
    "compute_stats",
    "corrupt_add_noise",
    "corrupt_remove",
    "inverse_relation",
    "known_objects_index",
    "load_dataset",
    "save_dataset",
]
