"""Discovering and ranking potential artistic influences between artists.

Pipelines over precomputed painting feature vectors: painting similarity
(Euclidean and manifold-geodesic), q-percentile set distances between
artists, a temporally-constrained influenced-by graph with top-k retrieval
and recall evaluation, a low-dimensional map of artists, and a comparative
style-classification study (RBF kernel classifier and per-style topic
models over BoW or semantic features).
"""

from .bow import BowHistogram, Codebook, kmeans_codebook, quantize
from .crossval import ConfusionMatrix, cross_validate, stratified_folds
from .distances import (
    NeighborGraph,
    PaintingDistanceMatrix,
    build_knn_graph,
    euclidean_all_pairs,
    geodesic_all_pairs,
    manifold_all_pairs,
)
from .embedding import ArtistEmbedding, classical_mds, finitize_symmetrize, graph_geodesics, map_of_artists
from .influence import (
    InfluenceGraph,
    RecallResult,
    RecallTable,
    TopKTable,
    artist_distance_q,
    build_influence_graph,
    hausdorff_distance,
    hausdorff_matrix,
    point_set_distance,
    recall_at_k,
    recall_table,
    top_k_influences,
    top_k_table,
)
from .io import load_dataset, load_descriptors, load_ground_truth, load_artifact, persist
from .lda import LdaClassifierSpec, TopicModel, lda_classify, lda_fit, lda_score
from .model import (
    ArtistRecord,
    Dataset,
    GroundTruthInfluences,
    PaintingRecord,
    Violation,
    validate_dataset,
)
from .svm import (
    GridSearchResult,
    KernelClassifierModel,
    KernelClassifierSpec,
    grid_search,
    predict,
    scale_fit_apply,
    train_kernel_classifier,
)

__version__ = "0.1.0"
