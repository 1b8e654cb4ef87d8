"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` so the CLI can map it to an exit status.
"""


class GhicastError(Exception):
    code = "error"
    exit_code = 1


class ConfigError(GhicastError):
    code = "config_error"
    exit_code = 2


class MissingArtifact(GhicastError):
    code = "missing_artifact"
    exit_code = 3


class DataError(GhicastError):
    """Problems with input records or files."""

    code = "data_error"
    exit_code = 4


class MalformedHeader(DataError):
    code = "malformed_header"


class UnparseableRow(DataError):
    code = "unparseable_row"

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EmptyFile(DataError):
    code = "empty_file"


class NoForecastData(DataError):
    code = "no_forecast_data"


class EmptySplit(DataError):
    code = "empty_split"


class ParameterOutOfRange(DataError):
    code = "parameter_out_of_range"


class NegativeInput(DataError):
    code = "negative_input"


class EfficiencyAboveOne(DataError):
    code = "efficiency_above_one"


class InvalidTimestamp(DataError):
    code = "invalid_timestamp"


class GraphError(GhicastError):
    code = "graph_error"
    exit_code = 5


class DuplicateCoordinates(GraphError):
    code = "duplicate_coordinates"


class DisconnectedAfterPrune(GraphError):
    code = "disconnected_after_prune"


class DisconnectedGraph(GraphError):
    code = "disconnected_graph"


class EmbeddingError(GhicastError):
    code = "embedding_error"
    exit_code = 6


class EmptyWeights(EmbeddingError):
    code = "empty_weights"


class NonPositiveWeight(EmbeddingError):
    code = "non_positive_weight"


class EmptyWalks(EmbeddingError):
    code = "empty_walks"


class NodeIdOutOfRange(EmbeddingError):
    code = "node_id_out_of_range"


class UnknownLocation(EmbeddingError):
    code = "unknown_location"


class MissingEmbedding(EmbeddingError):
    code = "missing_embedding"


class ModelError(GhicastError):
    code = "model_error"
    exit_code = 7


class SchemaMismatch(ModelError):
    code = "schema_mismatch"


class EmptyTrainingSet(ModelError):
    code = "empty_training_set"


class SingularSystem(ModelError):
    code = "singular_system"


class UnfittedModel(ModelError):
    code = "unfitted_model"


class UnsupportedFormat(ModelError):
    code = "unsupported_format"


class MetricError(GhicastError):
    code = "metric_error"
    exit_code = 8


class LengthMismatch(MetricError):
    code = "length_mismatch"


class ConstantTruth(MetricError):
    code = "constant_truth"


class ConfigInvalid(ConfigError):
    code = "config_invalid"
