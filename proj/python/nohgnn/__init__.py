"""Python access to the NO-HGNN dynamic link prediction core."""

from ._nohgnn import (  # noqa: F401
    Dataset,
    Error,
    FormatError,
    GradCheckReport,
    Metrics,
    NumericError,
    ParameterError,
    ParseError,
    ShapeError,
    TrainConfig,
    TrainResult,
    dct2_matrix,
    evaluate,
    facewise_product,
    gradcheck,
    ingest,
    load_dataset,
    m_product,
    matpower_sum,
    mode3_product,
    planted_partition,
    train,
    transform_matrices,
)

__all__ = [name for name in dir() if not name.startswith("_")]
