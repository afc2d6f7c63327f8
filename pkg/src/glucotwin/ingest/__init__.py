from .cgm import (
    CgmRecord,
    CgmSeries,
    CgmSummary,
    ParseStats,
    export_cgm_csv,
    impute_gaps,
    parse_cgm_csv,
    parse_cgm_xml,
    resample,
    summarize,
)
from .fixtures import CorpusManifest, generate_corpus
from .tabular import (
    TabularDataset,
    derive_risk_labels,
    load_benchmark,
    load_tabular,
    median_split_threshold,
    tabular_to_csv,
)

__all__ = [
    "CgmRecord",
    "CgmSeries",
    "CgmSummary",
    "ParseStats",
    "CorpusManifest",
    "TabularDataset",
    "derive_risk_labels",
    "export_cgm_csv",
    "generate_corpus",
    "impute_gaps",
    "load_benchmark",
    "load_tabular",
    "median_split_threshold",
    "parse_cgm_csv",
    "parse_cgm_xml",
    "resample",
    "summarize",
    "tabular_to_csv",
]
