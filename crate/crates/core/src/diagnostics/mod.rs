//! Component-level diagnostics over exported feature matrices: token
//! decoding through the embedding matrix, linear probes, alignment gaps and
//! cluster separation.

mod alignment;
mod decode;
mod matrix;
mod probe;

pub use alignment::{
    alignment_gap, cluster_stats, principal_projection, write_projection_csv, AlignmentGap,
    ClusterStats,
};
pub use decode::{decode_feature, softmax, token_logits, DecodedToken, DEFAULT_TOP_K};
pub use matrix::{
    check_vocab, parse_vocab, read_sidecar, read_vmat, read_vmat_checked, read_vocab,
    write_sidecar, write_vmat, Matrix, MatrixError, Sidecar, CAPTURE_POINTS, VMAT_MAGIC,
};
pub use probe::{
    encode_labels, loss_and_gradient, probe_accuracy, train_linear_probe, Params, Probe,
    ProbeConfig,
};

#[derive(Debug, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite {0}")]
    NonFinite(String),
    #[error("zero-norm {0}")]
    ZeroRow(String),
    #[error("need at least two classes")]
    SingleClass,
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}
