//! Deployment without retraining: serialize a trained model into a
//! self-contained versioned artifact ("edge"/file target) or serve it over
//! HTTP ("api" target).

mod artifact;
mod server;

pub use artifact::{
    artifact_from_model, load_artifact, save_artifact, ModelArtifact, ARTIFACT_FORMAT_VERSION,
};
pub use server::{serve_artifact, serve_model, ServerHandle};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeployError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("format error at byte {offset}: {message}")]
    Format { message: String, offset: usize },
    #[error("serve error: {0}")]
    Serve(String),
}
