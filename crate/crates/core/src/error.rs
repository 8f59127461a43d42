use thiserror::Error;

/// Errors raised by the solvers, evaluators and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters violate the model's standing assumptions (e.g. `c >= ubar`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A subset lattice that would be too large to enumerate.
    #[error("size error: {boxes} boxes exceeds the limit of {limit}")]
    Size { boxes: usize, limit: usize },

    /// An inner numerical routine did not reach its tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Requested episode count does not fit the per-episode substream space.
    #[error("seed error: {episodes} episodes exceeds the substream space of {limit}")]
    Seed { episodes: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
