//! Minimax-regret search policies for the Pandora's box problem.
//!
//! A decision maker (DM) may pay a cost `c` to open each of `n` boxes, keeping
//! the best reward found or an outside option worth zero. The DM does not know
//! the reward distribution and minimizes the worst-case expected *ex-post
//! regret* against an adversarial Nature. Every regime below is solved in
//! closed form (or with a short one-dimensional search) and checked against an
//! independent numerical oracle:
//!
//! | module        | regime                                                    |
//! |---------------|-----------------------------------------------------------|
//! | [`model`]     | shared types and exact regret evaluators                  |
//! | [`indep`]     | i.i.d. binary rewards, search-count profiles, EU benchmark |
//! | [`corr`]      | arbitrarily correlated binary rewards                     |
//! | [`het`]       | heterogeneous rewards and costs                           |
//! | [`interim`]   | interim regret                                            |
//! | [`two_box`]   | two boxes with rewards on `[0, ubar]`                     |
//! | [`verify`]    | saddle-point verification by grids and enumeration        |
//! | [`sim`]       | deterministic Monte-Carlo simulation                      |
//! | [`cli`]       | command-line front end and CSV/JSON emission              |
//!
//! The runnable programs under `examples/` walk through each capability.
//!
//! ```
//! use robust_pandora::{indep, HomogeneousSpec};
//!
//! let spec = HomogeneousSpec::new(1.0, 0.3, 3).unwrap();
//! let sol = indep::solve_indep(&spec);
//! assert!((sol.regret.get() - 0.4599).abs() < 1e-12);
//! ```

pub mod cli;
pub mod corr;
pub mod error;
pub mod het;
pub mod indep;
pub mod interim;
pub mod model;
mod optim;
pub mod sim;
pub mod two_box;
pub mod verify;

pub use error::{Error, Result};
pub use model::{CountProfile, HomogeneousSpec, NatureBelief, RegretValue, StationaryPolicy, StoppingMixture};
