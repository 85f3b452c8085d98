//! Optimal incentive-compatible inspection schemes for principal-agent contracts.
//!
//! An agent picks an action with a cost and a success probability; the
//! principal pays `α` on success and may inspect a random set of actions,
//! withholding the payment when a deviation is caught. This crate computes
//!
//! * the optimal deterministic scheme for any monotone inspection cost ([`det`]),
//! * the optimal randomized scheme for submodular inspection costs ([`randomized`]),
//!
//! and checks both against brute-force LP oracles ([`oracle`]). [`hard`] holds
//! fixture instances, including an XOS family whose optimum is hidden behind a
//! rotation class.
//!
//! ```
//! use icx::{det::solve_deterministic, hard::intro_instance};
//!
//! let inst = intro_instance();
//! let sol = solve_deterministic(&inst).unwrap();
//! assert!((sol.best.utility - 0.55).abs() < 1e-12);
//! ```

pub mod costfn;
pub mod det;
pub mod error;
pub mod generate;
pub mod hard;
pub mod io;
pub mod model;
pub mod oracle;
pub mod par;
pub mod randomized;
pub mod report;
pub mod subset;

pub use costfn::{CostHandle, CostSpec, CountingOracle, SetFunction};
pub use error::{Error, Result};
pub use model::{Action, Instance, InspectionScheme, MarginalProfile};
pub use par::Execution;
pub use subset::Subset;
