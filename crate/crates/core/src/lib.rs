//! Budget-constrained position auctions.
//!
//! Exact GSP, VCG and EGFP mechanics, liquid-welfare accounting, optimal
//! assignments, exact pure-equilibrium verification and enumeration, and
//! empirical liquid price of anarchy / stability.
//!
//! ```
//! use posauction::instances::{gen_theorem1, Theorem1Params};
//! use posauction::mechanisms::gsp_outcome;
//! use posauction::welfare::liquid_welfare;
//!
//! let p = Theorem1Params::new(100.0, 0.01).unwrap();
//! let inst = gen_theorem1(p).unwrap();
//! let out = gsp_outcome(&inst, &p.scalar_fixture());
//! assert!((liquid_welfare(&inst, &out.assignment) - 1.02).abs() < 1e-12);
//! ```

pub mod cli;
pub mod equilibrium;
pub mod error;
pub(crate) mod ext_real;
pub mod instances;
pub mod matching;
pub mod mechanisms;
pub mod model;
pub mod reproduce;
pub mod welfare;

pub use error::{Error, Result};
pub use mechanisms::{MechanismId, Outcome};
pub use model::{Assignment, BidProfile, Instance, MatrixBidProfile, ScalarBidProfile};
