//! Evidential occupancy grid maps.
//!
//! Cells carry Dempster-Shafer belief masses over free, statically occupied
//! and dynamically occupied space. The crate covers the mass algebra, label
//! generation from a small lidar simulator and from annotated samples, a
//! geometric inverse sensor model as a baseline, cell-level evaluation, and
//! the binary file formats and command line around them.
//!
//! ```
//! use evidential_ogm::evidence::{combine_dempster, BeliefMass, Hypothesis};
//!
//! let a = BeliefMass::simple(Hypothesis::Free, 0.1).unwrap();
//! let m = combine_dempster(&a, &a).unwrap();
//! assert!((m.free() - 0.19).abs() < 1e-12);
//! ```

pub mod annotation;
pub mod cli;
pub mod cloud;
pub mod eval;
pub mod evidence;
pub mod footprint;
pub mod grid;
pub mod io;
pub mod ism;
pub mod sim;
pub mod traversal;
