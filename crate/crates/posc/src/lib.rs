//! Grid-discretized p-oscillation energies.
//!
//! The crate evaluates and minimizes the windowed-oscillation energy
//! `E_{r,p}(u, Ω) = h^dim Σ_{x∈Ω} (osc of u over the radius-r ball at x)^p`
//! on regular 1-D and 2-D lattices, together with the machinery the energy
//! drags along:
//!
//! - [`grid`]: lattices, cell regions, and ball-based morphology
//!   (dilation, erosion, collars);
//! - [`field`]: real-valued fields on a region;
//! - [`oscillation`]: window sup/inf engines and the energy itself;
//! - [`perimeter`]: the nonlocal Minkowski perimeter `Per_r`, level sets,
//!   the exact discrete coarea identity, and the small-r comparison with
//!   discrete total variation;
//! - [`solver`]: Dirichlet problems solved by projected subgradient descent,
//!   a brute-force oracle for tiny instances, and perturbation audits;
//! - [`rigidity`]: one-dimensional structure checks (monotonicity,
//!   `Cx + 2r-periodic` decomposition, second-difference residuals);
//! - [`io`]: CSV / PGM / JSON formats shared with the command line tool.

pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod oscillation;
pub mod perimeter;
pub mod rigidity;
pub mod solver;

pub use error::{Error, Result};
