//! LP and MILP solvers, the brute-force oracle and LP-format I/O.

pub mod engine;
pub mod lp;
pub mod simplex;
pub mod bnb;
pub mod brute;
pub mod lpfile;
pub mod polish;

pub use bnb::{relative_gap, solve, solve_with_start, Backend, Solution, SolveError, SolveOptions, SolveStatus};
pub use brute::{brute_force_solve, grid_oracle, BruteForceError, BruteForceSolution};
pub use polish::polish;
pub use lpfile::{read_lp, write_lp, LpFormatError};
