pub mod expr;
pub mod grid;
pub mod projline;
pub mod riccati;
pub mod sl2;
pub mod transform;
pub mod solvers;
pub mod criteria;
pub mod cli;
