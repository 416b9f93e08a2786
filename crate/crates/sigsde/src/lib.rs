//! Parameter estimation for signature-linear SDEs via expected-signature
//! moment matching.
//!
//! The pipeline: simulate lifted trajectories of a model whose drift and
//! diffusion are linear in the truncated signature of the solution, build
//! polynomial moment equations in the unknown parameters from a Picard-type
//! coefficient recursion, and solve the resulting square system by Newton
//! iteration from many starts.

pub mod config;
pub mod driving;
pub mod estimator;
pub mod exec;
pub mod model;
pub mod path;
pub mod picard;
pub mod poly;
pub mod tensor;
pub mod word;
