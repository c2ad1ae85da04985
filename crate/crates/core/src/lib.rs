pub mod cylinder;
pub mod diff;
pub mod elliptic;
pub mod fluid;
pub mod grid;
pub mod pipeline;
pub mod quadrature;
pub mod verify;
