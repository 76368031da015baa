pub mod error;
pub mod graded;
pub mod linalg;
pub mod integrability;
pub mod chain;
pub mod bethe;
