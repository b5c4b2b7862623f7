pub mod scalar;
pub mod linalg;
pub mod graph;
pub mod tl;
pub mod gpa;
pub mod atl;
pub mod haagerup;
