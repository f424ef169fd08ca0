pub mod arith;
pub mod bigfloat;
pub mod cyclotomic;
pub mod error;
pub mod poly;
pub mod hoffman;
pub mod qseries;
pub mod finite;
pub mod numeric;
pub mod linalg;
pub mod relations;
pub mod cli;
