pub mod bits;
pub mod dyadic;
pub mod hvm;
pub mod omega;
pub mod complexity;
pub mod toybit;
pub mod diagonal;
pub mod cli;
