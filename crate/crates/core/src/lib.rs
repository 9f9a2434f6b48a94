//! Compressed word problem solver for free products of free abelian groups.

pub mod abelian;
pub mod alphabet;
pub mod equality;
pub mod extensions;
pub mod group;
pub mod oracle;
pub mod pipeline;
pub mod slp;
pub mod text;
