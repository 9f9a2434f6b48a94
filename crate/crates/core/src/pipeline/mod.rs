//! Normal forms of compressed words: component roots, conversions of
//! programs with cuts and tethers, the normal-form program builder and
//! the compressed word problem solver.

use num_bigint::BigUint;
use thiserror::Error;

use crate::extensions::ExtError;
use crate::group::GroupError;
use crate::slp::{SlpError, VarId};

mod build;
mod convert;
mod roots;
pub mod store;
#[cfg(test)]
pub(crate) mod testutil;

pub use build::{
    abelian_image, bounded_difference_search, build_nf_tcslp, build_nf_tcslp_geodesic, nf_from_quasigeodesic,
    nf_short_hat, nf_slp, short_hat_constant, solve_cwp, solve_cwp_with, syllables_slp, CwpReport,
};
pub use convert::{append_bounded_suffix, compressed_cut_normalize, convert, tcslp_to_tslp, tslp_to_slp};
pub use roots::{
    compressed_index_convert, ensure_component_roots, raw_index_convert, split_check, RootIndex, SplitClass,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Slp(#[from] SlpError),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error("program alphabet differs from the group alphabet")]
    AlphabetMismatch,
    #[error("a component has the zero vector; the derived word is not freely reduced")]
    NotFreelyReduced,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("position {0} is not a component boundary")]
    NotComponentAligned(BigUint),
    #[error("component range [{start}:{end}) out of range for {hat} components")]
    ComponentRange { start: BigUint, end: BigUint, hat: BigUint },
    #[error("no witness of length at most {radius} found at {var}: {detail}")]
    NoWitness { var: VarId, radius: usize, detail: String },
}
