//! Anyonic grading algebra: phase tables, anyonic permutations, the graded
//! tensor product and its chain embeddings.

mod embed;
mod table;
mod tensor;

pub use embed::{embed_aux_site, embed_local, graded_partial_trace, ChainLayout, ChainOperator};
pub use table::{GradingRecord, GradingTable};
pub use tensor::{
    anyonic_permutation, graded_tensor, graded_tensor_multi, string_transparency_check, string_transparency_check_tol, PermutationVariant,
    TransparencyReport,
};
