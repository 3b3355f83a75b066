//! Executable models of computation and the translations between them.

mod asm;
pub mod equiv;
pub mod error;
pub mod formats;
mod gen;
pub mod lambda;
pub mod lambda_to_tm;
pub mod prf;
pub mod prf_to_lambda;
pub mod prf_to_tm;
pub mod tm;
pub mod tm_to_prf;
pub mod tm_transform;

pub use error::ValidationError;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/turing-machines.md")]
    pub struct TuringMachines;
    #[doc = include_str!("../../../book/src/machine-variants.md")]
    pub struct MachineVariants;
    #[doc = include_str!("../../../book/src/recursive-functions.md")]
    pub struct RecursiveFunctions;
    #[doc = include_str!("../../../book/src/lambda-calculus.md")]
    pub struct LambdaCalculus;
    #[doc = include_str!("../../../book/src/translations.md")]
    pub struct Translations;
    #[doc = include_str!("../../../book/src/file-formats.md")]
    pub struct FileFormats;
    #[doc = include_str!("../../../book/src/equivalence.md")]
    pub struct Equivalence;
}
