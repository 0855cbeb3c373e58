pub mod error;
pub mod game;
pub mod real;
pub mod lipfun;
pub mod nets;
pub mod perturb;
pub mod probe;
pub mod space;

pub use error::{Error, Result};
pub use real::Real;
pub use lipfun::{LipFun, Patch};
pub use nets::{NetFamily, TargetSet};
pub use space::{Domain, LinearMap, NormKind, Vector};
pub use game::{Adversary, GameSetup, GameTranscript};
