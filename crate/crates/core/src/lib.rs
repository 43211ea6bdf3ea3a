//! Block-wise LFSR hypervectors over GF(2): exact, reversible role-filler
//! binding, block-vote cleanup, an individuals/kinds store, real-valued
//! baselines and an experiment harness.

pub mod algebra;
pub mod baselines;
pub mod cleanup;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod hypervector;
pub mod store;

pub use algebra::{bind, bundle, intervene, unbind, unbind_from_bundle, Bundle, RoleFillerPair};
pub use baselines::{Hrr, RealVector, Scalar, TensorRep};
pub use cleanup::{CleanupMemory, Cr2Trace, ReadoutResult};
pub use error::{Error, Result};
pub use gf2::{BlockState, Gf2Poly, Lfsr};
pub use harness::{Tolerances, TrialReport};
pub use hypervector::{BlockPolynomialConfig, EaAllocator, Hypervector};
pub use store::{KnowledgeStore, QueryOutcome};

pub type HrrVector = RealVector<f64>;
pub type HrrVectorF32 = RealVector<f32>;
pub type HrrEngine = Hrr<f64>;
pub type Tensor = TensorRep<f64>;
