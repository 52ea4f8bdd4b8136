//! Coded predilators and 2-preptykes: normal forms, trace orders, the
//! normalization `P*`, fixed points `D_P ≅ P(D_P)` and the Kleene–Brouwer
//! constructions built from a `Π¹₂` matrix.

pub mod codec;
pub mod elem;
pub mod error;
pub mod extend;
pub mod finord;
pub mod fix;
pub mod morph;
pub mod orders;
pub mod pi12;
pub mod predil;
pub mod ptyx;
pub mod segll;
pub mod star;
pub mod stream;

pub use elem::Elem;
pub use error::{Error, Result};
