//! Generation and verification of surfaces built from two holomorphic functions `f` and
//! `g`: `g` is the stereographic image of the Gauss map and `exp(Re f)` the support
//! function. The generated surfaces satisfy `2ψH + (Λ + ψ²)K = 0` with `ψ = ⟨X, N⟩` and
//! `Λ = ⟨X, X⟩`.

pub mod domain;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod mesh;
pub mod oracle;
pub mod presets;
pub mod rotational;
pub mod surface;
pub mod verify;

pub use domain::{DomainError, DomainKind, DomainSpec};
pub use expr::{parse, EvalError, HoloExpr, ParseError};
pub use geometry::{GeometryError, PointJets, Prefactor, SurfaceEval, Vec3};
pub use jet::{Jet2, JetError};
pub use oracle::{oracle_eval, FdConfig, OracleEval, OracleError};
pub use rotational::RotationalParams;
pub use mesh::{Mesh, MeshError};
pub use surface::{sample, MaskReason, SampledGrid, Surface};
pub use verify::{verify, Target, Tolerances, VerificationReport, VerifyError, VerifyOptions};

/// Sizes the global worker pool from `SSFORGE_THREADS` when set to a positive integer.
/// Returns the size applied, if any.
pub fn configure_threads_from_env() -> Option<usize> {
    let n = std::env::var("SSFORGE_THREADS").ok()?.trim().parse::<usize>().ok().filter(|&n| n > 0)?;
    match rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        Ok(()) => Some(n),
        Err(e) => {
            log::warn!("SSFORGE_THREADS ignored: {e}");
            None
        }
    }
}
