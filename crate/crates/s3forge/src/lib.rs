//! Geodesic pentagons, discrete Plateau solves and conjugate closing for
//! minimal surfaces in the unit 3-sphere.
//!
//! The crate is organised as a pipeline:
//!
//! * [`s3core`]: ambient geometry of S³.
//! * [`pentagon`]: right-angled geodesic pentagons and their closed forms.
//! * [`plateau`]: discrete area minimization with pinned boundary and measurements.
//! * [`conjugate`]: conjugate boundary reconstruction by Frenet integration.
//! * [`closing`]: parameter search for the closing conditions.
//! * [`assembly`]: orbit assembly and verification of the closed surface.

pub mod assembly;
pub mod closing;
pub mod conjugate;
pub mod pentagon;
pub mod plateau;
pub mod s3core;
