//! Fréchet Motion Distance (FMD) toolkit.
//!
//! The pipeline turns skeletal motion clips into unit bone-direction
//! signals, encodes those as `bones × frames × RGB` images, maps the images
//! into a latent feature space and compares the Gaussian moments of two
//! embedded sets with the Fréchet distance:
//!
//! ```text
//! FMD = ‖μ_g − μ_r‖² + Tr(Σ_r + Σ_g − 2·(Σ_g Σ_r)^½)
//! ```
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`motion`] | skeletons, clips, directional vectors, windowing, synthetic data, MOT1 files |
//! | [`imaging`] | directional motion ↔ image encoding |
//! | [`perturb`] | gaussian, salt-and-pepper and temporal degradations |
//! | [`embed`] | embedder contract, PCA embedder, FEAT1 / FMDMODEL1 files |
//! | [`frechet`] | Gaussian moments, PSD square root, the distance itself |
//! | [`harness`] | degradation sweeps, reports, CSV / JSON / SVG output |

pub mod embed;
mod error;
pub mod frechet;
pub mod harness;
pub mod imaging;
mod linalg;
pub mod motion;
pub mod perturb;
pub mod seeding;
mod textfmt;

pub use error::{Error, Result};
