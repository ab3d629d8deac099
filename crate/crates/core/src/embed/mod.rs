//! Image → latent feature maps.
//!
//! Any type implementing [`Embedder`] can drive the metric. The built-in
//! [`EmbedderModel`] is a linear encoder whose basis is the top principal
//! subspace of the training images, i.e. the optimum of a linear
//! autoencoder's reconstruction objective. Features computed elsewhere can
//! be brought in through the FEAT1 format.

mod io;
mod pca;

use nalgebra::DMatrix;

pub use io::{
    export_features, import_features, load_model, read_feat1, read_model, save_model, write_feat1,
    write_model,
};
pub use pca::fit_pca;

use crate::imaging::MotionImage;
use crate::{Error, Result};

/// A point in latent space.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite feature value {v}")));
        }
        Ok(FeatureVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Maps motion images of one fixed size into a `latent_dim`-dimensional space.
pub trait Embedder: Send + Sync {
    /// `(height, width)` = `(bones, frames)` of accepted images.
    fn input_shape(&self) -> (usize, usize);

    fn latent_dim(&self) -> usize;

    fn embed(&self, image: &MotionImage) -> Result<FeatureVector>;

    fn embed_batch(&self, images: &[MotionImage]) -> Result<Vec<FeatureVector>> {
        images.iter().map(|img| self.embed(img)).collect()
    }
}

/// Linear PCA encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedderModel {
    input_height: usize,
    input_width: usize,
    mean_image: Vec<f64>,
    /// `d × (H·W·3)`, one orthonormal component per row.
    components: DMatrix<f64>,
    explained_variance: Vec<f64>,
}

impl EmbedderModel {
    pub fn new(
        input_height: usize,
        input_width: usize,
        mean_image: Vec<f64>,
        components: DMatrix<f64>,
        explained_variance: Vec<f64>,
    ) -> Result<Self> {
        let len = input_height * input_width * 3;
        let d = components.nrows();
        if len == 0 || mean_image.len() != len || components.ncols() != len {
            return Err(Error::DimensionMismatch(format!(
                "model for {input_height}×{input_width} images needs vectors of length {len}"
            )));
        }
        if d == 0 || explained_variance.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{d} components with {} explained variances",
                explained_variance.len()
            )));
        }
        if mean_image
            .iter()
            .chain(components.iter())
            .chain(explained_variance.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite model parameter".into()));
        }
        if explained_variance.iter().any(|v| *v < 0.0) || explained_variance.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "explained variance must be non-negative and non-increasing".into(),
            ));
        }
        let model = EmbedderModel {
            input_height,
            input_width,
            mean_image,
            components,
            explained_variance,
        };
        let err = model.orthonormality_error();
        if err > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "components are not orthonormal (max deviation {err:e})"
            )));
        }
        Ok(model)
    }

    pub fn mean_image(&self) -> &[f64] {
        &self.mean_image
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.components.row(i).iter().copied().collect()
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Largest entry of `|C·Cᵀ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = &self.components * self.components.transpose();
        let d = gram.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    fn check_shape(&self, image: &MotionImage) -> Result<()> {
        if (image.height(), image.width()) != (self.input_height, self.input_width) {
            return Err(Error::DimensionMismatch(format!(
                "model expects {}×{} images, got {}×{}",
                self.input_height,
                self.input_width,
                image.height(),
                image.width()
            )));
        }
        Ok(())
    }

    /// `mean + Σᵢ zᵢ·cᵢ` for a latent code `z`.
    pub fn reconstruct(&self, features: &FeatureVector) -> Result<Vec<f64>> {
        if features.dim() != self.latent_dim() {
            return Err(Error::DimensionMismatch(format!(
                "latent code of dimension {} for a {}-dimensional model",
                features.dim(),
                self.latent_dim()
            )));
        }
        let mut out = self.mean_image.clone();
        for (i, z) in features.values().iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.components.row(i).iter()) {
                *o += z * c;
            }
        }
        Ok(out)
    }
}

impl Embedder for EmbedderModel {
    fn input_shape(&self) -> (usize, usize) {
        (self.input_height, self.input_width)
    }

    fn latent_dim(&self) -> usize {
        self.components.nrows()
    }

    fn embed(&self, image: &MotionImage) -> Result<FeatureVector> {
        Ok(self.embed_batch(std::slice::from_ref(image))?.remove(0))
    }

    /// `(X − mean)·Cᵀ` as one matrix product.
    fn embed_batch(&self, images: &[MotionImage]) -> Result<Vec<FeatureVector>> {
        for img in images {
            self.check_shape(img)?;
        }
        let len = self.mean_image.len();
        let centered = DMatrix::from_fn(images.len(), len, |r, c| {
            images[r].as_slice()[c] - self.mean_image[c]
        });
        let z = centered * self.components.transpose();
        Ok((0..images.len())
            .map(|r| FeatureVector(z.row(r).iter().copied().collect()))
            .collect())
    }
}
