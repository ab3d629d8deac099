use nalgebra::{DMatrix, DVector};

use super::EmbedderModel;
use crate::imaging::MotionImage;
use crate::linalg::{sym_eigen, symmetrize};
use crate::{Error, Result};

/// Eigenvalues below this fraction of the largest carry no usable direction
/// in the Gram-matrix route.
const RANK_TOLERANCE: f64 = 1e-12;

/// Fits a `d`-component PCA encoder (covariance denominator `n − 1`).
///
/// The principal axes come from whichever of the `D × D` covariance or the
/// `n × n` Gram matrix is smaller. When the data span fewer than `d`
/// directions the basis is completed with an orthonormal complement of zero
/// explained variance. Each component's largest-magnitude entry is made
/// non-negative.
pub fn fit_pca(images: &[MotionImage], d: usize) -> Result<EmbedderModel> {
    let first = images
        .first()
        .ok_or_else(|| Error::InsufficientData("no training images".into()))?;
    let (h, w) = (first.height(), first.width());
    if let Some(bad) = images.iter().find(|i| (i.height(), i.width()) != (h, w)) {
        return Err(Error::DimensionMismatch(format!(
            "training images of size {h}×{w} and {}×{}",
            bad.height(),
            bad.width()
        )));
    }
    let len = h * w * 3;
    if d == 0 || d > len {
        return Err(Error::DimensionMismatch(format!(
            "latent dimension {d} outside 1..={len} for {h}×{w} images"
        )));
    }
    let n = images.len();
    if n < d + 1 {
        return Err(Error::InsufficientData(format!(
            "{n} images cannot fit {d} components (need ≥ {})",
            d + 1
        )));
    }

    let mut mean = vec![0.0; len];
    for img in images {
        for (m, v) in mean.iter_mut().zip(img.as_slice()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let x = DMatrix::from_fn(n, len, |r, c| images[r].as_slice()[c] - mean[c]);
    let denom = (n - 1) as f64;

    let (mut basis, mut variance) = if len <= n {
        let mut cov = x.tr_mul(&x) / denom;
        symmetrize(&mut cov);
        let eig = sym_eigen(cov)?;
        let basis: Vec<DVector<f64>> = (0..d).map(|i| eig.vectors.column(i).into_owned()).collect();
        (basis, eig.values[..d].to_vec())
    } else {
        let mut gram = &x * x.transpose() / denom;
        symmetrize(&mut gram);
        let eig = sym_eigen(gram)?;
        let top = eig.values[0].max(0.0);
        let mut basis = Vec::with_capacity(d);
        let mut variance = Vec::with_capacity(d);
        for i in 0..d {
            let lambda = eig.values[i];
            if lambda <= RANK_TOLERANCE * top || lambda <= 0.0 {
                break;
            }
            let v = x.tr_mul(&eig.vectors.column(i)) / (denom * lambda).sqrt();
            basis.push(v);
            variance.push(lambda);
        }
        (basis, variance)
    };

    orthonormalize(&mut basis);
    variance.resize(d, 0.0);
    for v in &mut variance {
        // Round-off may leave tiny negatives.
        *v = v.max(0.0);
    }
    for i in 1..d {
        variance[i] = variance[i].min(variance[i - 1]);
    }
    let mut next_axis = 0;
    while basis.len() < d {
        let mut e = DVector::zeros(len);
        e[next_axis] = 1.0;
        next_axis += 1;
        if let Some(v) = orthogonal_residual(&basis, e) {
            basis.push(v);
        }
    }
    for v in &mut basis {
        fix_sign(v);
    }

    let mut components = DMatrix::zeros(d, len);
    for (i, v) in basis.iter().enumerate() {
        components.set_row(i, &v.transpose());
    }
    EmbedderModel::new(h, w, mean, components, variance)
}

/// Two passes of modified Gram–Schmidt; drops vectors that vanish.
fn orthonormalize(basis: &mut Vec<DVector<f64>>) {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(basis.len());
    for v in basis.drain(..) {
        if let Some(u) = orthogonal_residual(&out, v) {
            out.push(u);
        }
    }
    *basis = out;
}

fn orthogonal_residual(basis: &[DVector<f64>], mut v: DVector<f64>) -> Option<DVector<f64>> {
    let start = v.norm();
    for _ in 0..2 {
        for b in basis {
            let p = b.dot(&v);
            v.axpy(-p, b, 1.0);
        }
    }
    let n = v.norm();
    (n > 1e-6 * start.max(f64::MIN_POSITIVE)).then(|| v / n)
}

fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}
