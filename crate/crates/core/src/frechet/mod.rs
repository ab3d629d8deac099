//! Gaussian moment fitting and the Fréchet distance between two Gaussians.
//!
//! The cross term `Tr((Σ_g Σ_r)^½)` is evaluated as
//! `Tr((Σ_r^½ Σ_g Σ_r^½)^½)`: the two traces agree, and the second only
//! needs square roots of symmetric PSD matrices.

mod io;

use log::warn;
use nalgebra::{DMatrix, DVector};

pub use io::{load_stats, read_stats1, save_stats, write_stats1};

use crate::embed::FeatureVector;
use crate::linalg::{max_abs, max_asymmetry, sym_eigen, symmetrize};
use crate::{Error, Result};

/// Tolerated asymmetry of a matrix handed to [`sqrtm_psd`], relative to
/// `max(1, max|a_ij|)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;
/// Most negative eigenvalue accepted as round-off, relative to the same scale.
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Stabilizer `ε = STABILIZER · mean diagonal` for near-singular covariances.
pub const STABILIZER: f64 = 1e-10;

/// Covariance denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceEstimator {
    /// `n − 1`
    #[default]
    Unbiased,
    /// `n`
    MaximumLikelihood,
}

impl CovarianceEstimator {
    pub fn as_str(self) -> &'static str {
        match self {
            CovarianceEstimator::Unbiased => "unbiased",
            CovarianceEstimator::MaximumLikelihood => "ml",
        }
    }

    fn denominator(self, n: usize) -> f64 {
        match self {
            CovarianceEstimator::Unbiased => (n - 1) as f64,
            CovarianceEstimator::MaximumLikelihood => n as f64,
        }
    }
}

impl std::str::FromStr for CovarianceEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unbiased" | "n-1" => Ok(CovarianceEstimator::Unbiased),
            "ml" | "n" | "maximum_likelihood" => Ok(CovarianceEstimator::MaximumLikelihood),
            other => Err(Error::InvalidParameter(format!(
                "unknown covariance estimator `{other}` (expected unbiased or ml)"
            ))),
        }
    }
}

/// Mean and covariance of an embedded sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    n: usize,
    estimator: CovarianceEstimator,
}

impl GaussianStats {
    /// Validates and symmetrizes externally supplied moments.
    pub fn new(
        mu: Vec<f64>,
        mut sigma: DMatrix<f64>,
        n: usize,
        estimator: CovarianceEstimator,
    ) -> Result<Self> {
        let d = mu.len();
        if d == 0 || sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "mean of length {d} with a {}×{} covariance",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::InsufficientSamples(n));
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite moment".into()));
        }
        let scale = max_abs(&sigma).max(1.0);
        let asym = max_asymmetry(&sigma);
        if asym > 1e-10 * scale {
            return Err(Error::NotSymmetric(asym));
        }
        symmetrize(&mut sigma);
        let eig = sym_eigen(sigma.clone())?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOLERANCE * scale {
            return Err(Error::InvalidParameter(format!(
                "covariance is not positive semi-definite (eigenvalue {min:e})"
            )));
        }
        Ok(GaussianStats {
            mu: DVector::from_vec(mu),
            sigma,
            n,
            estimator,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn sample_count(&self) -> usize {
        self.n
    }

    pub fn estimator(&self) -> CovarianceEstimator {
        self.estimator
    }

    fn trace(&self) -> f64 {
        self.sigma.trace()
    }
}

pub fn fit_gaussian(features: &[FeatureVector]) -> Result<GaussianStats> {
    fit_gaussian_with(features, CovarianceEstimator::Unbiased)
}

/// Sample mean and covariance, symmetrized as `(S + Sᵀ)/2`.
pub fn fit_gaussian_with(
    features: &[FeatureVector],
    estimator: CovarianceEstimator,
) -> Result<GaussianStats> {
    let n = features.len();
    if n < 2 {
        return Err(Error::InsufficientSamples(n));
    }
    let d = features[0].dim();
    if let Some(bad) = features.iter().find(|f| f.dim() != d) {
        return Err(Error::DimensionMismatch(format!(
            "feature of dimension {} in a set of dimension {d}",
            bad.dim()
        )));
    }
    if d == 0 {
        return Err(Error::DimensionMismatch("zero-dimensional features".into()));
    }
    let mut mu = vec![0.0; d];
    for f in features {
        for (m, v) in mu.iter_mut().zip(f.values()) {
            *m += v;
        }
    }
    mu.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, k| features[i].values()[k] - mu[k]);
    let mut sigma = centered.tr_mul(&centered) / estimator.denominator(n);
    symmetrize(&mut sigma);
    Ok(GaussianStats {
        mu: DVector::from_vec(mu),
        sigma,
        n,
        estimator,
    })
}

struct PsdRoot {
    root: DMatrix<f64>,
    min_eigenvalue: f64,
}

fn psd_root(mut a: DMatrix<f64>) -> Result<PsdRoot> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "square root of a {}×{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let asym = max_asymmetry(&a);
    if asym > SYMMETRY_TOLERANCE * max_abs(&a).max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    symmetrize(&mut a);
    let eig = sym_eigen(a)?;
    let sqrt_vals: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let q = &eig.vectors;
    let scaled = DMatrix::from_fn(q.nrows(), q.ncols(), |r, c| q[(r, c)] * sqrt_vals[c]);
    let mut root = scaled * q.transpose();
    symmetrize(&mut root);
    Ok(PsdRoot {
        root,
        min_eigenvalue: eig.values.last().copied().unwrap_or(0.0),
    })
}

/// Symmetric PSD square root via `A = QΛQᵀ`, `S = Q·max(Λ,0)^½·Qᵀ`.
pub fn sqrtm_psd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    psd_root(a.clone()).map(|r| r.root)
}

/// Terms of one distance evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetTerms {
    /// `‖μ_g − μ_r‖²`
    pub mean_term: f64,
    /// `Tr(Σ_r) + Tr(Σ_g) − 2·Tr((Σ_r^½ Σ_g Σ_r^½)^½)`
    pub covariance_term: f64,
    /// Sum before clamping at zero.
    pub unclamped: f64,
    /// Whether the `ε·I` stabilizer was applied.
    pub stabilized: bool,
}

impl FrechetTerms {
    pub fn value(&self) -> f64 {
        self.unclamped.max(0.0)
    }
}

/// Reference-side state reused across many candidate sets.
pub struct FrechetReference {
    stats: GaussianStats,
    root: PsdRoot,
}

impl FrechetReference {
    pub fn new(stats: GaussianStats) -> Result<Self> {
        let root = psd_root(stats.sigma.clone())?;
        Ok(FrechetReference { stats, root })
    }

    pub fn stats(&self) -> &GaussianStats {
        &self.stats
    }

    pub fn distance(&self, candidate: &GaussianStats) -> Result<f64> {
        self.terms(candidate).map(|t| t.value())
    }

    pub fn terms(&self, g: &GaussianStats) -> Result<FrechetTerms> {
        let r = &self.stats;
        if r.dim() != g.dim() {
            return Err(Error::DimensionMismatch(format!(
                "reference dimension {} vs candidate dimension {}",
                r.dim(),
                g.dim()
            )));
        }
        let d = r.dim() as f64;
        let mean_term = (&g.mu - &r.mu).norm_squared();
        let (tr_r, tr_g) = (r.trace(), g.trace());
        let eps = STABILIZER * (tr_r + tr_g) / (2.0 * d);

        let inner = |root_r: &DMatrix<f64>, sigma_g: &DMatrix<f64>| -> Result<PsdRoot> {
            let mut m = root_r * sigma_g * root_r;
            symmetrize(&mut m);
            psd_root(m)
        };
        let mut cross = inner(&self.root.root, &g.sigma)?;
        let near_singular = eps > 0.0
            && (self.root.min_eigenvalue <= eps || cross.min_eigenvalue <= eps * (tr_r + tr_g) / (2.0 * d));
        if near_singular {
            let shift = DMatrix::<f64>::identity(r.dim(), r.dim()) * eps;
            let root_r = psd_root(&r.sigma + &shift)?;
            cross = inner(&root_r.root, &(&g.sigma + &shift))?;
        }
        let covariance_term = tr_r + tr_g - 2.0 * cross.root.trace();
        let unclamped = mean_term + covariance_term;
        if unclamped < -1e-6 * (1.0 + tr_r + tr_g) {
            warn!(
                "Fréchet distance {unclamped:e} is substantially negative before clamping; \
                 covariances may be ill-conditioned"
            );
        }
        Ok(FrechetTerms {
            mean_term,
            covariance_term,
            unclamped,
            stabilized: near_singular,
        })
    }
}

/// `‖μ_g − μ_r‖² + Tr(Σ_r) + Tr(Σ_g) − 2·Tr((Σ_r^½ Σ_g Σ_r^½)^½)`, clamped at 0.
pub fn frechet_distance(r: &GaussianStats, g: &GaussianStats) -> Result<f64> {
    FrechetReference::new(r.clone())?.distance(g)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stats(mu: Vec<f64>, sigma: DMatrix<f64>) -> GaussianStats {
        GaussianStats::new(mu, sigma, 10, CovarianceEstimator::Unbiased).unwrap()
    }

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    fn random_features(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<FeatureVector> {
        (0..n)
            .map(|_| fv(&(0..d).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<_>>()))
            .collect()
    }

    /// Definition-level covariance, independent of the matrix-product path.
    fn oracle_covariance(x: &[FeatureVector]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = x.len();
        let d = x[0].dim();
        let mut mu = vec![0.0; d];
        for k in 0..d {
            for f in x {
                mu[k] += f.values()[k];
            }
            mu[k] /= n as f64;
        }
        let mut cov = vec![vec![0.0; d]; d];
        for a in 0..d {
            for b in 0..d {
                let mut s = 0.0;
                for f in x {
                    s += (f.values()[a] - mu[a]) * (f.values()[b] - mu[b]);
                }
                cov[a][b] = s / (n - 1) as f64;
            }
        }
        (mu, cov)
    }

    #[test]
    fn constant_features_have_zero_covariance() {
        let g = fit_gaussian(&vec![fv(&[1.5, -2.0, 3.0]); 7]).unwrap();
        assert_eq!(g.mean().as_slice(), &[1.5, -2.0, 3.0]);
        assert!(g.covariance().iter().all(|v| *v == 0.0));
        assert_eq!(frechet_distance(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn two_point_spread() {
        let g = fit_gaussian(&[fv(&[0.0, 0.0]), fv(&[2.0, 0.0])]).unwrap();
        assert_eq!(g.mean().as_slice(), &[1.0, 0.0]);
        assert_eq!(
            g.covariance(),
            &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0])
        );
        let ml = fit_gaussian_with(
            &[fv(&[0.0, 0.0]), fv(&[2.0, 0.0])],
            CovarianceEstimator::MaximumLikelihood,
        )
        .unwrap();
        assert_eq!(ml.covariance()[(0, 0)], 1.0);
    }

    #[test]
    fn covariance_matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = random_features(&mut rng, 200, 5);
        let g = fit_gaussian(&x).unwrap();
        let (mu, cov) = oracle_covariance(&x);
        for a in 0..5 {
            assert!((g.mean()[a] - mu[a]).abs() <= 1e-10);
            for b in 0..5 {
                assert!((g.covariance()[(a, b)] - cov[a][b]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_gaussian(&[fv(&[1.0])]),
            Err(Error::InsufficientSamples(1))
        ));
        assert!(matches!(fit_gaussian(&[]), Err(Error::InsufficientSamples(0))));
        assert!(matches!(
            fit_gaussian(&[fv(&[1.0]), fv(&[1.0, 2.0])]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sqrtm_small_cases() {
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert!((sqrtm_psd(&i3).unwrap() - &i3).norm() < 1e-14);
        let s = sqrtm_psd(&DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]))).unwrap();
        assert!((s - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).norm() < 1e-14);
    }

    #[test]
    fn sqrtm_reconstructs_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let a = b.transpose() * &b;
        let s = sqrtm_psd(&a).unwrap();
        assert!(max_asymmetry(&s) == 0.0);
        assert!((&s * &s - &a).norm() / a.norm() <= 1e-8);
    }

    #[test]
    fn sqrtm_clamps_tiny_negative_eigenvalues() {
        // Rank-1 matrix with round-off.
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let a = &v * v.transpose();
        let s = sqrtm_psd(&a).unwrap();
        assert!(s.iter().all(|x| x.is_finite()));
        assert!((&s * &s - &a).norm() <= 1e-6 * (1.0 + a.norm()));
    }

    #[test]
    fn sqrtm_rejects_asymmetric_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(sqrtm_psd(&a), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn one_dimensional_closed_form() {
        let r = stats(vec![0.0], DMatrix::from_element(1, 1, 1.0));
        let g = stats(vec![1.0], DMatrix::from_element(1, 1, 1.0));
        assert!((frechet_distance(&r, &g).unwrap() - 1.0).abs() <= 1e-9);
        let g = stats(vec![3.0], DMatrix::from_element(1, 1, 4.0));
        // 9 + 1 + 4 − 2·1·2
        assert!((frechet_distance(&r, &g).unwrap() - 10.0).abs() <= 1e-9);
    }

    #[test]
    fn commuting_diagonal_case() {
        let r = stats(
            vec![0.0, 0.0],
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])),
        );
        let g = stats(
            vec![0.0, 0.0],
            DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])),
        );
        assert!((frechet_distance(&r, &g).unwrap() - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let r = stats(vec![0.0], DMatrix::from_element(1, 1, 1.0));
        let g = stats(vec![0.0, 0.0], DMatrix::identity(2, 2));
        assert!(matches!(
            frechet_distance(&r, &g),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rank_deficient_self_distance_is_zero() {
        // n < d: covariance has rank ≤ 3 in 8 dimensions.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = fit_gaussian(&random_features(&mut rng, 4, 8)).unwrap();
        let terms = FrechetReference::new(g.clone()).unwrap().terms(&g).unwrap();
        assert!(terms.stabilized);
        assert!(terms.value() <= 1e-9 * (1.0 + g.covariance().trace()));
    }

    #[test]
    fn stats_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert!(matches!(
            GaussianStats::new(vec![0.0, 0.0], bad, 5, CovarianceEstimator::Unbiased),
            Err(Error::NotSymmetric(_))
        ));
        let neg = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(GaussianStats::new(vec![0.0, 0.0], neg, 5, CovarianceEstimator::Unbiased).is_err());
        assert!(GaussianStats::new(
            vec![0.0],
            DMatrix::identity(1, 1),
            1,
            CovarianceEstimator::Unbiased
        )
        .is_err());
    }

    fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
        let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        m.qr().q()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn symmetric_nonnegative_and_self_zero(seed in any::<u64>(), d in 1usize..7, n in 3usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = fit_gaussian(&random_features(&mut rng, n, d)).unwrap();
            let b = fit_gaussian(&random_features(&mut rng, n + 3, d)).unwrap();
            let ab = frechet_distance(&a, &b).unwrap();
            let ba = frechet_distance(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-8 * (1.0 + ab));
            let scale = 1.0 + a.covariance().trace() + b.covariance().trace();
            let t = FrechetReference::new(a.clone()).unwrap().terms(&b).unwrap();
            prop_assert!(t.unclamped >= -1e-6 * scale);
            prop_assert!(frechet_distance(&a, &a).unwrap() <= 1e-9 * (1.0 + a.covariance().trace()));
        }

        #[test]
        fn mean_shift_law(seed in any::<u64>(), d in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xr = random_features(&mut rng, 40, d);
            let xg = random_features(&mut rng, 40, d);
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let shifted: Vec<FeatureVector> = xg
                .iter()
                .map(|f| fv(&f.values().iter().zip(&t).map(|(a, b)| a + b).collect::<Vec<_>>()))
                .collect();
            let r = fit_gaussian(&xr).unwrap();
            let g = fit_gaussian(&xg).unwrap();
            let gs = fit_gaussian(&shifted).unwrap();
            let tv = DVector::from_vec(t);
            let expected_delta = (g.mean() + &tv - r.mean()).norm_squared() - (g.mean() - r.mean()).norm_squared();
            let before = FrechetReference::new(r.clone()).unwrap().terms(&g).unwrap().unclamped;
            let after = FrechetReference::new(r).unwrap().terms(&gs).unwrap().unclamped;
            prop_assert!(((after - before) - expected_delta).abs() <= 1e-8 * (1.0 + after.abs()));
        }

        #[test]
        fn commuting_covariances_match_closed_form(
            lam in prop::collection::vec(0.01f64..10.0, 1..8),
            gam_seed in any::<u64>(),
        ) {
            let d = lam.len();
            let mut rng = ChaCha8Rng::seed_from_u64(gam_seed);
            let gam: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..10.0)).collect();
            let mu_r: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mu_g: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Shared eigenbasis, not just diagonal.
            let q = random_orthogonal(&mut rng, d);
            let sym = |m: DMatrix<f64>| { let mut m = m; symmetrize(&mut m); m };
            let sr = sym(&q * DMatrix::from_diagonal(&DVector::from_vec(lam.clone())) * q.transpose());
            let sg = sym(&q * DMatrix::from_diagonal(&DVector::from_vec(gam.clone())) * q.transpose());
            let expected: f64 = mu_r.iter().zip(&mu_g).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                + lam.iter().zip(&gam).map(|(l, g)| (l.sqrt() - g.sqrt()).powi(2)).sum::<f64>();
            let got = frechet_distance(&stats(mu_r, sr), &stats(mu_g, sg)).unwrap();
            prop_assert!((got - expected).abs() <= 1e-8 * (1.0 + expected), "{got} vs {expected}");
        }

        #[test]
        fn rotation_invariance(seed in any::<u64>(), d in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xr = random_features(&mut rng, 30, d);
            let xg = random_features(&mut rng, 25, d);
            let q = random_orthogonal(&mut rng, d);
            let rot = |x: &[FeatureVector]| -> Vec<FeatureVector> {
                x.iter()
                    .map(|f| fv((&q * DVector::from_column_slice(f.values())).as_slice()))
                    .collect()
            };
            let before = frechet_distance(&fit_gaussian(&xr).unwrap(), &fit_gaussian(&xg).unwrap()).unwrap();
            let after = frechet_distance(&fit_gaussian(&rot(&xr)).unwrap(), &fit_gaussian(&rot(&xg)).unwrap()).unwrap();
            prop_assert!((before - after).abs() <= 1e-7 * before.max(1e-12) + 1e-12);
        }
    }
}
