//! Eigenvalue statistics and Monte Carlo estimates of determinant ratios.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_block_band, sample_seeds, BlockBandSample, CovarianceProfile};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, inverse_participation_ratio, log_det_shifted};
use crate::scalars::{semicircle_cdf, semicircle_density, Shifts};
use crate::seed::{tag, Seed};

/// Sorted spectra of an ensemble of matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEnsemble {
    pub samples: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
    pub profile: Option<CovarianceProfile>,
}

impl SpectralEnsemble {
    /// Wraps spectra that did not come from a block-band profile
    /// (oracle or synthetic spectra). Each vector is sorted.
    pub fn from_spectra(mut samples: Vec<Vec<f64>>) -> Self {
        for s in &mut samples {
            s.sort_by(f64::total_cmp);
        }
        let seeds = vec![0; samples.len()];
        Self {
            samples,
            seeds,
            profile: None,
        }
    }

    pub fn pooled_len(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }
}

/// Ascending spectrum of one sample.
pub fn eigenvalues(sample: &BlockBandSample) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&sample.matrix)
}

/// Samples `count` matrices from `profile` in parallel and diagonalises them.
pub fn sample_spectra(profile: &CovarianceProfile, count: usize, root: Seed) -> Result<SpectralEnsemble> {
    let seeds = sample_seeds(root, count);
    let samples = seeds
        .par_iter()
        .map(|&s| eigenvalues(&sample_block_band(profile, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralEnsemble {
        samples,
        seeds,
        profile: Some(profile.clone()),
    })
}

/// GUE matrix of size `size` normalised so `E|H_ij|² = 1/size`, built as
/// `(A + A*)/√(2·size)` from an i.i.d. complex Gaussian `A`.
///
/// This is deliberately a different construction from the block sampler.
pub fn gue_matrix(size: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let a = DMatrix::from_fn(size, size, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * half, im * half)
    });
    (&a + a.adjoint()).unscale((2.0 * size as f64).sqrt())
}

/// Ensemble of directly sampled GUE spectra.
pub fn gue_spectra(size: usize, count: usize, root: Seed) -> Result<SpectralEnsemble> {
    let seeds: Vec<u64> = (0..count as u64).map(|k| root.token(tag::GUE_ORACLE, k)).collect();
    let samples = seeds
        .par_iter()
        .map(|&s| hermitian_eigenvalues(&gue_matrix(size, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralEnsemble {
        samples,
        seeds,
        profile: None,
    })
}

/// Poisson spectrum: partial sums of `count` i.i.d. unit exponentials.
pub fn poisson_spectrum(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..count)
        .map(|_| {
            let step: f64 = Exp1.sample(&mut rng);
            x += step;
            x
        })
        .collect()
}

/// Kolmogorov–Smirnov distance of the pooled spectrum from the semicircle.
pub fn semicircle_distance(ens: &SpectralEnsemble) -> Result<f64> {
    let mut pooled: Vec<f64> = ens.samples.iter().flatten().copied().collect();
    if pooled.len() < 1000 {
        return Err(Error::EmptyEnsemble {
            count: pooled.len(),
            minimum: 1000,
        });
    }
    pooled.sort_by(f64::total_cmp);
    let n = pooled.len() as f64;
    let mut distance = 0.0f64;
    for (i, &x) in pooled.iter().enumerate() {
        let f = semicircle_cdf(x);
        distance = distance
            .max((f - i as f64 / n).abs())
            .max((f - (i + 1) as f64 / n).abs());
    }
    Ok(distance)
}

/// Energy window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn around(center: f64, half_width: f64) -> Self {
        Self {
            lo: center - half_width,
            hi: center + half_width,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    fn check_bulk(&self) -> Result<()> {
        if !(self.lo > -2.0 && self.hi < 2.0 && self.lo < self.hi) {
            return Err(Error::WindowOutsideBulk {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }
}

/// Maps eigenvalues inside `window` to `N·F(x)` with `F` the semicircle
/// distribution function and `N = eigs.len()`.
pub fn unfold(eigs: &[f64], window: Window) -> Result<Vec<f64>> {
    window.check_bulk()?;
    let n = eigs.len() as f64;
    Ok(eigs
        .iter()
        .filter(|&&x| window.contains(x))
        .map(|&x| n * semicircle_cdf(x))
        .collect())
}

/// Mean and standard error of a scalar statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Estimate {
        mean,
        stderr: (var / n).sqrt(),
        count: values.len(),
    }
}

/// Ratios `min(s_j, s_{j+1}) / max(s_j, s_{j+1})` of consecutive spacings
/// of a sorted sequence.
pub fn gap_ratios(sorted: &[f64]) -> Vec<f64> {
    sorted
        .windows(3)
        .map(|w| {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            let (small, large) = if a < b { (a, b) } else { (b, a) };
            if large > 0.0 {
                small / large
            } else {
                1.0
            }
        })
        .collect()
}

/// Mean gap ratio over eigenvalue triples inside `window`, pooled over
/// samples. Needs at least 1000 ratios.
pub fn gap_ratio_stats(ens: &SpectralEnsemble, window: Window) -> Result<Estimate> {
    let ratios: Vec<f64> = ens
        .samples
        .iter()
        .flat_map(|s| {
            let inside: Vec<f64> = s.iter().copied().filter(|&x| window.contains(x)).collect();
            gap_ratios(&inside)
        })
        .collect();
    if ratios.len() < 1000 {
        return Err(Error::InsufficientData {
            what: "gap ratios",
            available: ratios.len(),
            required: 1000,
        });
    }
    Ok(mean_and_stderr(&ratios))
}

/// Binned two-level correlation of unfolded spectra.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPointHistogram {
    pub bin_centers: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub pairs: usize,
}

/// Histogram of unfolded separations `|x_j − x_i|` (`j ≠ i`) around `energy`.
///
/// Spectra are unfolded inside `energy ± half_width`; reference levels are
/// restricted to an inner window lying `max_separation` unfolded units away
/// from both edges, so every partner within `max_separation` is counted.
/// Each bin is normalised by `2 · bin_width` per reference level so an
/// uncorrelated unit-density sequence gives 1. Standard errors come from
/// the spread of per-sample histograms.
pub fn two_point_estimator(
    ens: &SpectralEnsemble,
    energy: f64,
    half_width: f64,
    bin_width: f64,
    max_separation: f64,
) -> Result<TwoPointHistogram> {
    let bins = (max_separation / bin_width).round() as usize;
    if bins == 0 {
        return Err(Error::InvalidArgument("max_separation below one bin".into()));
    }
    let window = Window::around(energy, half_width);
    let mut per_sample: Vec<(Vec<f64>, usize)> = Vec::with_capacity(ens.samples.len());
    let mut pairs = 0usize;
    for s in &ens.samples {
        let x = unfold(s, window)?;
        if x.len() < 2 {
            continue;
        }
        let (lo, hi) = (x[0] + max_separation, x[x.len() - 1] - max_separation);
        let mut counts = vec![0.0; bins];
        let mut refs = 0usize;
        for (i, &xi) in x.iter().enumerate() {
            if xi < lo || xi > hi {
                continue;
            }
            refs += 1;
            for (j, &xj) in x.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = (xj - xi).abs();
                if d < max_separation {
                    let b = ((d / bin_width) as usize).min(bins - 1);
                    counts[b] += 1.0;
                    pairs += 1;
                }
            }
        }
        if refs > 0 {
            per_sample.push((counts, refs));
        }
    }
    if pairs < 100_000 {
        return Err(Error::InsufficientData {
            what: "level pairs",
            available: pairs,
            required: 100_000,
        });
    }
    let total_refs: usize = per_sample.iter().map(|p| p.1).sum();
    let norm = 2.0 * bin_width;
    let mut values = vec![0.0; bins];
    let mut stderr = vec![0.0; bins];
    for b in 0..bins {
        let total: f64 = per_sample.iter().map(|p| p.0[b]).sum();
        let mean = total / (total_refs as f64 * norm);
        values[b] = mean;
        // Ratio-estimator variance over samples.
        let m = per_sample.len() as f64;
        let var = per_sample
            .iter()
            .map(|(c, r)| (c[b] / norm - mean * *r as f64).powi(2))
            .sum::<f64>()
            / (m - 1.0).max(1.0);
        let mean_refs = total_refs as f64 / m;
        stderr[b] = (var / m).sqrt() / mean_refs;
    }
    let bin_centers = (0..bins).map(|b| (b as f64 + 0.5) * bin_width).collect();
    Ok(TwoPointHistogram {
        bin_centers,
        values,
        stderr,
        pairs,
    })
}

/// Inverse participation ratios of the eigenvectors whose eigenvalues lie
/// in `window`.
pub fn participation_ratios(sample: &BlockBandSample, window: Window) -> Result<Vec<f64>> {
    let (values, vectors) = hermitian_eigen(&sample.matrix)?;
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, &v)| window.contains(v))
        .map(|(k, _)| inverse_participation_ratio(&vectors.column(k).into_owned()))
        .collect())
}

/// Which determinant-ratio correlator to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioVariant {
    /// `det(H−z₁)det(H−z̄₂) / det(H−z₁′)det(H−z̄₂′)`.
    PlusMinus,
    /// `det(H−z₁)det(H−z₂) / det(H−z₁′)det(H−z₂′)`.
    PlusPlus,
}

/// Evaluation point `(E, ε, ξ)` of the correlators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservationPoint {
    pub energy: f64,
    pub eps: f64,
    pub xi: Shifts,
}

impl ObservationPoint {
    /// Spectral parameters `z = E + iε/N + ξ/(Nρ(E))` for the four shifts.
    pub fn spectral_parameters(&self, size: usize) -> [Complex64; 4] {
        let n = size as f64;
        let rho = semicircle_density(self.energy);
        self.xi
            .as_array()
            .map(|xi| Complex64::new(self.energy, self.eps / n) + xi / (n * rho))
    }
}

/// Complex Monte Carlo estimate with component standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexEstimate {
    pub mean: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub samples: usize,
}

/// Per-sample determinant ratio, formed in log space.
pub fn det_ratio(h: &DMatrix<Complex64>, z: [Complex64; 4], variant: RatioVariant) -> Option<Complex64> {
    let [z1, z2, z1p, z2p] = z;
    let (z2, z2p) = match variant {
        RatioVariant::PlusMinus => (z2.conj(), z2p.conj()),
        RatioVariant::PlusPlus => (z2, z2p),
    };
    if z1 == z1p && z2 == z2p {
        return Some(Complex64::new(1.0, 0.0));
    }
    let log = log_det_shifted(h, z1)? + log_det_shifted(h, z2)?
        - log_det_shifted(h, z1p)?
        - log_det_shifted(h, z2p)?;
    Some(log.exp())
}

/// Monte Carlo estimate of the determinant-ratio correlator over `samples`
/// draws from `profile`.
pub fn det_ratio_mc(
    profile: &CovarianceProfile,
    obs: &ObservationPoint,
    variant: RatioVariant,
    samples: usize,
    root: Seed,
) -> Result<ComplexEstimate> {
    if samples < 2 {
        return Err(Error::InvalidSampleCount {
            count: samples,
            minimum: 2,
        });
    }
    if !(obs.eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let z = obs.spectral_parameters(profile.lattice.size());
    let ratios = (0..samples)
        .into_par_iter()
        .map(|k| {
            let seed = root.token(tag::DET_RATIO, k as u64);
            let h = sample_block_band(profile, seed).matrix;
            det_ratio(&h, z, variant).ok_or(Error::SingularShift { sample: k })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(complex_estimate(&ratios))
}

/// Mean and component standard errors of complex samples.
pub fn complex_estimate(values: &[Complex64]) -> ComplexEstimate {
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    let (r, i) = (mean_and_stderr(&re), mean_and_stderr(&im));
    ComplexEstimate {
        mean: Complex64::new(r.mean, i.mean),
        stderr_re: r.stderr,
        stderr_im: i.stderr,
        samples: values.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::semicircle_quantile;

    #[test]
    fn unfolding_semicircle_quantiles_gives_unit_spacing() {
        let n = 1000;
        let eigs: Vec<f64> = (0..n)
            .map(|k| semicircle_quantile((k as f64 + 0.5) / n as f64))
            .collect();
        let x = unfold(&eigs, Window::around(0.0, 1.0)).unwrap();
        for w in x.windows(2) {
            assert!((w[1] - w[0] - 1.0).abs() < 1e-9);
        }
        assert!(matches!(
            unfold(&eigs, Window { lo: 1.9, hi: 2.1 }),
            Err(Error::WindowOutsideBulk { .. })
        ));
    }

    #[test]
    fn gap_ratio_needs_enough_data() {
        let ens = SpectralEnsemble::from_spectra(vec![poisson_spectrum(100, 1)]);
        assert!(matches!(
            gap_ratio_stats(&ens, Window { lo: 0.0, hi: 1e9 }),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn identical_shifts_give_unit_ratio() {
        let h = gue_matrix(6, 3);
        let z = [Complex64::new(0.1, 0.2); 4];
        assert_eq!(det_ratio(&h, z, RatioVariant::PlusMinus), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(det_ratio(&h, z, RatioVariant::PlusPlus), Some(Complex64::new(1.0, 0.0)));
    }
}
