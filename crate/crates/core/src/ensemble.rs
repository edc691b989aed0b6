//! Block-band Gaussian Hermitian matrices.
//!
//! The lattice `Λ = [0, n)^d` carries `W` orbitals per site. Entries
//! `H_{jk,αγ}` are centred Gaussians with `E|H_{jk,αγ}|² = J_{jk}`, where
//! `J = 1/W + β Δ / W²` (sigma-model scaling) or `J = 1/W + β Δ / W`
//! (band scaling) and `Δ` is the graph Laplacian of the lattice with zero
//! row sums.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{tag, Seed};

/// Geometry of the block lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Spatial dimension.
    pub dim: usize,
    /// Sites per dimension.
    pub side: usize,
    /// Orbitals per site.
    pub block: usize,
}

impl LatticeSpec {
    pub fn new(dim: usize, side: usize, block: usize) -> Result<Self> {
        if dim == 0 || side == 0 {
            return Err(Error::InvalidArgument(format!(
                "lattice needs dim >= 1 and side >= 1, got dim={dim}, side={side}"
            )));
        }
        if block < 2 {
            return Err(Error::InvalidArgument(format!(
                "block size must be at least 2, got {block}"
            )));
        }
        Ok(Self { dim, side, block })
    }

    /// Number of lattice sites `n^d`.
    pub fn sites(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Matrix dimension `W · n^d`.
    pub fn size(&self) -> usize {
        self.block * self.sites()
    }

    /// Lexicographic coordinates of a site index (last coordinate fastest).
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dim];
        let mut rest = site;
        for c in coords.iter_mut().rev() {
            *c = rest % self.side;
            rest /= self.side;
        }
        coords
    }

    fn index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.side + c)
    }
}

/// Variance scaling of the nearest-neighbour coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// `J = 1/W + β Δ / W²`.
    Sigma,
    /// `J = 1/W + β Δ / W`.
    Band,
}

/// Boundary convention of the lattice Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Neumann,
    Periodic,
}

/// Graph Laplacian with `Δ_jj = -deg(j)` and `Δ_jk = 1` per edge.
///
/// With periodic boundaries and `n = 2` the two neighbours of a site
/// coincide and the edge counts twice; self-loops (`n = 1`) are dropped.
pub fn laplacian(lattice: &LatticeSpec, boundary: Boundary) -> DMatrix<f64> {
    let sites = lattice.sites();
    let mut lap = DMatrix::zeros(sites, sites);
    for j in 0..sites {
        let coords = lattice.coords(j);
        for axis in 0..lattice.dim {
            for step in [-1i64, 1] {
                let c = coords[axis] as i64 + step;
                let c = match boundary {
                    Boundary::Neumann if c < 0 || c >= lattice.side as i64 => continue,
                    Boundary::Neumann => c as usize,
                    Boundary::Periodic => c.rem_euclid(lattice.side as i64) as usize,
                };
                let mut other = coords.clone();
                other[axis] = c;
                let k = lattice.index(&other);
                if k == j {
                    continue;
                }
                lap[(j, k)] += 1.0;
                lap[(j, j)] -= 1.0;
            }
        }
    }
    lap
}

/// Site covariance `J` together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceProfile {
    pub lattice: LatticeSpec,
    pub beta: f64,
    pub scaling: Scaling,
    pub boundary: Boundary,
    variance: DMatrix<f64>,
}

impl CovarianceProfile {
    /// The `|Λ|×|Λ|` matrix `J`.
    pub fn variance(&self) -> &DMatrix<f64> {
        &self.variance
    }

    /// `J_{jk}` for sites `j`, `k`.
    pub fn site_variance(&self, j: usize, k: usize) -> f64 {
        self.variance[(j, k)]
    }

    /// Assembles `J` without checking positivity.
    ///
    /// Used for comparing the two scalings entrywise in regimes where
    /// [`build_covariance`] would reject the band profile.
    pub fn assemble(
        lattice: LatticeSpec,
        beta: f64,
        scaling: Scaling,
        boundary: Boundary,
    ) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coupling must be finite and non-negative, got {beta}"
            )));
        }
        let w = lattice.block as f64;
        let coupling = match scaling {
            Scaling::Sigma => beta / (w * w),
            Scaling::Band => beta / w,
        };
        let lap = laplacian(&lattice, boundary);
        let variance = lap * coupling
            + DMatrix::identity(lattice.sites(), lattice.sites()) / w;
        Ok(Self {
            lattice,
            beta,
            scaling,
            boundary,
            variance,
        })
    }

    /// Smallest eigenvalue of `J`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.variance
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Serialisable form with the keys `d, n, W, beta, scaling, boundary`.
    pub fn to_config(&self) -> ProfileConfig {
        ProfileConfig {
            d: self.lattice.dim,
            n: self.lattice.side,
            w: self.lattice.block,
            beta: self.beta,
            scaling: self.scaling,
            boundary: self.boundary,
        }
    }
}

/// Builds `J` for the given lattice and checks it is positive definite.
pub fn build_covariance(
    lattice: LatticeSpec,
    beta: f64,
    scaling: Scaling,
    boundary: Boundary,
) -> Result<CovarianceProfile> {
    let profile = CovarianceProfile::assemble(lattice, beta, scaling, boundary)?;
    let min_eigenvalue = profile.min_eigenvalue();
    let diag_ok = (0..lattice.sites()).all(|j| profile.variance[(j, j)] > 0.0);
    if min_eigenvalue <= 0.0 || !diag_ok {
        return Err(Error::NonPositiveCovariance { min_eigenvalue });
    }
    Ok(profile)
}

/// Profile parameters as stored in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "W")]
    pub w: usize,
    pub beta: f64,
    pub scaling: Scaling,
    pub boundary: Boundary,
}

impl ProfileConfig {
    pub fn build(&self) -> Result<CovarianceProfile> {
        build_covariance(
            LatticeSpec::new(self.d, self.n, self.w)?,
            self.beta,
            self.scaling,
            self.boundary,
        )
    }
}

/// One realisation of the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBandSample {
    pub matrix: DMatrix<Complex64>,
    pub seed: u64,
}

/// Unit-variance Hermitian noise: real `N(0,1)` on the diagonal, complex
/// Gaussians with `E|z|² = 1` above it. Draw order is row-major over the
/// upper triangle, so the noise depends only on `size` and `seed`.
pub fn unit_noise(size: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut noise = DMatrix::zeros(size, size);
    for a in 0..size {
        let diag: f64 = rng.sample(StandardNormal);
        noise[(a, a)] = Complex64::new(diag, 0.0);
        for b in a + 1..size {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re * half, im * half);
            noise[(a, b)] = z;
            noise[(b, a)] = z.conj();
        }
    }
    noise
}

/// Draws `H` with `E|H_{jk,αγ}|² = J_{jk}` as unit noise times `√J`.
pub fn sample_block_band(profile: &CovarianceProfile, seed: u64) -> BlockBandSample {
    let lattice = profile.lattice;
    let w = lattice.block;
    let mut matrix = unit_noise(lattice.size(), seed);
    let scale = profile.variance.map(|v| v.max(0.0).sqrt());
    for b in 0..matrix.ncols() {
        for a in 0..matrix.nrows() {
            matrix[(a, b)] *= scale[(a / w, b / w)];
        }
    }
    BlockBandSample { matrix, seed }
}

/// Per-sample seed tokens for an ensemble of `count` matrices.
pub fn sample_seeds(root: Seed, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|k| root.token(tag::ENSEMBLE, k))
        .collect()
}

/// Outcome of [`empirical_covariance_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub samples: usize,
    /// `(j, k, J_jk, empirical mean of |H_{jk,αγ}|², z-score)` for `j <= k`.
    pub entries: Vec<(usize, usize, f64, f64, f64)>,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// Compares empirical second moments of `samples` draws with `J`.
///
/// For each site pair the block entries are pooled; the z-score uses the
/// empirical standard error. Pairs with `J_jk = 0` have identically zero
/// entries and report `z = 0`.
pub fn empirical_covariance_check(
    profile: &CovarianceProfile,
    samples: usize,
    seed: Seed,
) -> Result<CovarianceReport> {
    if samples < 100 {
        return Err(Error::InvalidSampleCount {
            count: samples,
            minimum: 100,
        });
    }
    let sites = profile.lattice.sites();
    let w = profile.lattice.block;
    let seeds: Vec<u64> = (0..samples as u64)
        .map(|k| seed.token(tag::COVARIANCE_CHECK, k))
        .collect();
    // Per site pair: (sum, sum of squares, count) of |H|².
    let zero = || vec![(0.0f64, 0.0f64, 0usize); sites * sites];
    let sums = seeds
        .par_iter()
        .fold(zero, |mut acc, &s| {
            let h = sample_block_band(profile, s).matrix;
            for j in 0..sites {
                for k in j..sites {
                    let slot = &mut acc[j * sites + k];
                    for alpha in 0..w {
                        for gamma in 0..w {
                            let v = h[(j * w + alpha, k * w + gamma)].norm_sqr();
                            slot.0 += v;
                            slot.1 += v * v;
                            slot.2 += 1;
                        }
                    }
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0 += y.0;
                x.1 += y.1;
                x.2 += y.2;
            }
            a
        });
    let mut entries = Vec::new();
    let mut max_abs_z = 0.0f64;
    for j in 0..sites {
        for k in j..sites {
            let (sum, sum_sq, count) = sums[j * sites + k];
            let n = count as f64;
            let mean = sum / n;
            let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
            let target = profile.variance[(j, k)];
            let stderr = (var / n).sqrt();
            let z = if stderr > 0.0 {
                (mean - target) / stderr
            } else if (mean - target).abs() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            max_abs_z = max_abs_z.max(z.abs());
            entries.push((j, k, target, mean, z));
        }
    }
    Ok(CovarianceReport {
        samples,
        entries,
        max_abs_z,
        pass: max_abs_z < 5.0,
    })
}

/// Sidecar metadata written next to a binary sample dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub layout: String,
}

/// Writes `H` as row-major interleaved (re, im) little-endian `f64` to
/// `path` and a JSON sidecar to `path` with extension `.json`.
pub fn write_sample(sample: &BlockBandSample, path: &Path) -> Result<()> {
    let m = &sample.matrix;
    let mut bytes = Vec::with_capacity(m.len() * 16);
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            bytes.extend_from_slice(&m[(a, b)].re.to_le_bytes());
            bytes.extend_from_slice(&m[(a, b)].im.to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    let sidecar = SampleSidecar {
        rows: m.nrows(),
        cols: m.ncols(),
        seed: sample.seed,
        layout: "row-major complex128 interleaved little-endian".into(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path.with_extension("json"), json)?;
    Ok(())
}

/// Reads a dump written by [`write_sample`].
pub fn read_sample(path: &Path) -> Result<BlockBandSample> {
    let sidecar: SampleSidecar = serde_json::from_slice(&fs::read(path.with_extension("json"))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    let bytes = fs::read(path)?;
    if bytes.len() != sidecar.rows * sidecar.cols * 16 {
        return Err(Error::Io(format!(
            "dump has {} bytes, sidecar implies {}",
            bytes.len(),
            sidecar.rows * sidecar.cols * 16
        )));
    }
    let value = |offset: usize| {
        let mut raw = [0u8; 8];
        raw.copy_from_slice(&bytes[offset..offset + 8]);
        f64::from_le_bytes(raw)
    };
    let matrix = DMatrix::from_fn(sidecar.rows, sidecar.cols, |a, b| {
        let offset = (a * sidecar.cols + b) * 16;
        Complex64::new(value(offset), value(offset + 8))
    });
    Ok(BlockBandSample {
        matrix,
        seed: sidecar.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(n: usize, w: usize) -> LatticeSpec {
        LatticeSpec::new(1, n, w).unwrap()
    }

    #[test]
    fn single_site_profile_is_inverse_block() {
        let p = build_covariance(lattice(1, 10), 5.0, Scaling::Sigma, Boundary::Neumann).unwrap();
        assert_eq!(p.variance().shape(), (1, 1));
        assert!((p.site_variance(0, 0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn three_site_sigma_entries_and_row_sums() {
        let p = build_covariance(lattice(3, 10), 1.0, Scaling::Sigma, Boundary::Neumann).unwrap();
        let j = p.variance();
        assert!((j[(0, 0)] - (0.1 - 0.01)).abs() < 1e-15);
        assert!((j[(1, 1)] - (0.1 - 0.02)).abs() < 1e-15);
        assert!((j[(2, 2)] - (0.1 - 0.01)).abs() < 1e-15);
        assert!((j[(0, 1)] - 0.01).abs() < 1e-15);
        assert!((j[(1, 2)] - 0.01).abs() < 1e-15);
        assert_eq!(j[(0, 2)], 0.0);
        for r in 0..3 {
            assert!((j.row(r).sum() - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn band_scaling_multiplies_coupling_by_block_size() {
        let l = lattice(3, 10);
        let sigma = CovarianceProfile::assemble(l, 1.0, Scaling::Sigma, Boundary::Neumann).unwrap();
        let band = CovarianceProfile::assemble(l, 1.0, Scaling::Band, Boundary::Neumann).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let lap = laplacian(&l, Boundary::Neumann)[(a, b)];
                assert!((sigma.site_variance(a, b) - (0.1 * f64::from(u8::from(a == b)) + lap / 100.0)).abs() < 1e-15);
                assert!((band.site_variance(a, b) - (0.1 * f64::from(u8::from(a == b)) + lap / 10.0)).abs() < 1e-15);
            }
        }
        assert!((band.site_variance(0, 1) - 0.1).abs() < 1e-15);
        // Interior diagonal (1 - 2)/10 < 0: rejected by the checked builder.
        assert!(matches!(
            build_covariance(l, 1.0, Scaling::Band, Boundary::Neumann),
            Err(Error::NonPositiveCovariance { .. })
        ));
    }

    #[test]
    fn periodic_rows_sum_to_inverse_block() {
        for n in [1, 2, 3, 7] {
            let p = build_covariance(lattice(n, 8), 1.0, Scaling::Sigma, Boundary::Periodic).unwrap();
            for r in 0..n {
                assert!((p.variance().row(r).sum() - 0.125).abs() < 1e-15);
            }
        }
        let l2 = LatticeSpec::new(2, 3, 4).unwrap();
        let p = build_covariance(l2, 0.5, Scaling::Sigma, Boundary::Neumann).unwrap();
        for r in 0..9 {
            assert!((p.variance().row(r).sum() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn sample_is_hermitian_and_deterministic() {
        let p = build_covariance(lattice(1, 2), 0.0, Scaling::Sigma, Boundary::Neumann).unwrap();
        let a = sample_block_band(&p, 11);
        let b = sample_block_band(&p, 11);
        assert_eq!(a, b);
        assert_eq!(a.matrix.shape(), (2, 2));
        assert_eq!(a.matrix, a.matrix.adjoint());
    }

    #[test]
    fn covariance_check_rejects_tiny_sample_count() {
        let p = build_covariance(lattice(1, 8), 0.0, Scaling::Sigma, Boundary::Neumann).unwrap();
        assert!(matches!(
            empirical_covariance_check(&p, 0, Seed(1)),
            Err(Error::InvalidSampleCount { count: 0, .. })
        ));
    }

    #[test]
    fn dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = build_covariance(lattice(2, 3), 1.0, Scaling::Sigma, Boundary::Neumann).unwrap();
        let s = sample_block_band(&p, 5);
        let path = dir.path().join("h.bin");
        write_sample(&s, &path).unwrap();
        assert_eq!(read_sample(&path).unwrap(), s);
    }
}
