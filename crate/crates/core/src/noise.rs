//! Per-tile acquisition noise.
//!
//! White focal-plane noise of power spectral density `N0`, integrated over a
//! tile whose image covers area `Ã`, leaves the normalized tile amplitude
//! with variance `N0 / Ã`. Far tiles image onto small areas and are
//! therefore much noisier than near ones.

use serde::{Deserialize, Serialize};

use crate::binning::BinningScheme;
use crate::error::{Error, Result};
use crate::scalar::{normal_cdf, normal_interval, normal_sf, Scalar};

/// Power spectral density `N0` of the focal-plane noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Scalar")]
pub struct NoiseSpec<T> {
    psd: T,
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn new(psd: T) -> Result<Self> {
        if psd > T::zero() && psd.is_finite() {
            Ok(Self { psd })
        } else {
            Err(Error::Domain(format!("N0 must be positive, got {psd}")))
        }
    }

    pub fn psd(&self) -> T {
        self.psd
    }
}

/// Noise on one tile's amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileNoise<T> {
    variance: T,
    std: T,
}

impl<T: Scalar> TileNoise<T> {
    pub fn from_variance(variance: T) -> Result<Self> {
        if variance > T::zero() && variance.is_finite() {
            Ok(Self {
                variance,
                std: variance.sqrt(),
            })
        } else {
            Err(Error::Domain(format!(
                "tile variance must be positive, got {variance}"
            )))
        }
    }

    pub fn from_std(std: T) -> Result<Self> {
        Self::from_variance(std * std)
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn std(&self) -> T {
        self.std
    }
}

fn check_area<T: Scalar>(area: T) -> Result<()> {
    if area > T::zero() && area.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "projected area must be positive, got {area}"
        )))
    }
}

/// `σ² = N0 / Ã`.
pub fn tile_variance<T: Scalar>(area: T, spec: NoiseSpec<T>) -> Result<TileNoise<T>> {
    check_area(area)?;
    TileNoise::from_variance(spec.psd / area)
}

/// Effective SNR `a²·Ã / N0` of a uniform-amplitude tile.
pub fn effective_snr<T: Scalar>(amplitude: T, area: T, spec: NoiseSpec<T>) -> Result<T> {
    check_area(area)?;
    Ok(amplitude * amplitude * area / spec.psd)
}

/// Gaussian likelihood of true amplitude `a` given observation `v`.
pub fn tile_likelihood<T: Scalar>(a: T, v: T, noise: TileNoise<T>) -> T {
    let d = (a - v) / noise.std;
    let norm = (T::lit(2.0) * T::PI()).sqrt() * noise.std;
    (-d * d / T::lit(2.0)).exp() / norm
}

/// Prior over the true amplitude used when turning a noisy observation into
/// bin weights.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum AmplitudePrior<T> {
    /// Flat prior; the weights are the likelihood integrated over each bin.
    #[default]
    Uniform,
    /// Gaussian prior, e.g. the known image-generating distribution.
    Gaussian { mean: T, std: T },
}

/// Below this fraction of the bin width a standard deviation is treated as
/// zero and the whole weight lands on the observed bin.
pub const DEGENERATE_SIGMA_FRACTION: f64 = 1e-6;

/// Posterior weights over amplitude bins for observation `v` with noise
/// standard deviation `sigma`, under a flat prior.
pub fn bin_posterior<T: Scalar>(v: T, sigma: T, binning: &BinningScheme<T>) -> Vec<T> {
    let mut out = vec![T::zero(); binning.bin_count()];
    bin_posterior_into(v, sigma, binning, AmplitudePrior::Uniform, &mut out);
    out
}

/// Writes posterior bin weights into `out` (length `B`).
///
/// Bin `i` receives the Gaussian mass on `[e_i, e_{i+1}]`; the first and last
/// bins also take the tails beyond the amplitude range, so the weights sum
/// to one.
pub fn bin_posterior_into<T: Scalar>(
    v: T,
    sigma: T,
    binning: &BinningScheme<T>,
    prior: AmplitudePrior<T>,
    out: &mut [T],
) {
    let bins = binning.bin_count();
    assert_eq!(out.len(), bins, "output length must equal the bin count");

    let (center, spread) = match prior {
        AmplitudePrior::Uniform => (v, sigma),
        AmplitudePrior::Gaussian { mean, std } => {
            let (s2, t2) = (sigma * sigma, std * std);
            let total = s2 + t2;
            ((v * t2 + mean * s2) / total, sigma * std / total.sqrt())
        }
    };

    let home = binning.bin_of(center);
    let tiny = T::lit(DEGENERATE_SIGMA_FRACTION) * binning.bin_width(home);
    out.iter_mut().for_each(|w| *w = T::zero());
    if !(spread > tiny) {
        out[home] = T::one();
        return;
    }

    let edges = binning.edges();
    let z = |i: usize| (edges[i] - center) / spread;
    out[0] = normal_cdf(z(1));
    for (i, w) in out.iter_mut().enumerate().take(bins - 1).skip(1) {
        *w = normal_interval(z(i), z(i + 1));
    }
    out[bins - 1] = normal_sf(z(bins - 1));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_is_psd_over_area() {
        let s = NoiseSpec::<f64>::new(0.25).unwrap();
        assert_eq!(tile_variance(0.25, s).unwrap().variance(), 1.0);
        let n = tile_variance(
            5.453_779_842_378_012e-5,
            NoiseSpec::<f64>::new(0.01).unwrap(),
        )
        .unwrap();
        assert!((n.variance() - 183.359_070_021_420_2).abs() < 1e-9);
        assert!((n.std() - 13.541_014_364_567_383).abs() < 1e-10);
        let half = tile_variance(2.0 * 5.0e-5, NoiseSpec::<f64>::new(0.01).unwrap()).unwrap();
        let full = tile_variance(5.0e-5, NoiseSpec::<f64>::new(0.01).unwrap()).unwrap();
        assert!((full.variance() / half.variance() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_inputs() {
        assert!(NoiseSpec::<f64>::new(0.0).is_err());
        let s = NoiseSpec::<f64>::new(1.0).unwrap();
        assert!(tile_variance(0.0, s).is_err());
        assert!(tile_variance(-1.0, s).is_err());
        assert!(effective_snr(1.0, 0.0, s).is_err());
    }

    #[test]
    fn snr_values() {
        let s = NoiseSpec::<f64>::new(0.01).unwrap();
        let a = 5.453_779_842_378_012e-5;
        assert_eq!(effective_snr(0.0, a, s).unwrap(), 0.0);
        let snr = effective_snr(128.0, a, s).unwrap();
        assert!((snr - 89.354_728_937_521_35).abs() < 1e-9);
        assert!((effective_snr(256.0, a, s).unwrap() / snr - 4.0).abs() < 1e-12);
        let var = tile_variance(a, s).unwrap().variance();
        assert!((snr - 128.0 * 128.0 / var).abs() < 1e-9);
    }

    #[test]
    fn likelihood_shape() {
        let unit = TileNoise::<f64>::from_std(1.0).unwrap();
        assert!((tile_likelihood(3.0, 3.0, unit) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((tile_likelihood(4.0, 3.0, unit) - 0.241_970_724_519_143_37).abs() < 1e-15);
        let n = TileNoise::<f64>::from_std(2.5).unwrap();
        assert_eq!(tile_likelihood(1.0, 7.0, n), tile_likelihood(7.0, 1.0, n));
        assert!(tile_likelihood(7.0, 7.0, n) > tile_likelihood(7.1, 7.0, n));
    }

    #[test]
    fn posterior_center_bin() {
        let b = BinningScheme::<f64>::uniform(8, 0.0, 8.0).unwrap();
        let w = bin_posterior(3.5, 1.0, &b);
        assert!((w[3] - 0.382_924_922_548_026_2).abs() < 1e-12);
        assert!((w[2] - 0.241_730_337_457_128_83).abs() < 1e-12);
        assert!((w[4] - 0.241_730_337_457_128_83).abs() < 1e-12);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn posterior_collapses_for_tiny_sigma() {
        let b = BinningScheme::<f64>::uniform(8, 0.0, 8.0).unwrap();
        for s in [0.0, 1e-9, 5e-7] {
            let w = bin_posterior(5.2, s, &b);
            assert_eq!(w[5], 1.0);
            assert_eq!(w.iter().filter(|&&x| x != 0.0).count(), 1);
        }
    }

    #[test]
    fn posterior_tails_absorbed() {
        let b = BinningScheme::<f64>::uniform(8, 0.0, 8.0).unwrap();
        let w = bin_posterior(-10.0, 1.0, &b);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let w = bin_posterior(100.0, 3.0, &b);
        assert!((w[7] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_prior_shrinks_toward_mean() {
        let b = BinningScheme::<f64>::uniform(16, 0.0, 256.0).unwrap();
        let mut flat = vec![0.0; 16];
        let mut shrunk = vec![0.0; 16];
        bin_posterior_into(240.0, 40.0, &b, AmplitudePrior::Uniform, &mut flat);
        bin_posterior_into(
            240.0,
            40.0,
            &b,
            AmplitudePrior::Gaussian {
                mean: 128.0,
                std: 32.0,
            },
            &mut shrunk,
        );
        let mean = |w: &[f64]| w.iter().enumerate().map(|(i, p)| i as f64 * p).sum::<f64>();
        assert!(mean(&shrunk) < mean(&flat));
        assert!((shrunk.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
