//! Dyadic analytic-wavelet filter bank (low-pass Φ + band-pass Ψ family).
//!
//! Filters are Morlet-style: Gaussians in frequency with the admissibility
//! correction subtracted so every band-pass vanishes exactly at DC, and the
//! band-pass family is zero on negative frequencies (analytic). After
//! construction all band-pass spectra share one gain chosen so the
//! Littlewood-Paley sum `|Φ̂(ω)|² + Σ_j |Ψ̂_j(ω)|²` never exceeds 1 on the
//! positive axis, which makes the whole scattering cascade non-expansive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{cast, Scalar};

/// Bandwidth-to-spacing factor: adjacent filters cross at about -2.4 dB.
/// Chosen together with [`DC_CUTOFF_DIV`] so the Q=1 dyadic bank keeps its
/// Littlewood-Paley sum above 0.35 across the covered band; exact -3 dB
/// crossings sag to ~0.34 and fail that floor.
const CROSSING_FACTOR: f64 = 1.36;

/// Mother center frequency as a fraction of the sampling rate.
const MOTHER_CENTER: f64 = 0.425;

/// Width divisor of the smooth DC cutoff `exp(-(center / (div * omega))^2)`.
/// The admissibility correction alone leaves a first-derivative kink at
/// omega = 0+ whose kernel tails decay only like 1/t^2; the cutoff flattens
/// the spectrum to all orders at DC so long constant stretches leak almost
/// nothing into the band-pass outputs.
const DC_CUTOFF_DIV: f64 = 8.0;

/// Oversampling of the gain-calibration scan relative to `fft_len`. The gain
/// must bound the *continuous* Littlewood-Paley sum, not just its samples on
/// one grid, because the cascade re-samples the filters on per-signal grids.
const GAIN_SCAN_OVERSAMPLE: usize = 32;

/// Construction parameters of the filter bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterBankConfig {
    /// Sampling rate in Hz.
    pub sample_rate: f64,
    /// Canonical transform length in samples (power of two).
    pub fft_len: usize,
    /// Number of dyadic scales (octaves spanned by the band-pass family).
    pub scales: usize,
    /// Wavelets per octave (quality factor).
    pub wavelets_per_octave: usize,
    /// Maximum scattering order (1 or 2).
    pub max_order: usize,
    /// Averaging window in samples (power of two); also the decimation stride.
    pub averaging_window: usize,
    /// Orientations per scale; fixed to 1 for real 1-D signals.
    pub orientations: usize,
    /// Keep the order-0 (pure low-pass) coefficient in the output path list.
    pub include_order0: bool,
}

impl Default for FilterBankConfig {
    fn default() -> Self {
        Self {
            sample_rate: 200.0,
            fft_len: 4096,
            scales: 8,
            wavelets_per_octave: 1,
            max_order: 2,
            averaging_window: 512,
            orientations: 1,
            include_order0: false,
        }
    }
}

impl FilterBankConfig {
    /// Checks every config invariant, naming the violated constraint.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return fail(format!("sample_rate must be positive, got {}", self.sample_rate));
        }
        if self.averaging_window == 0 || !self.averaging_window.is_power_of_two() {
            return fail(format!(
                "averaging_window must be a power of two, got {}",
                self.averaging_window
            ));
        }
        if self.scales == 0 {
            return fail("scales must be >= 1".into());
        }
        if self.scales >= usize::BITS as usize || (1usize << self.scales) > self.averaging_window {
            return fail(format!(
                "2^scales must not exceed averaging_window: 2^{} > {}",
                self.scales, self.averaging_window
            ));
        }
        if self.wavelets_per_octave < 1 {
            return fail("wavelets_per_octave must be >= 1".into());
        }
        if !(1..=2).contains(&self.max_order) {
            return fail(format!("max_order must be 1 or 2, got {}", self.max_order));
        }
        if !self.fft_len.is_power_of_two() {
            return fail(format!("fft_len must be a power of two, got {}", self.fft_len));
        }
        if self.fft_len < 2 * self.averaging_window {
            return fail(format!(
                "fft_len must be at least 2*averaging_window: {} < {}",
                self.fft_len,
                2 * self.averaging_window
            ));
        }
        if self.orientations != 1 {
            return fail(format!(
                "orientations is fixed to 1 for 1-D signals, got {}",
                self.orientations
            ));
        }
        Ok(())
    }

    /// Number of band-pass filters the bank will contain.
    pub fn n_filters(&self) -> usize {
        self.scales * self.wavelets_per_octave
    }

    /// Output frame rate in Hz after decimation by the averaging window.
    pub fn frame_rate(&self) -> f64 {
        self.sample_rate / self.averaging_window as f64
    }
}

/// One analytic band-pass filter.
#[derive(Debug, Clone)]
pub struct BandPass<T> {
    /// Octave index of this filter (`position / wavelets_per_octave`).
    pub scale: usize,
    /// Center frequency in Hz.
    pub center_hz: f64,
    /// Real non-negative spectrum on the `fft_len` grid; exactly zero at DC
    /// and on all negative-frequency bins.
    pub spectrum: Vec<T>,
}

/// Immutable filter bank: one low-pass plus `scales * wavelets_per_octave`
/// analytic band-pass filters, all sharing a single non-expansiveness gain.
#[derive(Debug, Clone)]
pub struct FilterBank<T: Scalar> {
    pub config: FilterBankConfig,
    /// Real symmetric low-pass spectrum on the full `fft_len` grid.
    pub low_pass: Vec<T>,
    /// Band-pass filters ordered from highest to lowest center frequency.
    pub band_pass: Vec<BandPass<T>>,
    /// `(A_low, A_high)` Littlewood-Paley bounds measured on the `fft_len` grid.
    pub frame_bounds: (f64, f64),
    centers_hz: Vec<f64>,
    sigmas_hz: Vec<f64>,
    low_pass_sigma_hz: f64,
    band_gain: f64,
}

#[inline]
fn gaussian(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp()
}

/// Morlet-style magnitude response before gain: Gaussian at `center` minus
/// the admissibility term that forces an exact zero at ω = 0, shaped by the
/// smooth DC cutoff (zero to all orders at ω = 0, asymptotically 1).
#[inline]
fn band_pass_raw(omega: f64, center: f64, sigma: f64) -> f64 {
    let corrected =
        gaussian(omega - center, sigma) - gaussian(center, sigma) * gaussian(omega, sigma);
    let ratio = center / (DC_CUTOFF_DIV * omega);
    corrected * (-ratio * ratio).exp()
}

impl<T: Scalar> FilterBank<T> {
    /// Builds the bank from a validated config.
    ///
    /// Deterministic: equal configs produce bit-identical spectra. All design
    /// math runs in `f64` and is narrowed to `T` at the end.
    pub fn build(config: FilterBankConfig) -> Result<Self> {
        config.validate()?;

        let fs = config.sample_rate;
        let n_filters = config.n_filters();
        let ratio = 2f64.powf(1.0 / config.wavelets_per_octave as f64);
        let alpha = CROSSING_FACTOR * (ratio - 1.0) / (ratio + 1.0);
        let mother = MOTHER_CENTER * fs;

        let centers_hz: Vec<f64> = (0..n_filters)
            .map(|j| mother * 2f64.powf(-(j as f64) / config.wavelets_per_octave as f64))
            .collect();
        let sigmas_hz: Vec<f64> = centers_hz.iter().map(|&xi| alpha * xi).collect();

        let bin_hz = fs / config.fft_len as f64;
        let narrowest = *sigmas_hz.last().expect("at least one filter");
        if narrowest < bin_hz {
            return Err(Error::Config(format!(
                "scales too large for fft_len: lowest filter bandwidth {:.6} Hz \
                 is below one frequency bin ({:.6} Hz)",
                narrowest, bin_hz
            )));
        }

        let low_pass_sigma_hz = fs / (2.0 * std::f64::consts::PI * (config.averaging_window as f64 / 4.0));

        let band_gain = calibrate_gain(
            fs,
            config.fft_len * GAIN_SCAN_OVERSAMPLE,
            &centers_hz,
            &sigmas_hz,
            low_pass_sigma_hz,
        );

        let mut bank = FilterBank {
            low_pass: Vec::new(),
            band_pass: Vec::new(),
            frame_bounds: (0.0, 0.0),
            centers_hz,
            sigmas_hz,
            low_pass_sigma_hz,
            band_gain,
            config,
        };
        bank.low_pass = bank.sample_low_pass(bank.config.fft_len);
        bank.band_pass = (0..n_filters)
            .map(|j| BandPass {
                scale: j / bank.config.wavelets_per_octave,
                center_hz: bank.centers_hz[j],
                spectrum: bank.sample_band_pass(j, bank.config.fft_len),
            })
            .collect();
        bank.frame_bounds = bank.littlewood_paley_bounds();
        Ok(bank)
    }

    /// Number of band-pass filters.
    pub fn n_filters(&self) -> usize {
        self.band_pass.len()
    }

    /// Center frequencies in Hz, highest first.
    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    /// Frequency-domain standard deviations in Hz, matching `centers_hz`.
    pub fn sigmas_hz(&self) -> &[f64] {
        &self.sigmas_hz
    }

    /// Shared gain applied to every band-pass spectrum.
    pub fn band_gain(&self) -> f64 {
        self.band_gain
    }

    /// Frequency-domain standard deviation of the low-pass in Hz.
    pub fn low_pass_sigma_hz(&self) -> f64 {
        self.low_pass_sigma_hz
    }

    /// Samples the low-pass spectrum on an arbitrary even-length grid.
    ///
    /// The spectrum is symmetric (`out[k] == out[n-k]`), so convolving a real
    /// signal with it yields a real result.
    pub fn sample_low_pass(&self, n: usize) -> Vec<T> {
        let bin = self.config.sample_rate / n as f64;
        (0..n)
            .map(|k| {
                let folded = k.min(n - k) as f64 * bin;
                cast(gaussian(folded, self.low_pass_sigma_hz))
            })
            .collect()
    }

    /// Samples band-pass filter `idx` on an arbitrary even-length grid,
    /// including the shared gain. Zero on DC and all negative-frequency bins.
    pub fn sample_band_pass(&self, idx: usize, n: usize) -> Vec<T> {
        let bin = self.config.sample_rate / n as f64;
        let center = self.centers_hz[idx];
        let sigma = self.sigmas_hz[idx];
        let mut out = vec![T::zero(); n];
        for (k, slot) in out.iter_mut().enumerate().take(n / 2 + 1).skip(1) {
            let omega = k as f64 * bin;
            *slot = cast(self.band_gain * band_pass_raw(omega, center, sigma));
        }
        out
    }

    /// Effective one-sided kernel support in samples: eight standard
    /// deviations of the widest time-domain envelope in the bank. Signals are
    /// padded by this margin before FFT convolution so edge wrap-around stays
    /// below ~1e-14.
    pub fn time_margin(&self) -> usize {
        let fs = self.config.sample_rate;
        let sigma_f_min = self
            .sigmas_hz
            .iter()
            .copied()
            .fold(self.low_pass_sigma_hz, f64::min);
        let sigma_t = fs / (2.0 * std::f64::consts::PI * sigma_f_min);
        (8.0 * sigma_t).ceil() as usize
    }

    /// `(A_low, A_high)` of the Littlewood-Paley sum over the stored spectra.
    ///
    /// `A_high` is the maximum of `Φ̂² + Σ Ψ̂²` over the positive-frequency
    /// grid up to `fs/2`; `A_low` is the minimum over the covered band
    /// `[ξ_last/2, fs/2]` (below the lowest wavelet the bank intentionally
    /// defers to the low-pass alone).
    pub fn littlewood_paley_bounds(&self) -> (f64, f64) {
        let n = self.config.fft_len;
        let bin = self.config.sample_rate / n as f64;
        let covered_from = self.centers_hz.last().copied().unwrap_or(0.0) / 2.0;
        let mut a_high = f64::NEG_INFINITY;
        let mut a_low = f64::INFINITY;
        for k in 0..=n / 2 {
            let omega = k as f64 * bin;
            let phi = self.low_pass[k].to_f64().unwrap_or(0.0);
            let mut sum = phi * phi;
            for bp in &self.band_pass {
                let v = bp.spectrum[k].to_f64().unwrap_or(0.0);
                sum += v * v;
            }
            a_high = a_high.max(sum);
            if omega >= covered_from {
                a_low = a_low.min(sum);
            }
        }
        if !a_low.is_finite() {
            a_low = 0.0;
        }
        (a_low, a_high)
    }
}

/// Largest gain `c` such that `Φ̂²(ω) + c²·Σ Ψ̂²(ω) <= 1` on a finely
/// oversampled positive-frequency grid, capped at 1 (an under-complete bank
/// is never amplified).
fn calibrate_gain(
    fs: f64,
    scan_len: usize,
    centers: &[f64],
    sigmas: &[f64],
    low_pass_sigma: f64,
) -> f64 {
    let bin = fs / scan_len as f64;
    let mut c2 = 1.0f64;
    for k in 1..=scan_len / 2 {
        let omega = k as f64 * bin;
        let phi = gaussian(omega, low_pass_sigma);
        let mut sum = 0.0;
        for (&xi, &sigma) in centers.iter().zip(sigmas) {
            let v = band_pass_raw(omega, xi, sigma);
            sum += v * v;
        }
        if sum > 1e-280 {
            let head = 1.0 - phi * phi;
            c2 = c2.min(head / sum);
        }
    }
    c2.max(0.0).sqrt()
}
