//! Cross-validation of the FFT cascade against a direct time-domain
//! convolution oracle.
//!
//! The oracle shares only the closed-form filter responses with the library;
//! its kernels come from trapezoidal quadrature of the inverse Fourier
//! integral and it convolves, rectifies, smooths and decimates entirely in
//! the time domain.

use num_complex::Complex;
use polyscat::filterbank::{FilterBank, FilterBankConfig};
use polyscat::scattering::scatter_channel;
use rand::Rng;

const FS: f64 = 200.0;
const WINDOW: usize = 512;

fn bank() -> FilterBank<f64> {
    FilterBank::build(FilterBankConfig::default()).unwrap()
}

/// Closed-form band-pass magnitude response (admissibility-corrected Morlet
/// with the smooth DC cutoff), written out independently of the library.
fn response(f: f64, center: f64, sigma: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    let g = |x: f64, s: f64| (-x * x / (2.0 * s * s)).exp();
    let corrected = g(f - center, sigma) - g(center, sigma) * g(f, sigma);
    let ratio = center / (8.0 * f);
    corrected * (-ratio * ratio).exp()
}

/// Complex analytic kernel: `h[t] = (1/fs) * \int_0^{fs/2} gain * psi(f) *
/// exp(i 2 pi f t / fs) df` via the trapezoid rule.
fn band_kernel(center: f64, sigma: f64, gain: f64, half_width: usize) -> Vec<Complex<f64>> {
    let f_max = (center + 8.0 * sigma).min(FS / 2.0);
    let steps = 1 << 14;
    let df = f_max / steps as f64;
    let mut taps = vec![Complex::new(0.0, 0.0); 2 * half_width + 1];
    for (i, tap) in taps.iter_mut().enumerate() {
        let t = i as f64 - half_width as f64;
        let mut acc = Complex::new(0.0, 0.0);
        for k in 0..=steps {
            let f = k as f64 * df;
            let weight = if k == 0 || k == steps { 0.5 } else { 1.0 };
            let mag = gain * response(f, center, sigma);
            let phase = std::f64::consts::TAU * f * t / FS;
            acc += Complex::new(phase.cos(), phase.sin()) * (mag * weight);
        }
        *tap = acc * (df / FS);
    }
    taps
}

/// Real Gaussian averaging kernel matching the low-pass.
fn low_pass_kernel(sigma_hz: f64, half_width: usize) -> Vec<f64> {
    let f_max = 8.0 * sigma_hz;
    let steps = 1 << 15;
    let df = f_max / steps as f64;
    let g = |f: f64| (-f * f / (2.0 * sigma_hz * sigma_hz)).exp();
    (0..=2 * half_width)
        .map(|i| {
            let t = i as f64 - half_width as f64;
            let mut acc = 0.0;
            for k in 0..=steps {
                let f = k as f64 * df;
                let weight = if k == 0 || k == steps { 0.5 } else { 1.0 };
                // Two-sided spectrum: cos covers the conjugate half.
                let factor = if k == 0 { 1.0 } else { 2.0 };
                acc += weight * factor * g(f) * (std::f64::consts::TAU * f * t / FS).cos();
            }
            acc * df / FS
        })
        .collect()
}

/// Order-1 oracle for one filter: direct convolution, modulus, Gaussian
/// averaging, stride decimation at window centers.
fn oracle_order1(
    x: &[f64],
    kernel: &[Complex<f64>],
    phi: &[f64],
) -> Vec<f64> {
    let hw = kernel.len() / 2;
    let envelope: Vec<f64> = (0..x.len())
        .map(|t| {
            let mut acc = Complex::new(0.0, 0.0);
            for (i, k) in kernel.iter().enumerate() {
                let offset = i as isize - hw as isize;
                let s = t as isize - offset;
                if s >= 0 && (s as usize) < x.len() {
                    acc += *k * x[s as usize];
                }
            }
            acc.norm()
        })
        .collect();
    let phw = phi.len() / 2;
    let n_frames = x.len() / WINDOW;
    (0..n_frames)
        .map(|f| {
            let center = (f * WINDOW + WINDOW / 2) as isize;
            let mut acc = 0.0;
            for (i, &p) in phi.iter().enumerate() {
                let s = center - (i as isize - phw as isize);
                if s >= 0 && (s as usize) < envelope.len() {
                    acc += p * envelope[s as usize];
                }
            }
            acc
        })
        .collect()
}

fn kernel_half_width(sigma_hz: f64) -> usize {
    (8.0 * FS / (std::f64::consts::TAU * sigma_hz)).ceil() as usize
}

#[test]
fn sinusoid_energy_concentrates_in_its_own_path() {
    let bank = bank();
    let phi = low_pass_kernel(bank.low_pass_sigma_hz(), 1100);
    let len = 16 * WINDOW;
    let paths = polyscat::scattering::enumerate_paths(8, 1, false);

    for &target in &[2usize, 4] {
        let freq = bank.centers_hz()[target];
        let x: Vec<f64> = (0..len)
            .map(|t| (std::f64::consts::TAU * freq * t as f64 / FS).sin())
            .collect();

        let coeffs = scatter_channel(&x, &bank).unwrap();
        let interior: Vec<usize> = (coeffs.n_frames / 3..2 * coeffs.n_frames / 3).collect();

        // Implementation energies over the order-1 paths.
        let impl_energy: Vec<f64> = (0..8)
            .map(|j| {
                let p = paths
                    .iter()
                    .position(|q| *q == polyscat::scattering::ScatteringPath::Order1 { first: j })
                    .unwrap();
                interior.iter().map(|&f| coeffs.at(f, p).powi(2)).sum()
            })
            .collect();

        // Oracle energies from direct time-domain convolution.
        let oracle_energy: Vec<f64> = (0..8)
            .map(|j| {
                let kernel = band_kernel(
                    bank.centers_hz()[j],
                    bank.sigmas_hz()[j],
                    bank.band_gain(),
                    kernel_half_width(bank.sigmas_hz()[j]),
                );
                let row = oracle_order1(&x, &kernel, &phi);
                interior.iter().map(|&f| row[f].powi(2)).sum()
            })
            .collect();

        let impl_total: f64 = impl_energy.iter().sum();
        let oracle_total: f64 = oracle_energy.iter().sum();
        let impl_frac = impl_energy[target] / impl_total;
        let oracle_frac = oracle_energy[target] / oracle_total;
        assert!(
            impl_frac >= 0.70,
            "target {target}: implementation fraction {impl_frac}"
        );
        assert!(
            oracle_frac >= 0.70,
            "target {target}: oracle fraction {oracle_frac}"
        );
        assert!(
            (impl_frac - oracle_frac).abs() < 0.02,
            "fraction mismatch: impl {impl_frac} vs oracle {oracle_frac}"
        );
        // Filter 0 straddles Nyquist where the oracle's quadrature cut and
        // the implementation's bin cut diverge; compare the rest.
        for j in 1..8 {
            let of = oracle_energy[j] / oracle_total;
            if of > 0.01 {
                let rel = (impl_energy[j] / impl_total - of).abs() / of;
                assert!(rel < 0.1, "path {j}: impl/oracle energy rel diff {rel}");
            }
        }
    }
}

#[test]
fn random_signal_first_order_matches_oracle() {
    let bank = bank();
    let phi = low_pass_kernel(bank.low_pass_sigma_hz(), 1100);
    let len = 8 * WINDOW;
    let mut rng = polyscat::seed::rng(42, "oracle-random");
    let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();

    let coeffs = scatter_channel(&x, &bank).unwrap();
    let paths = polyscat::scattering::enumerate_paths(8, 2, false);
    let interior: Vec<usize> = (2..coeffs.n_frames - 2).collect();

    // Filter 0 straddles Nyquist, where the oracle's quadrature cut and the
    // implementation's bin cut differ slightly; compare the rest.
    for j in 1..8 {
        let kernel = band_kernel(
            bank.centers_hz()[j],
            bank.sigmas_hz()[j],
            bank.band_gain(),
            kernel_half_width(bank.sigmas_hz()[j]),
        );
        let row = oracle_order1(&x, &kernel, &phi);
        let p = paths
            .iter()
            .position(|q| *q == polyscat::scattering::ScatteringPath::Order1 { first: j })
            .unwrap();
        let mut diff2 = 0.0;
        let mut norm2 = 0.0;
        for &f in &interior {
            diff2 += (coeffs.at(f, p) - row[f]).powi(2);
            norm2 += row[f].powi(2);
        }
        let rel = (diff2 / norm2).sqrt();
        assert!(rel < 0.01, "filter {j}: relative deviation {rel}");
    }
}
