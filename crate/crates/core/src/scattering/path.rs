//! Scattering path identifiers and the coefficient-count formula.

use crate::error::{Error, Result};

/// One scattering coefficient channel: the sequence of wavelet choices that
/// produced it. Second-order paths require `second > first` — the envelope of
/// a band has no content above its own band, so only strictly lower-frequency
/// wavelets apply.
///
/// The derived `Ord` is the global path ordering: by order, then `first`,
/// then `second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScatteringPath {
    /// Pure low-pass average of the input.
    Order0,
    /// `| x * Ψ_first | * Φ`.
    Order1 { first: usize },
    /// `|| x * Ψ_first | * Ψ_second | * Φ`.
    Order2 { first: usize, second: usize },
}

impl ScatteringPath {
    /// Scattering order (0, 1 or 2).
    pub fn order(&self) -> usize {
        match self {
            ScatteringPath::Order0 => 0,
            ScatteringPath::Order1 { .. } => 1,
            ScatteringPath::Order2 { .. } => 2,
        }
    }

    /// `[order, j1, j2]` with `-1` for absent entries (container encoding).
    pub fn to_triple(&self) -> [i64; 3] {
        match *self {
            ScatteringPath::Order0 => [0, -1, -1],
            ScatteringPath::Order1 { first } => [1, first as i64, -1],
            ScatteringPath::Order2 { first, second } => [2, first as i64, second as i64],
        }
    }

    /// Parses the container encoding back into a path.
    pub fn from_triple(triple: [i64; 3]) -> Result<Self> {
        let bad = || Error::Input(format!("invalid path triple {triple:?}"));
        match triple {
            [0, -1, -1] => Ok(ScatteringPath::Order0),
            [1, j1, -1] if j1 >= 0 => Ok(ScatteringPath::Order1 { first: j1 as usize }),
            [2, j1, j2] if j1 >= 0 && j2 > j1 => Ok(ScatteringPath::Order2 {
                first: j1 as usize,
                second: j2 as usize,
            }),
            _ => Err(bad()),
        }
    }
}

/// Enumerates every path over `n_filters` band-pass filters up to
/// `max_order`, in the global (order, j1, j2) ordering.
pub fn enumerate_paths(
    n_filters: usize,
    max_order: usize,
    include_order0: bool,
) -> Vec<ScatteringPath> {
    let mut paths = Vec::new();
    if include_order0 {
        paths.push(ScatteringPath::Order0);
    }
    if max_order >= 1 {
        paths.extend((0..n_filters).map(|first| ScatteringPath::Order1 { first }));
    }
    if max_order >= 2 {
        for first in 0..n_filters {
            for second in first + 1..n_filters {
                paths.push(ScatteringPath::Order2 { first, second });
            }
        }
    }
    paths
}

/// Size of the scattering vector for `scales` scales, maximum order
/// `max_order` and `orientations` orientations per scale, counting the
/// order-0 term: `sum_{k=0}^{m} p^k * C(J, k)`.
pub fn path_count(scales: usize, max_order: usize, orientations: usize) -> u64 {
    (0..=max_order)
        .map(|k| (orientations as u64).pow(k as u32) * binomial(scales as u64, k as u64))
        .sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
